#pragma once

#include <cstdint>
#include <vector>

#include "pcgen/rng.hpp"

namespace pcgen {

// Sampleable latent prior p(z). `dim` is the code width; for categorical it
// is the number of classes k (samples are one-hot rows of width k).
struct PriorSpec {
  enum class Kind { gaussian, gmm, beta, categorical };

  Kind kind = Kind::gaussian;
  int dim = 0;

  // gmm only: k components with per-dimension means/stds and mixing weights.
  int k = 0;
  std::vector<double> means;     // k*dim, row-major per component
  std::vector<double> diag_stds; // k*dim
  std::vector<double> weights;   // k, non-negative, sums to 1

  // beta only.
  double alpha = 0.01;
  double beta = 0.01;
};

PriorSpec gaussian_prior(int dim);
PriorSpec beta_prior(int dim, double alpha = 0.01, double beta = 0.01);
PriorSpec categorical_prior(int k);

// Means drawn once from N(0, 3^2 I), stds fixed at 1, uniform weights.
PriorSpec make_gmm_prior(int k, int dim, std::uint64_t seed);

// Throws config_error when invariants are violated (weights must be
// non-negative and sum to 1, stds positive, alpha/beta positive, dim >= 1).
void validate(const PriorSpec& prior);

// batch*dim flat row-major samples; one-hot rows for categorical.
std::vector<double> sample(const PriorSpec& prior, int batch, Rng& rng);

// KL(N(mu, diag exp(logvar)) || N(0, I)) = 1/2 sum(mu^2 + s^2 - log s^2 - 1).
double kl_gaussian(const std::vector<double>& mu,
                   const std::vector<double>& logvar);

}  // namespace pcgen
