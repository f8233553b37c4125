#include "pcgen/priors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

// One Beta(alpha, beta) draw via Jöhnk's method carried out in log space.
// With alpha = beta = 0.01, U^(1/alpha) underflows to zero in the direct
// formulation; all quantities here stay as logarithms until the final ratio.
double sample_beta(double alpha, double beta, Rng& rng) {
  for (;;) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    if (u <= 0.0 || v <= 0.0) {
      continue;
    }
    const double log_x = std::log(u) / alpha;
    const double log_y = std::log(v) / beta;
    const double m = std::max(log_x, log_y);
    const double log_sum =
        m + std::log(std::exp(log_x - m) + std::exp(log_y - m));
    if (log_sum <= 0.0) {  // accept iff X + Y <= 1
      const double z = std::exp(log_x - log_sum);
      return std::clamp(z, 1e-12, 1.0 - 1e-12);
    }
  }
}

}  // namespace

PriorSpec gaussian_prior(int dim) {
  PriorSpec p;
  p.kind = PriorSpec::Kind::gaussian;
  p.dim = dim;
  validate(p);
  return p;
}

PriorSpec beta_prior(int dim, double alpha, double beta) {
  PriorSpec p;
  p.kind = PriorSpec::Kind::beta;
  p.dim = dim;
  p.alpha = alpha;
  p.beta = beta;
  validate(p);
  return p;
}

PriorSpec categorical_prior(int k) {
  PriorSpec p;
  p.kind = PriorSpec::Kind::categorical;
  p.dim = k;
  p.k = k;
  validate(p);
  return p;
}

PriorSpec make_gmm_prior(int k, int dim, std::uint64_t seed) {
  if (k < 1 || dim < 1) {
    throw config_error("make_gmm_prior: k and dim must be >= 1");
  }
  PriorSpec p;
  p.kind = PriorSpec::Kind::gmm;
  p.dim = dim;
  p.k = k;
  Rng rng(seed);
  p.means.resize(static_cast<std::size_t>(k) * dim);
  for (double& m : p.means) {
    m = 3.0 * rng.normal();
  }
  p.diag_stds.assign(static_cast<std::size_t>(k) * dim, 1.0);
  p.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
  validate(p);
  return p;
}

void validate(const PriorSpec& prior) {
  if (prior.dim < 1) {
    throw config_error("prior: dim must be >= 1, got " +
                       std::to_string(prior.dim));
  }
  switch (prior.kind) {
    case PriorSpec::Kind::gaussian:
      break;
    case PriorSpec::Kind::gmm: {
      const std::size_t kd = static_cast<std::size_t>(prior.k) * prior.dim;
      if (prior.k < 1 || prior.means.size() != kd ||
          prior.diag_stds.size() != kd ||
          prior.weights.size() != static_cast<std::size_t>(prior.k)) {
        throw config_error("gmm prior: inconsistent k/means/stds/weights sizes");
      }
      double wsum = 0.0;
      for (double w : prior.weights) {
        if (w < 0.0) {
          throw config_error("gmm prior: negative mixture weight");
        }
        wsum += w;
      }
      if (std::abs(wsum - 1.0) > 1e-9) {
        throw config_error("gmm prior: weights must sum to 1, got " +
                           std::to_string(wsum));
      }
      for (double s : prior.diag_stds) {
        if (!(s > 0.0)) {
          throw config_error("gmm prior: diag_stds must be positive");
        }
      }
      break;
    }
    case PriorSpec::Kind::beta:
      if (!(prior.alpha > 0.0) || !(prior.beta > 0.0)) {
        throw config_error("beta prior: alpha and beta must be positive");
      }
      break;
    case PriorSpec::Kind::categorical:
      if (prior.k != prior.dim || prior.k < 1) {
        throw config_error("categorical prior: k must equal dim and be >= 1");
      }
      break;
  }
}

std::vector<double> sample(const PriorSpec& prior, int batch, Rng& rng) {
  if (batch < 1) {
    throw config_error("sample: batch must be >= 1, got " +
                       std::to_string(batch));
  }
  validate(prior);
  std::vector<double> out(static_cast<std::size_t>(batch) * prior.dim, 0.0);
  switch (prior.kind) {
    case PriorSpec::Kind::gaussian:
      for (double& v : out) {
        v = rng.normal();
      }
      break;
    case PriorSpec::Kind::gmm:
      for (int b = 0; b < batch; ++b) {
        const double u = rng.uniform();
        int comp = prior.k - 1;
        double acc = 0.0;
        for (int c = 0; c < prior.k; ++c) {
          acc += prior.weights[static_cast<std::size_t>(c)];
          if (u < acc) {
            comp = c;
            break;
          }
        }
        const std::size_t base = static_cast<std::size_t>(comp) * prior.dim;
        for (int d = 0; d < prior.dim; ++d) {
          out[static_cast<std::size_t>(b) * prior.dim + d] =
              prior.means[base + d] + prior.diag_stds[base + d] * rng.normal();
        }
      }
      break;
    case PriorSpec::Kind::beta:
      for (double& v : out) {
        v = sample_beta(prior.alpha, prior.beta, rng);
      }
      break;
    case PriorSpec::Kind::categorical:
      for (int b = 0; b < batch; ++b) {
        const int c = rng.uniform_int(prior.k);
        out[static_cast<std::size_t>(b) * prior.dim + c] = 1.0;
      }
      break;
  }
  return out;
}

double kl_gaussian(const std::vector<double>& mu,
                   const std::vector<double>& logvar) {
  if (mu.size() != logvar.size()) {
    throw shape_error("kl_gaussian: mu and logvar sizes differ");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double var = std::exp(logvar[i]);
    kl += mu[i] * mu[i] + var - logvar[i] - 1.0;
  }
  return 0.5 * kl;
}

}  // namespace pcgen
