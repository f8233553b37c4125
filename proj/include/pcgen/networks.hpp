#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcgen/pointcloud.hpp"
#include "pcgen/rng.hpp"
#include "pcgen/tensor.hpp"

namespace pcgen {

// Latent description of one cloud. logvar only for variational encoders,
// y (a probability vector over categorical_k classes) only for clustering
// encoders.
struct LatentCode {
  std::vector<double> mu;
  std::optional<std::vector<double>> logvar;
  std::optional<std::vector<double>> y;
};

struct EncoderConfig {
  std::vector<int> conv_widths = {64, 128, 128, 256, 512};  // per-point layers
  int feature_dim = 512;  // FC width after pooling
  int latent_dim = 128;   // 100 for binary-code runs
  bool variational = false;
  int categorical_k = 0;    // > 0 adds the softmax clustering head
  bool sigmoid_out = false; // Beta-prior runs: deterministic codes in (0,1)
};

struct GeneratorConfig {
  // Hidden widths; the full chain is input -> hidden... -> 3*n_points.
  std::vector<int> hidden = {256, 512, 512, 1024};
  int input_dim = 128;  // latent_dim, plus categorical_k when clustering
  int n_points = 256;
};

struct DiscriminatorConfig {
  std::vector<int> hidden = {512, 512, 128, 64};
  int input_dim = 128;  // code width it scores
};

struct Dense {
  Param w, b;
};

// Shared-weight per-point layers with ReLU, max-pool over the point axis,
// one FC+ReLU, then linear heads: mu (sigmoid-squashed for Beta runs),
// optionally logvar (clamped to [-10, 10]) and a softmax clustering head.
class Encoder {
 public:
  Encoder(EncoderConfig cfg, Rng& rng, const std::string& name = "encoder");

  struct Codes {
    Tensor mu;      // {1, latent_dim}
    Tensor logvar;  // defined iff variational
    Tensor y;       // defined iff categorical_k > 0
  };
  Codes apply(Tape& tape, Tensor cloud);  // cloud {N,3}
  LatentCode encode(const PointCloud& cloud);  // value-only

  std::vector<Param*> params();
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  std::vector<Dense> conv_;
  Dense fc_, mu_head_, logvar_head_, cat_head_;
};

// Fully-connected stack, ReLU on all but the last layer; final width 3N
// reshaped to {N,3}.
class Generator {
 public:
  Generator(GeneratorConfig cfg, Rng& rng, const std::string& name = "generator");

  Tensor apply(Tape& tape, Tensor z);  // z {1, input_dim} -> {N, 3}
  PointCloud decode(const std::vector<double>& z);  // value-only

  std::vector<Param*> params();
  const GeneratorConfig& config() const { return cfg_; }

 private:
  GeneratorConfig cfg_;
  std::vector<Dense> fc_;
};

// Wasserstein critic: fully-connected, ReLU except the last single linear
// unit (no sigmoid). Scores a batch of codes row-wise.
class Discriminator {
 public:
  Discriminator(DiscriminatorConfig cfg, Rng& rng,
                const std::string& name = "discriminator");

  Tensor apply(Tape& tape, Tensor z);  // z {B, input_dim} -> {B, 1}
  double score(const std::vector<double>& z);  // value-only, one row

  std::vector<Param*> params();
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  DiscriminatorConfig cfg_;
  std::vector<Dense> fc_;
};

// z = mu + exp(logvar/2) * noise, elementwise.
Tensor reparametrize(Tape& tape, Tensor mu, Tensor logvar,
                     const std::vector<double>& noise);
std::vector<double> reparametrize(const std::vector<double>& mu,
                                  const std::vector<double>& logvar,
                                  const std::vector<double>& noise);
// Throws config_error when the code has no logvar (non-variational encoder).
std::vector<double> reparametrize(const LatentCode& code,
                                  const std::vector<double>& noise);

// Row-wise softmax of logits {1, k} with a detached max shift for stability.
Tensor softmax_row(Tape& tape, Tensor logits);

// Glorot-uniform dense layer; biases zero.
Dense make_dense(const std::string& name, int fan_in, int fan_out, Rng& rng);

// Flat {N,3} tensor from a cloud and back.
Tensor cloud_tensor(Tape& tape, const PointCloud& cloud);
PointCloud tensor_cloud(const Tensor& t, const std::string& label = "");

}  // namespace pcgen
