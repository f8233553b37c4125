#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcgen/distances.hpp"
#include "pcgen/metrics.hpp"
#include "pcgen/networks.hpp"
#include "pcgen/pointcloud.hpp"
#include "pcgen/priors.hpp"
#include "pcgen/rng.hpp"
#include "pcgen/tensor.hpp"

namespace pcgen {

enum class TrainMode { ae, vae, aae, aae_c };
enum class ReconKind { emd, chamfer };
enum class LambdaSchedule { constant, exp_decay };

struct TrainConfig {
  TrainMode mode = TrainMode::aae;
  ReconKind recon = ReconKind::emd;
  CostKind cost_kind = CostKind::squared_halved;
  PriorSpec prior;  // z prior; dim must equal encoder.latent_dim

  double lambda = 1.0;
  LambdaSchedule lambda_schedule = LambdaSchedule::constant;
  double lambda_rate = 0.0;  // exp_decay: lambda * exp(-rate * epoch)
  double gp_weight = 10.0;
  int d_steps_per_g = 5;
  int epochs = 500;
  int batch_size = 32;
  std::uint64_t seed = 0;

  AdamConfig adam_enc, adam_gen, adam_disc;

  EncoderConfig encoder;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;  // scores z; input_dim == latent_dim
  DiscriminatorConfig disc_cat;       // aae_c: scores y; input_dim == categorical_k
};

double lambda_at(const TrainConfig& config, int epoch);

// Throws config_error naming the offending field.
void validate_config(const TrainConfig& config);

// Networks, optimizer states, prior, and the training RNG stream. Parameter
// initialization uses per-network seed streams derived from config.seed, so
// e.g. the encoder of an ae run and of an aae run with the same seed start
// identical.
struct ModelBundle {
  TrainConfig config;
  std::optional<Encoder> encoder;
  std::optional<Generator> generator;
  std::optional<Discriminator> disc;      // aae / aae_c
  std::optional<Discriminator> disc_cat;  // aae_c
  std::map<std::string, AdamState> opt;   // param name -> state
  Rng rng{0};
  int epoch = 0;

  std::vector<Param*> trainable_params();
};

ModelBundle make_bundle(const TrainConfig& config);

// ---------------------------------------------------------------------------
// Loss building blocks (all emitted onto the caller's tape).

// 1/2 sum(mu^2 + exp(logvar) - logvar - 1).
Tensor kl_gaussian_tape(Tape& tape, Tensor mu, Tensor logvar);

// Reconstruction loss between a predicted {N,3} tensor and a target cloud.
// For EMD the optimal matching is recomputed from the current predicted
// values on every call.
Tensor recon_loss(Tape& tape, Tensor pred, const PointCloud& target,
                  ReconKind recon, CostKind cost_kind);

struct VaeLoss {
  Tensor total;  // kl + lambda * recon, averaged over the batch
  Tensor recon;  // batch-mean reconstruction term (before lambda)
  Tensor kl;     // batch-mean KL term
};
VaeLoss vae_loss(Tape& tape, ModelBundle& bundle,
                 const std::vector<const PointCloud*>& batch, double lambda,
                 Rng& noise_rng);

// Improved-WGAN penalty: zhat = u*z_real + (1-u)*z_fake row-wise with
// u ~ U(0,1); gp = mean((||grad_zhat D(zhat)||_2 - 1)^2). The inner gradient
// is produced by a tape backward pass and stays differentiable, so the
// returned gp tensor supports a second backward to the critic parameters.
struct GradientPenalty {
  Tensor gp;
  Tensor zhat;       // {batch, k} variable node
  Tensor grad_zhat;  // {batch, k} inner gradient
};
GradientPenalty gradient_penalty(Tape& tape, Discriminator& critic,
                                 const std::vector<double>& z_real,
                                 const std::vector<double>& z_fake, int batch,
                                 Rng& u_rng);

// One critic update on pre-computed code batches: minimizes
// mean D(fake) - mean D(real) + gp_weight * GP. Returns the pre-update loss
// pieces; gap = mean D(fake) - mean D(real).
struct CriticReport {
  double d_loss = 0.0;
  double gp = 0.0;
  double gap = 0.0;
};
CriticReport critic_step(ModelBundle& bundle, Discriminator& critic,
                         const std::vector<double>& z_fake,
                         const std::vector<double>& z_real, int batch,
                         Rng& u_rng);

// ---------------------------------------------------------------------------
// Training steps.

struct StepReport {
  double recon = 0.0;   // batch-mean reconstruction (before lambda)
  double kl = 0.0;      // vae only
  double adv = 0.0;     // encoder-side adversarial term(s)
  double d_loss = 0.0;  // mean critic loss over the critic updates
  double gp = 0.0;      // mean gradient penalty over the critic updates
  double lambda = 1.0;
};

// Dispatches on config.mode. Throws numeric_error on non-finite losses or
// gradients; parameters and optimizer states are untouched in that case.
StepReport train_step(ModelBundle& bundle,
                      const std::vector<const PointCloud*>& batch);

struct LossRecord {
  int step = 0;
  double recon = 0.0;
  double kl_or_adv = 0.0;
  double gp = 0.0;
  double lambda = 1.0;
};

struct TrainResult {
  std::vector<LossRecord> log;
};

// Runs epochs [bundle.epoch, config.epochs); shuffles with the bundle's RNG
// stream so a reloaded checkpoint continues bit-identically.
TrainResult train(
    ModelBundle& bundle, const std::vector<PointCloud>& train_clouds,
    const std::function<void(const ModelBundle&)>& per_epoch = nullptr);

// ---------------------------------------------------------------------------
// Persistence and model selection.

void checkpoint_save(const ModelBundle& bundle, const std::string& path);
ModelBundle checkpoint_load(const std::string& path);

// One generated cloud: z from the prior (plus a uniform one-hot y for
// aae_c), decoded by the generator.
PointCloud sample_cloud(ModelBundle& bundle, Rng& rng);
CloudSampler bundle_sampler(ModelBundle& bundle);

// Loads every checkpoint, generates |validation| clouds from each (same
// eval_seed for fairness), and returns the index with minimal JSD against
// the validation set; ties break toward the earlier entry.
std::size_t select_best(const std::vector<std::string>& checkpoint_paths,
                        const std::vector<PointCloud>& validation,
                        std::uint64_t eval_seed);

// ---------------------------------------------------------------------------
// Config text round-trip (shared by checkpoints and the CLI).

using KvMap = std::map<std::string, std::string>;
KvMap train_config_to_kv(const TrainConfig& config);
// Unknown keys are ignored here (callers with stricter needs pre-filter);
// missing keys fall back to defaults; malformed values throw config_error
// naming the key. GMM component arrays are not part of the text form — they
// ride in checkpoint blocks — so validation of a gmm prior is deferred until
// those arrays are filled in.
TrainConfig train_config_from_kv(const KvMap& kv);

}  // namespace pcgen
