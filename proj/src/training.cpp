#include "pcgen/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "pcgen/config_kv.hpp"
#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

// Per-network init streams and the training stream get fixed slots so that
// runs of different modes with the same seed initialize shared networks
// identically.
enum SeedSlot : std::uint64_t {
  kSeedEncoder = 0,
  kSeedGenerator = 1,
  kSeedDisc = 2,
  kSeedDiscCat = 3,
  kSeedTrainStream = 9,
};

std::vector<Point3> tensor_points(const Tensor& t) {
  const auto& v = t.values();
  std::vector<Point3> pts(static_cast<std::size_t>(t.shape()[0]));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {v[i * 3], v[i * 3 + 1], v[i * 3 + 2]};
  }
  return pts;
}

bool prior_is_reparametrized(const PriorSpec& prior) {
  return prior.kind == PriorSpec::Kind::gaussian ||
         prior.kind == PriorSpec::Kind::gmm;
}

const AdamConfig& adam_cfg_for(const ModelBundle& bundle,
                               const std::string& param_name) {
  if (param_name.rfind("encoder.", 0) == 0) {
    return bundle.config.adam_enc;
  }
  if (param_name.rfind("generator.", 0) == 0) {
    return bundle.config.adam_gen;
  }
  return bundle.config.adam_disc;
}

// Ensures every gradient in `params` is finite before any optimizer state or
// parameter value changes; zeroes all grads and throws otherwise.
void check_grads_finite(ModelBundle& bundle,
                        const std::vector<Param*>& params) {
  for (Param* p : params) {
    for (double g : p->grad) {
      if (!std::isfinite(g)) {
        for (Param* q : bundle.trainable_params()) {
          q->zero_grad();
        }
        throw numeric_error("train step: non-finite gradient in parameter '" +
                            p->name + "'; step rolled back");
      }
    }
  }
}

void apply_adam(ModelBundle& bundle, const std::vector<Param*>& params) {
  for (Param* p : params) {
    auto it = bundle.opt.find(p->name);
    if (it == bundle.opt.end()) {
      AdamState s;
      s.cfg = adam_cfg_for(bundle, p->name);
      it = bundle.opt.emplace(p->name, std::move(s)).first;
    }
    adam_step(*p, it->second);
  }
}

void zero_all_grads(ModelBundle& bundle) {
  for (Param* p : bundle.trainable_params()) {
    p->zero_grad();
  }
}

void check_finite_value(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw numeric_error(std::string("train step: non-finite ") + what +
                        "; step rolled back");
  }
}

// Value-only latent code for one cloud: reparametrized for Gaussian/GMM
// priors, the deterministic (sigmoid) code for Beta.
std::vector<double> encode_value_code(ModelBundle& bundle,
                                      const PointCloud& cloud,
                                      Rng& noise_rng) {
  LatentCode code = bundle.encoder->encode(cloud);
  if (prior_is_reparametrized(bundle.config.prior)) {
    std::vector<double> noise(code.mu.size());
    for (double& n : noise) {
      n = noise_rng.normal();
    }
    return reparametrize(code, noise);
  }
  return code.mu;
}

// Tape-level latent code for one cloud within the encoder/generator update.
Tensor encode_tape_code(ModelBundle& bundle, Tape& tape,
                        const Encoder::Codes& codes, Rng& noise_rng) {
  if (prior_is_reparametrized(bundle.config.prior)) {
    std::vector<double> noise(
        static_cast<std::size_t>(bundle.config.encoder.latent_dim));
    for (double& n : noise) {
      n = noise_rng.normal();
    }
    return reparametrize(tape, codes.mu, codes.logvar, noise);
  }
  return codes.mu;
}

StepReport ae_step(ModelBundle& bundle,
                   const std::vector<const PointCloud*>& batch) {
  const double lambda = lambda_at(bundle.config, bundle.epoch);
  Tape tape;
  Tensor total = tape.constant_scalar(0.0);
  for (const PointCloud* cloud : batch) {
    Encoder::Codes codes =
        bundle.encoder->apply(tape, cloud_tensor(tape, *cloud));
    Tensor pred = bundle.generator->apply(tape, codes.mu);
    total = tape.add(total, recon_loss(tape, pred, *cloud,
                                       bundle.config.recon,
                                       bundle.config.cost_kind));
  }
  Tensor recon_mean = tape.scale(total, 1.0 / static_cast<double>(batch.size()));
  Tensor loss = tape.scale(recon_mean, lambda);
  check_finite_value(loss.scalar(), "ae loss");
  tape.backward(loss);
  std::vector<Param*> updated;
  for (Param* p : bundle.encoder->params()) {
    updated.push_back(p);
  }
  for (Param* p : bundle.generator->params()) {
    updated.push_back(p);
  }
  check_grads_finite(bundle, updated);
  apply_adam(bundle, updated);
  zero_all_grads(bundle);

  StepReport r;
  r.recon = recon_mean.scalar();
  r.lambda = lambda;
  return r;
}

StepReport vae_step(ModelBundle& bundle,
                    const std::vector<const PointCloud*>& batch, Rng& eg_rng) {
  const double lambda = lambda_at(bundle.config, bundle.epoch);
  Tape tape;
  VaeLoss parts = vae_loss(tape, bundle, batch, lambda, eg_rng);
  check_finite_value(parts.total.scalar(), "vae loss");
  tape.backward(parts.total);
  std::vector<Param*> updated;
  for (Param* p : bundle.encoder->params()) {
    updated.push_back(p);
  }
  for (Param* p : bundle.generator->params()) {
    updated.push_back(p);
  }
  check_grads_finite(bundle, updated);
  apply_adam(bundle, updated);
  zero_all_grads(bundle);

  StepReport r;
  r.recon = parts.recon.scalar();
  r.kl = parts.kl.scalar();
  r.lambda = lambda;
  return r;
}

// Shared by aae and aae_c: critic phase(s), then one encoder+generator step.
StepReport adversarial_step(ModelBundle& bundle,
                            const std::vector<const PointCloud*>& batch,
                            Rng& d_rng, Rng& dc_rng, Rng& eg_rng) {
  const TrainConfig& cfg = bundle.config;
  const double lambda = lambda_at(cfg, bundle.epoch);
  const int B = static_cast<int>(batch.size());
  const int latent = cfg.encoder.latent_dim;
  const bool clustered = cfg.mode == TrainMode::aae_c;

  StepReport report;
  report.lambda = lambda;

  // --- critic update(s) on z ---
  for (int s = 0; s < cfg.d_steps_per_g; ++s) {
    std::vector<double> z_fake;
    z_fake.reserve(static_cast<std::size_t>(B) * latent);
    for (const PointCloud* cloud : batch) {
      std::vector<double> z = encode_value_code(bundle, *cloud, d_rng);
      z_fake.insert(z_fake.end(), z.begin(), z.end());
    }
    std::vector<double> z_real = sample(cfg.prior, B, d_rng);
    CriticReport cr = critic_step(bundle, *bundle.disc, z_fake, z_real, B,
                                  d_rng);
    report.d_loss += cr.d_loss;
    report.gp += cr.gp;
  }
  report.d_loss /= cfg.d_steps_per_g;
  report.gp /= cfg.d_steps_per_g;

  // --- critic update(s) on y (aae_c) ---
  if (clustered) {
    const int K = cfg.encoder.categorical_k;
    PriorSpec cat = categorical_prior(K);
    for (int s = 0; s < cfg.d_steps_per_g; ++s) {
      std::vector<double> y_fake;
      y_fake.reserve(static_cast<std::size_t>(B) * K);
      for (const PointCloud* cloud : batch) {
        LatentCode code = bundle.encoder->encode(*cloud);
        y_fake.insert(y_fake.end(), code.y->begin(), code.y->end());
      }
      std::vector<double> y_real = sample(cat, B, dc_rng);
      (void)critic_step(bundle, *bundle.disc_cat, y_fake, y_real, B, dc_rng);
    }
  }

  // --- encoder + generator update ---
  Tape tape;
  Tensor recon_total = tape.constant_scalar(0.0);
  std::vector<Tensor> z_rows, y_rows;
  for (const PointCloud* cloud : batch) {
    Encoder::Codes codes =
        bundle.encoder->apply(tape, cloud_tensor(tape, *cloud));
    Tensor z = encode_tape_code(bundle, tape, codes, eg_rng);
    z_rows.push_back(z);
    Tensor gen_in = z;
    if (clustered) {
      y_rows.push_back(codes.y);
      gen_in = tape.concat_rows({tape.reshape(z, {latent, 1}),
                                 tape.reshape(codes.y,
                                              {cfg.encoder.categorical_k, 1})});
      gen_in = tape.reshape(gen_in, {1, latent + cfg.encoder.categorical_k});
    }
    Tensor pred = bundle.generator->apply(tape, gen_in);
    recon_total = tape.add(
        recon_total,
        recon_loss(tape, pred, *cloud, cfg.recon, cfg.cost_kind));
  }
  Tensor recon_mean =
      tape.scale(recon_total, 1.0 / static_cast<double>(batch.size()));

  Tensor z_batch = tape.concat_rows(z_rows);
  Tensor adv = tape.scale(tape.mean(bundle.disc->apply(tape, z_batch)), -1.0);
  if (clustered) {
    Tensor y_batch = tape.concat_rows(y_rows);
    adv = tape.add(
        adv, tape.scale(tape.mean(bundle.disc_cat->apply(tape, y_batch)), -1.0));
  }
  Tensor loss = tape.add(tape.scale(recon_mean, lambda), adv);
  check_finite_value(loss.scalar(), "adversarial loss");
  tape.backward(loss);
  std::vector<Param*> updated;
  for (Param* p : bundle.encoder->params()) {
    updated.push_back(p);
  }
  for (Param* p : bundle.generator->params()) {
    updated.push_back(p);
  }
  check_grads_finite(bundle, updated);
  apply_adam(bundle, updated);
  zero_all_grads(bundle);  // critic leaves collected grads here too

  report.recon = recon_mean.scalar();
  report.adv = adv.scalar();
  return report;
}

}  // namespace

double lambda_at(const TrainConfig& config, int epoch) {
  if (epoch < 0) {
    throw config_error("lambda_at: epoch must be >= 0");
  }
  if (config.lambda_schedule == LambdaSchedule::constant) {
    return config.lambda;
  }
  return config.lambda * std::exp(-config.lambda_rate * epoch);
}

void validate_config(const TrainConfig& config) {
  if (!(config.lambda > 0.0)) {
    throw config_error("config: lambda must be > 0");
  }
  if (config.gp_weight < 0.0) {
    throw config_error("config: gp_weight must be >= 0");
  }
  if (config.batch_size < 1) {
    throw config_error("config: batch_size must be >= 1");
  }
  if (config.d_steps_per_g < 1) {
    throw config_error("config: d_steps_per_g must be >= 1");
  }
  if (config.epochs < 0) {
    throw config_error("config: epochs must be >= 0");
  }
  if (config.lambda_rate < 0.0) {
    throw config_error("config: lambda_rate must be >= 0");
  }
  validate(config.prior);

  const int latent = config.encoder.latent_dim;
  const bool clustered = config.mode == TrainMode::aae_c;
  if (config.prior.kind == PriorSpec::Kind::categorical) {
    throw config_error("config: the z prior cannot be categorical");
  }
  if (config.prior.dim != latent) {
    throw config_error("config: prior.dim must equal encoder.latent_dim");
  }
  const int gen_in = latent + (clustered ? config.encoder.categorical_k : 0);
  if (config.generator.input_dim != gen_in) {
    throw config_error("config: generator.input_dim must be " +
                       std::to_string(gen_in) + " for this mode");
  }
  switch (config.mode) {
    case TrainMode::ae:
      if (config.encoder.variational) {
        throw config_error("config: ae mode requires a deterministic encoder");
      }
      break;
    case TrainMode::vae:
      if (config.prior.kind != PriorSpec::Kind::gaussian) {
        throw config_error("config: vae mode requires the gaussian prior");
      }
      if (!config.encoder.variational) {
        throw config_error("config: vae mode requires encoder.variational");
      }
      break;
    case TrainMode::aae:
    case TrainMode::aae_c:
      if (prior_is_reparametrized(config.prior)) {
        if (!config.encoder.variational) {
          throw config_error(
              "config: aae with gaussian/gmm prior requires "
              "encoder.variational");
        }
      } else {  // beta
        if (config.encoder.variational || !config.encoder.sigmoid_out) {
          throw config_error(
              "config: aae with beta prior requires a deterministic "
              "sigmoid-output encoder");
        }
      }
      if (config.discriminator.input_dim != latent) {
        throw config_error(
            "config: discriminator.input_dim must equal encoder.latent_dim");
      }
      if (clustered) {
        if (config.encoder.categorical_k < 2) {
          throw config_error(
              "config: aae_c requires encoder.categorical_k >= 2");
        }
        if (config.disc_cat.input_dim != config.encoder.categorical_k) {
          throw config_error(
              "config: disc_cat.input_dim must equal encoder.categorical_k");
        }
      }
      break;
  }
}

std::vector<Param*> ModelBundle::trainable_params() {
  std::vector<Param*> out;
  if (encoder) {
    for (Param* p : encoder->params()) {
      out.push_back(p);
    }
  }
  if (generator) {
    for (Param* p : generator->params()) {
      out.push_back(p);
    }
  }
  if (disc) {
    for (Param* p : disc->params()) {
      out.push_back(p);
    }
  }
  if (disc_cat) {
    for (Param* p : disc_cat->params()) {
      out.push_back(p);
    }
  }
  return out;
}

ModelBundle make_bundle(const TrainConfig& config) {
  validate_config(config);
  ModelBundle b;
  b.config = config;
  {
    Rng r(derive_seed(config.seed, kSeedEncoder));
    b.encoder.emplace(config.encoder, r, "encoder");
  }
  {
    Rng r(derive_seed(config.seed, kSeedGenerator));
    b.generator.emplace(config.generator, r, "generator");
  }
  if (config.mode == TrainMode::aae || config.mode == TrainMode::aae_c) {
    Rng r(derive_seed(config.seed, kSeedDisc));
    b.disc.emplace(config.discriminator, r, "discriminator");
  }
  if (config.mode == TrainMode::aae_c) {
    Rng r(derive_seed(config.seed, kSeedDiscCat));
    b.disc_cat.emplace(config.disc_cat, r, "disc_cat");
  }
  b.rng = Rng(derive_seed(config.seed, kSeedTrainStream));
  b.epoch = 0;
  return b;
}

Tensor kl_gaussian_tape(Tape& tape, Tensor mu, Tensor logvar) {
  Tensor inner = tape.add(tape.square(mu), tape.exp(logvar));
  inner = tape.sub(inner, logvar);
  inner = tape.sub(inner, tape.constant_scalar(1.0));
  return tape.scale(tape.sum(inner), 0.5);
}

Tensor recon_loss(Tape& tape, Tensor pred, const PointCloud& target,
                  ReconKind recon, CostKind cost_kind) {
  if (recon == ReconKind::chamfer) {
    return chamfer_loss(tape, pred, target.points);
  }
  const std::vector<Point3> pred_pts = tensor_points(pred);
  Matching m = emd_exact(pred_pts, target.points, cost_kind);
  return emd_loss(tape, pred, target.points, m, cost_kind);
}

VaeLoss vae_loss(Tape& tape, ModelBundle& bundle,
                 const std::vector<const PointCloud*>& batch, double lambda,
                 Rng& noise_rng) {
  if (batch.empty()) {
    throw config_error("vae_loss: empty batch");
  }
  Tensor recon_total = tape.constant_scalar(0.0);
  Tensor kl_total = tape.constant_scalar(0.0);
  for (const PointCloud* cloud : batch) {
    Encoder::Codes codes =
        bundle.encoder->apply(tape, cloud_tensor(tape, *cloud));
    std::vector<double> noise(
        static_cast<std::size_t>(bundle.config.encoder.latent_dim));
    for (double& n : noise) {
      n = noise_rng.normal();
    }
    Tensor z = reparametrize(tape, codes.mu, codes.logvar, noise);
    Tensor pred = bundle.generator->apply(tape, z);
    recon_total =
        tape.add(recon_total, recon_loss(tape, pred, *cloud,
                                         bundle.config.recon,
                                         bundle.config.cost_kind));
    kl_total = tape.add(kl_total, kl_gaussian_tape(tape, codes.mu, codes.logvar));
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  VaeLoss out;
  out.recon = tape.scale(recon_total, inv_b);
  out.kl = tape.scale(kl_total, inv_b);
  out.total = tape.add(out.kl, tape.scale(out.recon, lambda));
  return out;
}

GradientPenalty gradient_penalty(Tape& tape, Discriminator& critic,
                                 const std::vector<double>& z_real,
                                 const std::vector<double>& z_fake, int batch,
                                 Rng& u_rng) {
  const int k = critic.config().input_dim;
  const std::size_t n = static_cast<std::size_t>(batch) * k;
  if (z_real.size() != n || z_fake.size() != n) {
    throw shape_error("gradient_penalty: batch shapes disagree");
  }
  std::vector<double> mixed(n);
  for (int b = 0; b < batch; ++b) {
    const double u = u_rng.uniform();
    for (int d = 0; d < k; ++d) {
      const std::size_t i = static_cast<std::size_t>(b) * k + d;
      mixed[i] = u * z_real[i] + (1.0 - u) * z_fake[i];
    }
  }
  GradientPenalty out;
  out.zhat = tape.variable({batch, k}, std::move(mixed));
  Tensor scores = critic.apply(tape, out.zhat);
  BackwardResult inner = tape.backward(tape.sum(scores),
                                       /*accumulate_params=*/false);
  out.grad_zhat = tape.grad_of(inner, out.zhat);
  Tensor norm = tape.sqrt(tape.row_sum(tape.square(out.grad_zhat)));
  Tensor excess = tape.sub(norm, tape.constant_scalar(1.0));
  out.gp = tape.mean(tape.square(excess));
  return out;
}

CriticReport critic_step(ModelBundle& bundle, Discriminator& critic,
                         const std::vector<double>& z_fake,
                         const std::vector<double>& z_real, int batch,
                         Rng& u_rng) {
  const int k = critic.config().input_dim;
  Tape tape;
  GradientPenalty gp = gradient_penalty(tape, critic, z_real, z_fake, batch,
                                        u_rng);
  Tensor fake_scores =
      critic.apply(tape, tape.constant({batch, k}, z_fake));
  Tensor real_scores =
      critic.apply(tape, tape.constant({batch, k}, z_real));
  Tensor gap = tape.sub(tape.mean(fake_scores), tape.mean(real_scores));
  Tensor loss = tape.add(gap, tape.scale(gp.gp, bundle.config.gp_weight));
  check_finite_value(loss.scalar(), "critic loss");
  tape.backward(loss);
  std::vector<Param*> updated = critic.params();
  check_grads_finite(bundle, updated);
  apply_adam(bundle, updated);
  zero_all_grads(bundle);

  CriticReport r;
  r.d_loss = loss.scalar();
  r.gp = gp.gp.scalar();
  r.gap = gap.scalar();
  return r;
}

StepReport train_step(ModelBundle& bundle,
                      const std::vector<const PointCloud*>& batch) {
  if (batch.empty()) {
    throw config_error("train_step: empty batch");
  }
  // One draw from the bundle stream per step, fanned into fixed per-phase
  // streams: the same seed sequence reaches each phase regardless of how
  // many draws the other phases consume.
  const std::uint64_t step_seed = bundle.rng.next_u64();
  Rng d_rng(derive_seed(step_seed, 0));
  Rng dc_rng(derive_seed(step_seed, 1));
  Rng eg_rng(derive_seed(step_seed, 2));
  switch (bundle.config.mode) {
    case TrainMode::ae:
      return ae_step(bundle, batch);
    case TrainMode::vae:
      return vae_step(bundle, batch, eg_rng);
    case TrainMode::aae:
    case TrainMode::aae_c:
      return adversarial_step(bundle, batch, d_rng, dc_rng, eg_rng);
  }
  throw config_error("train_step: unknown mode");
}

TrainResult train(ModelBundle& bundle,
                  const std::vector<PointCloud>& train_clouds,
                  const std::function<void(const ModelBundle&)>& per_epoch) {
  if (train_clouds.empty()) {
    throw config_error("train: empty training set");
  }
  TrainResult result;
  const int n = static_cast<int>(train_clouds.size());
  const int bs = bundle.config.batch_size;
  const int batches_per_epoch = (n + bs - 1) / bs;
  while (bundle.epoch < bundle.config.epochs) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(bundle.rng.uniform_int(i + 1))]);
    }
    for (int b = 0; b < batches_per_epoch; ++b) {
      std::vector<const PointCloud*> batch;
      for (int i = b * bs; i < std::min((b + 1) * bs, n); ++i) {
        batch.push_back(&train_clouds[static_cast<std::size_t>(order[
            static_cast<std::size_t>(i)])]);
      }
      StepReport sr = train_step(bundle, batch);
      LossRecord rec;
      rec.step = bundle.epoch * batches_per_epoch + b;
      rec.recon = sr.recon;
      rec.kl_or_adv = bundle.config.mode == TrainMode::vae ? sr.kl : sr.adv;
      rec.gp = sr.gp;
      rec.lambda = sr.lambda;
      result.log.push_back(rec);
    }
    ++bundle.epoch;
    if (per_epoch) {
      per_epoch(bundle);
    }
  }
  return result;
}

PointCloud sample_cloud(ModelBundle& bundle, Rng& rng) {
  std::vector<double> z = sample(bundle.config.prior, 1, rng);
  if (bundle.config.mode == TrainMode::aae_c) {
    const int K = bundle.config.encoder.categorical_k;
    std::vector<double> y = sample(categorical_prior(K), 1, rng);
    z.insert(z.end(), y.begin(), y.end());
  }
  return bundle.generator->decode(z);
}

CloudSampler bundle_sampler(ModelBundle& bundle) {
  return [&bundle](Rng& rng) { return sample_cloud(bundle, rng); };
}

std::size_t select_best(const std::vector<std::string>& checkpoint_paths,
                        const std::vector<PointCloud>& validation,
                        std::uint64_t eval_seed) {
  if (checkpoint_paths.empty()) {
    throw config_error("select_best: no checkpoints given");
  }
  if (validation.empty()) {
    throw config_error("select_best: empty validation set");
  }
  const VoxelHistogram val_hist = voxelize(validation);
  std::size_t best_idx = 0;
  double best_jsd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < checkpoint_paths.size(); ++i) {
    ModelBundle bundle = checkpoint_load(checkpoint_paths[i]);
    Rng rng(eval_seed);  // same stream for every candidate, for fairness
    std::vector<PointCloud> generated;
    generated.reserve(validation.size());
    for (std::size_t s = 0; s < validation.size(); ++s) {
      generated.push_back(normalize(sample_cloud(bundle, rng)));
    }
    const double j = jsd(voxelize(generated), val_hist);
    if (j < best_jsd) {  // strict: ties keep the earlier checkpoint
      best_jsd = j;
      best_idx = i;
    }
  }
  return best_idx;
}

// ---------------------------------------------------------------------------
// TrainConfig <-> key=value text

namespace {

std::string mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::ae: return "ae";
    case TrainMode::vae: return "vae";
    case TrainMode::aae: return "aae";
    case TrainMode::aae_c: return "aae_c";
  }
  return "aae";
}

TrainMode mode_from(const std::string& s) {
  if (s == "ae") return TrainMode::ae;
  if (s == "vae") return TrainMode::vae;
  if (s == "aae") return TrainMode::aae;
  if (s == "aae_c") return TrainMode::aae_c;
  throw config_error("config: unknown mode '" + s + "'");
}

std::string prior_name(PriorSpec::Kind k) {
  switch (k) {
    case PriorSpec::Kind::gaussian: return "gaussian";
    case PriorSpec::Kind::gmm: return "gmm";
    case PriorSpec::Kind::beta: return "beta";
    case PriorSpec::Kind::categorical: return "categorical";
  }
  return "gaussian";
}

PriorSpec::Kind prior_from(const std::string& s) {
  if (s == "gaussian") return PriorSpec::Kind::gaussian;
  if (s == "gmm") return PriorSpec::Kind::gmm;
  if (s == "beta") return PriorSpec::Kind::beta;
  if (s == "categorical") return PriorSpec::Kind::categorical;
  throw config_error("config: unknown prior '" + s + "'");
}

void put_adam(KvMap& kv, const std::string& prefix, const AdamConfig& a) {
  kv[prefix + ".alpha"] = format_double(a.alpha);
  kv[prefix + ".beta1"] = format_double(a.beta1);
  kv[prefix + ".beta2"] = format_double(a.beta2);
  kv[prefix + ".eps"] = format_double(a.eps);
}

AdamConfig get_adam(const KvMap& kv, const std::string& prefix) {
  AdamConfig a;
  a.alpha = kv_get_double(kv, prefix + ".alpha", a.alpha);
  a.beta1 = kv_get_double(kv, prefix + ".beta1", a.beta1);
  a.beta2 = kv_get_double(kv, prefix + ".beta2", a.beta2);
  a.eps = kv_get_double(kv, prefix + ".eps", a.eps);
  return a;
}

}  // namespace

KvMap train_config_to_kv(const TrainConfig& c) {
  KvMap kv;
  kv["mode"] = mode_name(c.mode);
  kv["recon"] = c.recon == ReconKind::emd ? "emd" : "chamfer";
  kv["cost_kind"] =
      c.cost_kind == CostKind::squared_halved ? "squared_halved" : "unsquared";
  kv["lambda"] = format_double(c.lambda);
  kv["lambda_schedule"] =
      c.lambda_schedule == LambdaSchedule::constant ? "constant" : "exp_decay";
  kv["lambda_rate"] = format_double(c.lambda_rate);
  kv["gp_weight"] = format_double(c.gp_weight);
  kv["d_steps_per_g"] = std::to_string(c.d_steps_per_g);
  kv["epochs"] = std::to_string(c.epochs);
  kv["batch_size"] = std::to_string(c.batch_size);
  kv["seed"] = std::to_string(c.seed);
  put_adam(kv, "adam_enc", c.adam_enc);
  put_adam(kv, "adam_gen", c.adam_gen);
  put_adam(kv, "adam_disc", c.adam_disc);
  kv["prior.kind"] = prior_name(c.prior.kind);
  kv["prior.dim"] = std::to_string(c.prior.dim);
  kv["prior.k"] = std::to_string(c.prior.k);
  kv["prior.alpha"] = format_double(c.prior.alpha);
  kv["prior.beta"] = format_double(c.prior.beta);
  kv["encoder.conv_widths"] = format_int_list(c.encoder.conv_widths);
  kv["encoder.feature_dim"] = std::to_string(c.encoder.feature_dim);
  kv["encoder.latent_dim"] = std::to_string(c.encoder.latent_dim);
  kv["encoder.variational"] = c.encoder.variational ? "true" : "false";
  kv["encoder.categorical_k"] = std::to_string(c.encoder.categorical_k);
  kv["encoder.sigmoid_out"] = c.encoder.sigmoid_out ? "true" : "false";
  kv["generator.hidden"] = format_int_list(c.generator.hidden);
  kv["generator.input_dim"] = std::to_string(c.generator.input_dim);
  kv["generator.n_points"] = std::to_string(c.generator.n_points);
  kv["discriminator.hidden"] = format_int_list(c.discriminator.hidden);
  kv["discriminator.input_dim"] = std::to_string(c.discriminator.input_dim);
  kv["disc_cat.hidden"] = format_int_list(c.disc_cat.hidden);
  kv["disc_cat.input_dim"] = std::to_string(c.disc_cat.input_dim);
  return kv;
}

TrainConfig train_config_from_kv(const KvMap& kv) {
  TrainConfig c;
  c.mode = mode_from(kv_get_or(kv, "mode", "aae"));
  const std::string recon = kv_get_or(kv, "recon", "emd");
  if (recon == "emd") {
    c.recon = ReconKind::emd;
  } else if (recon == "chamfer") {
    c.recon = ReconKind::chamfer;
  } else {
    throw config_error("config: unknown recon '" + recon + "'");
  }
  const std::string ck = kv_get_or(kv, "cost_kind", "squared_halved");
  if (ck == "squared_halved") {
    c.cost_kind = CostKind::squared_halved;
  } else if (ck == "unsquared") {
    c.cost_kind = CostKind::unsquared;
  } else {
    throw config_error("config: unknown cost_kind '" + ck + "'");
  }
  c.lambda = kv_get_double(kv, "lambda", c.lambda);
  const std::string sched = kv_get_or(kv, "lambda_schedule", "constant");
  if (sched == "constant") {
    c.lambda_schedule = LambdaSchedule::constant;
  } else if (sched == "exp_decay") {
    c.lambda_schedule = LambdaSchedule::exp_decay;
  } else {
    throw config_error("config: unknown lambda_schedule '" + sched + "'");
  }
  c.lambda_rate = kv_get_double(kv, "lambda_rate", c.lambda_rate);
  c.gp_weight = kv_get_double(kv, "gp_weight", c.gp_weight);
  c.d_steps_per_g = kv_get_int(kv, "d_steps_per_g", c.d_steps_per_g);
  c.epochs = kv_get_int(kv, "epochs", c.epochs);
  c.batch_size = kv_get_int(kv, "batch_size", c.batch_size);
  c.seed = kv_get_u64(kv, "seed", c.seed);
  c.adam_enc = get_adam(kv, "adam_enc");
  c.adam_gen = get_adam(kv, "adam_gen");
  c.adam_disc = get_adam(kv, "adam_disc");
  c.prior.kind = prior_from(kv_get_or(kv, "prior.kind", "gaussian"));
  c.prior.dim = kv_get_int(kv, "prior.dim", 128);
  c.prior.k = kv_get_int(kv, "prior.k", 0);
  c.prior.alpha = kv_get_double(kv, "prior.alpha", 0.01);
  c.prior.beta = kv_get_double(kv, "prior.beta", 0.01);
  c.encoder.conv_widths =
      kv_get_int_list(kv, "encoder.conv_widths", c.encoder.conv_widths);
  c.encoder.feature_dim =
      kv_get_int(kv, "encoder.feature_dim", c.encoder.feature_dim);
  c.encoder.latent_dim =
      kv_get_int(kv, "encoder.latent_dim", c.encoder.latent_dim);
  c.encoder.variational =
      kv_get_bool(kv, "encoder.variational", c.encoder.variational);
  c.encoder.categorical_k =
      kv_get_int(kv, "encoder.categorical_k", c.encoder.categorical_k);
  c.encoder.sigmoid_out =
      kv_get_bool(kv, "encoder.sigmoid_out", c.encoder.sigmoid_out);
  c.generator.hidden =
      kv_get_int_list(kv, "generator.hidden", c.generator.hidden);
  c.generator.input_dim =
      kv_get_int(kv, "generator.input_dim", c.generator.input_dim);
  c.generator.n_points =
      kv_get_int(kv, "generator.n_points", c.generator.n_points);
  c.discriminator.hidden =
      kv_get_int_list(kv, "discriminator.hidden", c.discriminator.hidden);
  c.discriminator.input_dim =
      kv_get_int(kv, "discriminator.input_dim", c.discriminator.input_dim);
  c.disc_cat.hidden = kv_get_int_list(kv, "disc_cat.hidden", c.disc_cat.hidden);
  c.disc_cat.input_dim =
      kv_get_int(kv, "disc_cat.input_dim", c.disc_cat.input_dim);
  return c;
}

}  // namespace pcgen
