#include "pcgen/networks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

void check_widths(const std::vector<int>& widths, const std::string& what) {
  if (widths.empty()) {
    throw config_error(what + ": empty layer width list");
  }
  for (int w : widths) {
    if (w <= 0) {
      throw config_error(what + ": layer width must be positive, got " +
                         std::to_string(w));
    }
  }
}

Tensor dense(Tape& tape, Tensor x, Dense& layer) {
  return tape.linear(x, tape.leaf(layer.w), tape.leaf(layer.b));
}

}  // namespace

Dense make_dense(const std::string& name, int fan_in, int fan_out, Rng& rng) {
  Dense d;
  d.w.name = name + ".w";
  d.w.shape = {fan_in, fan_out};
  d.w.value.resize(static_cast<std::size_t>(fan_in) * fan_out);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : d.w.value) {
    v = rng.uniform(-limit, limit);
  }
  d.w.grad.assign(d.w.value.size(), 0.0);
  d.b.name = name + ".b";
  d.b.shape = {fan_out};
  d.b.value.assign(static_cast<std::size_t>(fan_out), 0.0);
  d.b.grad.assign(d.b.value.size(), 0.0);
  return d;
}

Tensor cloud_tensor(Tape& tape, const PointCloud& cloud) {
  std::vector<double> flat;
  flat.reserve(cloud.points.size() * 3);
  for (const auto& p : cloud.points) {
    flat.push_back(p[0]);
    flat.push_back(p[1]);
    flat.push_back(p[2]);
  }
  return tape.constant({static_cast<int>(cloud.points.size()), 3},
                       std::move(flat));
}

PointCloud tensor_cloud(const Tensor& t, const std::string& label) {
  if (t.shape().size() != 2 || t.shape()[1] != 3) {
    throw shape_error("tensor_cloud: expected {N,3}, got " +
                      shape_str(t.shape()));
  }
  PointCloud cloud;
  cloud.label = label;
  const auto& v = t.values();
  const int n = t.shape()[0];
  cloud.points.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    cloud.points[static_cast<std::size_t>(i)] = {
        v[static_cast<std::size_t>(i) * 3 + 0],
        v[static_cast<std::size_t>(i) * 3 + 1],
        v[static_cast<std::size_t>(i) * 3 + 2]};
  }
  return cloud;
}

Tensor softmax_row(Tape& tape, Tensor logits) {
  if (logits.shape().size() != 2 || logits.shape()[0] != 1) {
    throw shape_error("softmax_row: expected {1,k}, got " +
                      shape_str(logits.shape()));
  }
  const auto& v = logits.values();
  const double m = *std::max_element(v.begin(), v.end());
  // Detached shift: softmax(x - c) == softmax(x), so the gradient is exact.
  Tensor shifted = tape.sub(logits, tape.constant_scalar(m));
  Tensor e = tape.exp(shifted);
  Tensor s = tape.sum(e);
  return tape.div(e, s);
}

Tensor reparametrize(Tape& tape, Tensor mu, Tensor logvar,
                     const std::vector<double>& noise) {
  if (mu.shape() != logvar.shape()) {
    throw shape_error("reparametrize: mu " + shape_str(mu.shape()) +
                      " vs logvar " + shape_str(logvar.shape()));
  }
  if (static_cast<std::int64_t>(noise.size()) != mu.numel()) {
    throw shape_error("reparametrize: noise size " +
                      std::to_string(noise.size()) + " vs mu " +
                      shape_str(mu.shape()));
  }
  Tensor std_dev = tape.exp(tape.scale(logvar, 0.5));
  Tensor eps = tape.constant(mu.shape(), noise);
  return tape.add(mu, tape.mul(std_dev, eps));
}

std::vector<double> reparametrize(const std::vector<double>& mu,
                                  const std::vector<double>& logvar,
                                  const std::vector<double>& noise) {
  if (mu.size() != logvar.size() || mu.size() != noise.size()) {
    throw shape_error("reparametrize: mismatched vector sizes");
  }
  std::vector<double> z(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    z[i] = mu[i] + std::exp(0.5 * logvar[i]) * noise[i];
  }
  return z;
}

std::vector<double> reparametrize(const LatentCode& code,
                                  const std::vector<double>& noise) {
  if (!code.logvar.has_value()) {
    throw config_error("reparametrize: latent code has no logvar");
  }
  return reparametrize(code.mu, *code.logvar, noise);
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(EncoderConfig cfg, Rng& rng, const std::string& name)
    : cfg_(std::move(cfg)) {
  check_widths(cfg_.conv_widths, name + " conv widths");
  if (cfg_.feature_dim <= 0 || cfg_.latent_dim <= 0) {
    throw config_error(name + ": feature_dim and latent_dim must be positive");
  }
  if (cfg_.categorical_k < 0) {
    throw config_error(name + ": categorical_k must be >= 0");
  }
  int in = 3;
  for (std::size_t i = 0; i < cfg_.conv_widths.size(); ++i) {
    conv_.push_back(make_dense(name + ".conv" + std::to_string(i + 1), in,
                               cfg_.conv_widths[i], rng));
    in = cfg_.conv_widths[i];
  }
  fc_ = make_dense(name + ".fc", in, cfg_.feature_dim, rng);
  mu_head_ = make_dense(name + ".mu", cfg_.feature_dim, cfg_.latent_dim, rng);
  if (cfg_.variational) {
    logvar_head_ =
        make_dense(name + ".logvar", cfg_.feature_dim, cfg_.latent_dim, rng);
  }
  if (cfg_.categorical_k > 0) {
    cat_head_ =
        make_dense(name + ".cat", cfg_.feature_dim, cfg_.categorical_k, rng);
  }
}

Encoder::Codes Encoder::apply(Tape& tape, Tensor cloud) {
  if (cloud.shape().size() != 2 || cloud.shape()[1] != 3) {
    throw shape_error("Encoder::apply: expected cloud {N,3}, got " +
                      shape_str(cloud.shape()));
  }
  Tensor h = cloud;
  for (auto& layer : conv_) {
    h = tape.relu(dense(tape, h, layer));
  }
  Tensor pooled =
      tape.reshape(tape.max_over_rows(h), {1, cfg_.conv_widths.back()});
  Tensor f = tape.relu(dense(tape, pooled, fc_));
  Codes out;
  out.mu = dense(tape, f, mu_head_);
  if (cfg_.sigmoid_out) {
    out.mu = tape.sigmoid(out.mu);
  }
  if (cfg_.variational) {
    out.logvar = tape.clamp(dense(tape, f, logvar_head_), -10.0, 10.0);
  }
  if (cfg_.categorical_k > 0) {
    out.y = softmax_row(tape, dense(tape, f, cat_head_));
  }
  return out;
}

LatentCode Encoder::encode(const PointCloud& cloud) {
  Tape tape;
  Codes codes = apply(tape, cloud_tensor(tape, cloud));
  LatentCode code;
  code.mu = codes.mu.values();
  if (codes.logvar.defined()) {
    code.logvar = codes.logvar.values();
  }
  if (codes.y.defined()) {
    code.y = codes.y.values();
  }
  return code;
}

std::vector<Param*> Encoder::params() {
  std::vector<Param*> out;
  for (auto& layer : conv_) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  }
  out.push_back(&fc_.w);
  out.push_back(&fc_.b);
  out.push_back(&mu_head_.w);
  out.push_back(&mu_head_.b);
  if (cfg_.variational) {
    out.push_back(&logvar_head_.w);
    out.push_back(&logvar_head_.b);
  }
  if (cfg_.categorical_k > 0) {
    out.push_back(&cat_head_.w);
    out.push_back(&cat_head_.b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(GeneratorConfig cfg, Rng& rng, const std::string& name)
    : cfg_(std::move(cfg)) {
  check_widths(cfg_.hidden, name + " hidden widths");
  if (cfg_.input_dim <= 0 || cfg_.n_points <= 0) {
    throw config_error(name + ": input_dim and n_points must be positive");
  }
  int in = cfg_.input_dim;
  for (std::size_t i = 0; i < cfg_.hidden.size(); ++i) {
    fc_.push_back(make_dense(name + ".fc" + std::to_string(i + 1), in,
                             cfg_.hidden[i], rng));
    in = cfg_.hidden[i];
  }
  fc_.push_back(make_dense(
      name + ".fc" + std::to_string(cfg_.hidden.size() + 1), in,
      3 * cfg_.n_points, rng));
}

Tensor Generator::apply(Tape& tape, Tensor z) {
  if (z.shape().size() != 2 || z.shape()[0] != 1 ||
      z.shape()[1] != cfg_.input_dim) {
    throw shape_error("Generator::apply: expected z {1," +
                      std::to_string(cfg_.input_dim) + "}, got " +
                      shape_str(z.shape()));
  }
  Tensor h = z;
  for (std::size_t i = 0; i < fc_.size(); ++i) {
    h = dense(tape, h, fc_[i]);
    if (i + 1 < fc_.size()) {
      h = tape.relu(h);
    }
  }
  return tape.reshape(h, {cfg_.n_points, 3});
}

PointCloud Generator::decode(const std::vector<double>& z) {
  Tape tape;
  Tensor zt = tape.constant({1, cfg_.input_dim}, z);
  return tensor_cloud(apply(tape, zt));
}

std::vector<Param*> Generator::params() {
  std::vector<Param*> out;
  for (auto& layer : fc_) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(DiscriminatorConfig cfg, Rng& rng,
                             const std::string& name)
    : cfg_(std::move(cfg)) {
  check_widths(cfg_.hidden, name + " hidden widths");
  if (cfg_.input_dim <= 0) {
    throw config_error(name + ": input_dim must be positive");
  }
  int in = cfg_.input_dim;
  for (std::size_t i = 0; i < cfg_.hidden.size(); ++i) {
    fc_.push_back(make_dense(name + ".fc" + std::to_string(i + 1), in,
                             cfg_.hidden[i], rng));
    in = cfg_.hidden[i];
  }
  fc_.push_back(make_dense(name + ".out", in, 1, rng));
}

Tensor Discriminator::apply(Tape& tape, Tensor z) {
  if (z.shape().size() != 2 || z.shape()[1] != cfg_.input_dim) {
    throw shape_error("Discriminator::apply: expected z {B," +
                      std::to_string(cfg_.input_dim) + "}, got " +
                      shape_str(z.shape()));
  }
  Tensor h = z;
  for (std::size_t i = 0; i < fc_.size(); ++i) {
    h = dense(tape, h, fc_[i]);
    if (i + 1 < fc_.size()) {
      h = tape.relu(h);
    }
  }
  return h;  // {B, 1}, unbounded (Wasserstein critic)
}

double Discriminator::score(const std::vector<double>& z) {
  Tape tape;
  Tensor zt = tape.constant({1, cfg_.input_dim}, z);
  return apply(tape, zt).values()[0];
}

std::vector<Param*> Discriminator::params() {
  std::vector<Param*> out;
  for (auto& layer : fc_) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  }
  return out;
}

}  // namespace pcgen
