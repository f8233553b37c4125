#include "cli_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "pcgen/config_kv.hpp"
#include "pcgen/errors.hpp"
#include "pcgen/latent.hpp"
#include "pcgen/metrics.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;

namespace pcgen {

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      comma = s.size();
    }
    std::string item = s.substr(start, comma - start);
    const std::size_t a = item.find_first_not_of(" \t");
    const std::size_t b = item.find_last_not_of(" \t");
    if (a != std::string::npos) {
      out.push_back(item.substr(a, b - a + 1));
    }
    start = comma + 1;
  }
  return out;
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) {
    return p;
  }
  return (fs::path(base_dir) / p).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out) {
    throw io_error("write failed for '" + path + "'");
  }
}

void make_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw io_error("cannot create directory '" + dir + "': " + ec.message());
  }
}

std::vector<PointCloud> part_clouds(const Dataset& data, SplitPart part) {
  std::vector<PointCloud> out;
  for (int i : data.part_indices(part)) {
    out.push_back(data.clouds[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Validation first, then test, then everything: select_best and eval need a
// non-empty comparison set even on tiny datasets.
std::vector<PointCloud> comparison_clouds(const Dataset& data, SplitPart want) {
  std::vector<PointCloud> out = part_clouds(data, want);
  if (out.empty()) {
    out = part_clouds(data, SplitPart::test);
  }
  if (out.empty()) {
    out = data.clouds;
  }
  return out;
}

std::string cloud_line(const std::vector<double>& code, bool with_bits) {
  std::string line;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (i) {
      line += ' ';
    }
    line += format_double(code[i]);
  }
  if (with_bits) {
    line += '\t';
    for (int b : binarize(code).bits) {
      line += b ? '1' : '0';
    }
  }
  return line;
}

}  // namespace

int resolve_threads(int config_threads) {
  int threads = config_threads;
  if (const char* env = std::getenv("PCGEN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw config_error("PCGEN_THREADS must be a positive integer, got '" +
                         std::string(env) + "'");
    }
    threads = static_cast<int>(v);
  }
  if (threads < 1) {
    throw config_error("threads must be >= 1");
  }
  return threads;
}

RunConfig load_run_config(const std::string& config_path) {
  const std::map<std::string, std::string> kv = parse_kv_file(config_path);
  if (!kv_has(kv, "mode")) {
    throw config_error("config: missing key 'mode'");
  }

  // Unknown keys are rejected against the full known-key set.
  std::set<std::string> allowed;
  for (const auto& [k, v] : train_config_to_kv(TrainConfig{})) {
    allowed.insert(k);
  }
  for (const char* k :
       {"dataset.families", "dataset.count", "dataset.n_points",
        "dataset.seed", "dataset.dir", "split.seed", "prior.seed", "out_dir",
        "checkpoint_every", "eval.multiplier", "eval.repeats", "threads"}) {
    allowed.insert(k);
  }
  for (const auto& [k, v] : kv) {
    if (!allowed.count(k)) {
      throw config_error("config: unknown key '" + k + "'");
    }
  }

  RunConfig rc;
  rc.train = train_config_from_kv(kv);
  if (kv_has(kv, "dataset.families")) {
    rc.families = split_csv(kv_get(kv, "dataset.families"));
    if (rc.families.empty()) {
      throw config_error("config: dataset.families is empty");
    }
  }
  rc.clouds_per_family = kv_get_int(kv, "dataset.count", rc.clouds_per_family);
  rc.n_points = kv_get_int(kv, "dataset.n_points", rc.n_points);
  rc.data_seed = kv_get_u64(kv, "dataset.seed", rc.train.seed);
  rc.split_seed = kv_get_u64(kv, "split.seed", rc.train.seed);
  rc.prior_seed = kv_get_u64(kv, "prior.seed", rc.train.seed);
  rc.data_dir = kv_get_or(kv, "dataset.dir", "");
  rc.out_dir = kv_get_or(kv, "out_dir", rc.out_dir);
  rc.checkpoint_every = kv_get_int(kv, "checkpoint_every", rc.checkpoint_every);
  rc.eval_multiplier = kv_get_int(kv, "eval.multiplier", rc.eval_multiplier);
  rc.eval_repeats = kv_get_int(kv, "eval.repeats", rc.eval_repeats);
  rc.threads = kv_get_int(kv, "threads", rc.threads);

  if (rc.clouds_per_family < 1) {
    throw config_error("config: dataset.count must be >= 1");
  }
  if (rc.n_points < 1) {
    throw config_error("config: dataset.n_points must be >= 1");
  }
  if (rc.checkpoint_every < 1) {
    throw config_error("config: checkpoint_every must be >= 1");
  }
  if (rc.eval_multiplier < 1 || rc.eval_repeats < 1) {
    throw config_error("config: eval.multiplier and eval.repeats must be >= 1");
  }

  // The generator emits dataset-sized clouds unless explicitly overridden.
  if (!kv_has(kv, "generator.n_points")) {
    rc.train.generator.n_points = rc.n_points;
  }
  // GMM prior parameters are derived, not listed in the config.
  if (rc.train.prior.kind == PriorSpec::Kind::gmm) {
    rc.train.prior = make_gmm_prior(rc.train.prior.k, rc.train.prior.dim,
                                    rc.prior_seed);
  }

  const std::string base = fs::path(config_path).parent_path().string();
  rc.data_dir = resolve_path(base, rc.data_dir);
  rc.out_dir = resolve_path(base, rc.out_dir);
  (void)resolve_threads(rc.threads);
  return rc;
}

Dataset build_dataset(const RunConfig& config) {
  Dataset all;
  if (!config.data_dir.empty()) {
    std::vector<std::string> paths;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(config.data_dir, ec)) {
      if (entry.path().extension() == ".ply") {
        paths.push_back(entry.path().string());
      }
    }
    if (ec) {
      throw io_error("cannot read dataset directory '" + config.data_dir +
                     "': " + ec.message());
    }
    if (paths.empty()) {
      throw io_error("no .ply files in '" + config.data_dir + "'");
    }
    std::sort(paths.begin(), paths.end());
    for (const std::string& p : paths) {
      all.clouds.push_back(load_ply(p));
    }
  } else {
    std::vector<Dataset> parts;
    for (std::size_t f = 0; f < config.families.size(); ++f) {
      ShapeFamilySpec spec;
      spec.family = config.families[f];
      spec.n_points = config.n_points;
      spec.seed = derive_seed(config.data_seed, f);
      parts.push_back(synth_generate(spec, config.clouds_per_family));
    }
    all = concat(parts);
  }
  for (PointCloud& c : all.clouds) {
    c = normalize(c);
  }
  return split(all, config.split_seed);
}

void cmd_train(const std::string& config_path) {
  RunConfig rc = load_run_config(config_path);
  Dataset data = build_dataset(rc);
  std::vector<PointCloud> train_clouds = part_clouds(data, SplitPart::train);
  if (train_clouds.empty()) {
    train_clouds = data.clouds;
  }
  ModelBundle bundle = make_bundle(rc.train);
  make_out_dir(rc.out_dir);

  std::vector<std::string> checkpoints;
  auto ckpt_path = [&](int epoch) {
    char name[32];
    std::snprintf(name, sizeof(name), "ckpt_epoch%04d.bin", epoch);
    return (fs::path(rc.out_dir) / name).string();
  };
  TrainResult result =
      train(bundle, train_clouds, [&](const ModelBundle& b) {
        if (b.epoch % rc.checkpoint_every == 0 ||
            b.epoch == b.config.epochs) {
          const std::string path = ckpt_path(b.epoch);
          checkpoint_save(b, path);
          if (checkpoints.empty() || checkpoints.back() != path) {
            checkpoints.push_back(path);
          }
        }
      });
  if (checkpoints.empty()) {  // epochs == 0: still persist the initial state
    const std::string path = ckpt_path(bundle.epoch);
    checkpoint_save(bundle, path);
    checkpoints.push_back(path);
  }

  std::string tsv = "# step\trecon\tadv_or_kl\tgp\tlambda\n";
  std::vector<double> recon_series, other_series;
  for (const LossRecord& r : result.log) {
    tsv += std::to_string(r.step) + '\t' + format_double(r.recon) + '\t' +
           format_double(r.kl_or_adv) + '\t' + format_double(r.gp) + '\t' +
           format_double(r.lambda) + '\n';
    recon_series.push_back(r.recon);
    other_series.push_back(r.kl_or_adv);
  }
  write_file((fs::path(rc.out_dir) / "losses.tsv").string(), tsv);
  const char* other_name = rc.train.mode == TrainMode::vae ? "kl" : "adv";
  write_file((fs::path(rc.out_dir) / "losses.svg").string(),
             svg_line_chart({{"recon", recon_series},
                             {other_name, other_series}},
                            "training loss"));

  const std::vector<PointCloud> validation =
      comparison_clouds(data, SplitPart::validation);
  const std::size_t best =
      select_best(checkpoints, validation, rc.train.seed);
  std::error_code ec;
  fs::copy_file(checkpoints[best], fs::path(rc.out_dir) / "best.ckpt",
                fs::copy_options::overwrite_existing, ec);
  if (ec) {
    throw io_error("cannot write best.ckpt: " + ec.message());
  }
}

void cmd_generate(const std::string& checkpoint_path, int count,
                  std::uint64_t seed, const std::string& out_dir) {
  if (count < 0) {
    throw config_error("generate: count must be >= 0");
  }
  ModelBundle bundle = checkpoint_load(checkpoint_path);
  make_out_dir(out_dir);
  Rng rng(seed);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < count; ++i) {
    PointCloud cloud = sample_cloud(bundle, rng);
    for (const Point3& p : cloud.points) {
      for (double v : p) {
        if (!std::isfinite(v)) {
          throw numeric_error("generate: non-finite point in sample " +
                              std::to_string(i));
        }
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "gen_%03d.ply", i);
    save_ply(cloud, (fs::path(out_dir) / name).string());
    clouds.push_back(std::move(cloud));
  }
  if (count > 0) {
    const int cols =
        static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    write_file((fs::path(out_dir) / "sheet.svg").string(),
               svg_cloud_grid(clouds, cols));
  }
}

void cmd_eval(const std::string& checkpoint_path,
              const std::string& config_path, std::uint64_t seed,
              const std::string& out_path) {
  ModelBundle bundle = checkpoint_load(checkpoint_path);
  RunConfig rc = load_run_config(config_path);
  Dataset data = build_dataset(rc);
  const std::vector<PointCloud> comparison =
      comparison_clouds(data, SplitPart::test);
  Rng rng(seed);
  EvalReport report =
      evaluate_generator(bundle_sampler(bundle), comparison,
                         rc.eval_multiplier, rc.eval_repeats, rng);
  write_file(out_path, format_report(report));
}

void cmd_interp(const std::string& checkpoint_path, const std::string& ply_a,
                const std::string& ply_b, int steps,
                const std::string& out_dir) {
  if (steps < 2) {
    throw config_error("interp: steps must be >= 2");
  }
  ModelBundle bundle = checkpoint_load(checkpoint_path);
  const PointCloud a = normalize(load_ply(ply_a));
  const PointCloud b = normalize(load_ply(ply_b));
  const LatentCode ca = bundle.encoder->encode(a);
  const LatentCode cb = bundle.encoder->encode(b);
  make_out_dir(out_dir);
  std::vector<PointCloud> decoded;
  int i = 0;
  for (const auto& z : interpolate(ca.mu, cb.mu, steps)) {
    PointCloud cloud = bundle.generator->decode(z);
    char name[32];
    std::snprintf(name, sizeof(name), "interp_%02d.ply", i++);
    save_ply(cloud, (fs::path(out_dir) / name).string());
    decoded.push_back(std::move(cloud));
  }
  write_file((fs::path(out_dir) / "strip.svg").string(),
             svg_cloud_grid(decoded, steps));
}

void cmd_embed(const std::string& checkpoint_path,
               const std::string& config_path, const std::string& out_path) {
  ModelBundle bundle = checkpoint_load(checkpoint_path);
  RunConfig rc = load_run_config(config_path);
  Dataset data = build_dataset(rc);
  const bool with_bits = bundle.config.prior.kind == PriorSpec::Kind::beta;
  std::string text;
  for (const PointCloud& cloud : data.clouds) {
    text += cloud_line(bundle.encoder->encode(cloud).mu, with_bits);
    text += '\n';
  }
  write_file(out_path, text);
}

void cmd_cluster(const std::string& checkpoint_path,
                 const std::string& config_path,
                 const std::string& out_path) {
  ModelBundle bundle = checkpoint_load(checkpoint_path);
  if (bundle.config.encoder.categorical_k < 2) {
    throw config_error(
        "cluster: checkpoint has no categorical head (train with mode aae_c)");
  }
  RunConfig rc = load_run_config(config_path);
  Dataset data = build_dataset(rc);
  const std::vector<std::string> labels = data.distinct_labels();
  auto label_id = [&](const std::string& l) {
    return static_cast<int>(
        std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
  };
  std::vector<int> assignments, truth;
  std::string text = "# cloud\tlabel\tcluster\n";
  for (std::size_t i = 0; i < data.clouds.size(); ++i) {
    const PointCloud& cloud = data.clouds[i];
    const int cluster = cluster_assign(bundle.encoder->encode(cloud));
    assignments.push_back(cluster);
    truth.push_back(label_id(cloud.label));
    text += std::to_string(i) + '\t' + cloud.label + '\t' +
            std::to_string(cluster) + '\n';
  }
  text += "purity=" + format_double(cluster_purity(assignments, truth)) + '\n';
  write_file(out_path, text);
}

}  // namespace pcgen
