#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgen/pointcloud.hpp"
#include "pcgen/training.hpp"

namespace pcgen {

// Flat key=value run configuration: the TrainConfig keys plus dataset,
// output, and evaluation settings. Unknown keys are rejected; `mode` is
// required; relative paths resolve against the config file's directory.
struct RunConfig {
  TrainConfig train;
  std::vector<std::string> families = {"sphere", "box", "torus"};
  int clouds_per_family = 200;
  int n_points = 256;
  std::uint64_t data_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t prior_seed = 0;  // GMM prior parameter seed
  std::string data_dir;          // when set, load *.ply from here instead
  std::string out_dir = "out";
  int checkpoint_every = 10;
  int eval_multiplier = 3;
  int eval_repeats = 3;
  int threads = 1;
};

RunConfig load_run_config(const std::string& config_path);

// Synthetic families (or *.ply files from data_dir), normalized into the
// unit cube, with the 85/5/10 split applied.
Dataset build_dataset(const RunConfig& config);

// `threads` config value with the PCGEN_THREADS environment override
// applied; rejects values < 1. Distance kernels currently run sequentially,
// so the value is validated and capped rather than spawning a pool.
int resolve_threads(int config_threads);

void cmd_train(const std::string& config_path);
void cmd_generate(const std::string& checkpoint_path, int count,
                  std::uint64_t seed, const std::string& out_dir);
void cmd_eval(const std::string& checkpoint_path,
              const std::string& config_path, std::uint64_t seed,
              const std::string& out_path);
void cmd_interp(const std::string& checkpoint_path, const std::string& ply_a,
                const std::string& ply_b, int steps,
                const std::string& out_dir);
void cmd_embed(const std::string& checkpoint_path,
               const std::string& config_path, const std::string& out_path);
void cmd_cluster(const std::string& checkpoint_path,
                 const std::string& config_path, const std::string& out_path);

}  // namespace pcgen
