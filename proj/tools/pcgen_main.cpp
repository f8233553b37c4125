// pcgen CLI: thin argument-parsing shell over the C API. All behavior lives
// behind libpcgen; this file only maps flags to calls and statuses to exit
// codes (0 ok, 2 config, 3 numeric, 4 I/O, 1 anything else).
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "pcgen.h"

namespace {

int finish(pcgen_ctx* ctx, pcgen_status status) {
  if (status != PCGEN_OK) {
    std::fprintf(stderr, "pcgen: %s\n", pcgen_last_error(ctx));
  }
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud generative models: train, sample, evaluate."};
  app.require_subcommand(1);

  std::string config, checkpoint, out, ply_a, ply_b;
  std::uint64_t seed = 0;
  int count = 16;
  int steps = 8;

  CLI::App* train = app.add_subcommand("train", "Train a model from a config");
  train->add_option("--config", config, "run config file")->required();

  CLI::App* generate =
      app.add_subcommand("generate", "Sample clouds from a checkpoint");
  generate->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  generate->add_option("--out", out, "output directory")->required();
  generate->add_option("--count", count, "number of clouds");
  generate->add_option("--seed", seed, "sampling seed");

  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate a checkpoint against the test split");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("--config", config, "run config file")->required();
  eval->add_option("--out", out, "report file")->required();
  eval->add_option("--seed", seed, "evaluation seed");

  CLI::App* interp =
      app.add_subcommand("interp", "Interpolate between two PLY clouds");
  interp->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  interp->add_option("a", ply_a, "first PLY file")->required();
  interp->add_option("b", ply_b, "second PLY file")->required();
  interp->add_option("--steps", steps, "number of interpolation steps");
  interp->add_option("--out", out, "output directory")->required();

  CLI::App* embed =
      app.add_subcommand("embed", "Encode the dataset into latent codes");
  embed->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  embed->add_option("--config", config, "run config file")->required();
  embed->add_option("--out", out, "codes file")->required();

  CLI::App* cluster =
      app.add_subcommand("cluster", "Cluster the dataset with the categorical head");
  cluster->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  cluster->add_option("--config", config, "run config file")->required();
  cluster->add_option("--out", out, "assignments file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad flags are config errors
  }

  std::unique_ptr<pcgen_ctx, decltype(&pcgen_ctx_free)> ctx(
      pcgen_ctx_new(), &pcgen_ctx_free);
  if (!ctx) {
    std::fprintf(stderr, "pcgen: out of memory\n");
    return 1;
  }

  if (train->parsed()) {
    return finish(ctx.get(), pcgen_cmd_train(ctx.get(), config.c_str()));
  }
  if (generate->parsed()) {
    return finish(ctx.get(),
                  pcgen_cmd_generate(ctx.get(), checkpoint.c_str(), count,
                                     seed, out.c_str()));
  }
  if (eval->parsed()) {
    return finish(ctx.get(),
                  pcgen_cmd_eval(ctx.get(), checkpoint.c_str(),
                                 config.c_str(), seed, out.c_str()));
  }
  if (interp->parsed()) {
    return finish(ctx.get(),
                  pcgen_cmd_interp(ctx.get(), checkpoint.c_str(),
                                   ply_a.c_str(), ply_b.c_str(), steps,
                                   out.c_str()));
  }
  if (embed->parsed()) {
    return finish(ctx.get(),
                  pcgen_cmd_embed(ctx.get(), checkpoint.c_str(),
                                  config.c_str(), out.c_str()));
  }
  if (cluster->parsed()) {
    return finish(ctx.get(),
                  pcgen_cmd_cluster(ctx.get(), checkpoint.c_str(),
                                    config.c_str(), out.c_str()));
  }
  return 1;  // unreachable: require_subcommand(1)
}
