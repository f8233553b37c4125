// Exercises the shared-library C API exactly as an external client would:
// only pcgen.h, no internal headers.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pcgen.h"

namespace fs = std::filesystem;

namespace {

struct Ctx {
  pcgen_ctx* c = pcgen_ctx_new();
  ~Ctx() { pcgen_ctx_free(c); }
};

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path("capi_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_tiny_config(const fs::path& dir) {
  const std::string path = (dir / "run.cfg").string();
  std::ofstream out(path, std::ios::binary);
  out << "mode=ae\n"
         "recon=chamfer\n"
         "epochs=2\n"
         "batch_size=4\n"
         "seed=5\n"
         "encoder.conv_widths=8,16\n"
         "encoder.feature_dim=16\n"
         "encoder.latent_dim=4\n"
         "generator.hidden=16,16\n"
         "generator.input_dim=4\n"
         "prior.kind=gaussian\n"
         "prior.dim=4\n"
         "dataset.families=sphere,box\n"
         "dataset.count=6\n"
         "dataset.n_points=24\n"
         "checkpoint_every=1\n"
         "out_dir=out\n";
  return path;
}

// One trained model shared by every C API test.
struct Trained {
  fs::path dir;
  std::string config;
  std::string checkpoint;

  Trained() {
    dir = scratch("shared");
    config = write_tiny_config(dir);
    Ctx ctx;
    REQUIRE(pcgen_cmd_train(ctx.c, config.c_str()) == PCGEN_OK);
    checkpoint = (dir / "out" / "best.ckpt").string();
  }

  static const Trained& get() {
    static Trained t;
    return t;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("context reports no error after success") {
  Ctx ctx;
  REQUIRE(ctx.c != nullptr);
  CHECK(std::string(pcgen_last_error(ctx.c)).empty());
}

TEST_CASE("train via the C API produces the full artifact set") {
  const Trained& t = Trained::get();
  CHECK(fs::exists(t.dir / "out" / "losses.tsv"));
  CHECK(fs::exists(t.dir / "out" / "losses.svg"));
  CHECK(fs::exists(t.dir / "out" / "best.ckpt"));
}

TEST_CASE("config errors map to PCGEN_ERR_CONFIG with a message") {
  const fs::path dir = scratch("badcfg");
  std::ofstream((dir / "no_mode.cfg").string()) << "epochs=1\n";
  Ctx ctx;
  CHECK(pcgen_cmd_train(ctx.c, (dir / "no_mode.cfg").string().c_str()) ==
        PCGEN_ERR_CONFIG);
  CHECK(std::string(pcgen_last_error(ctx.c)).find("mode") !=
        std::string::npos);
}

TEST_CASE("io errors map to PCGEN_ERR_IO") {
  Ctx ctx;
  pcgen_model* model = nullptr;
  CHECK(pcgen_model_load(ctx.c, "does_not_exist.ckpt", &model) ==
        PCGEN_ERR_IO);
  CHECK(model == nullptr);
  CHECK(!std::string(pcgen_last_error(ctx.c)).empty());
}

TEST_CASE("NULL arguments are rejected as internal errors") {
  Ctx ctx;
  CHECK(pcgen_cmd_train(ctx.c, nullptr) == PCGEN_ERR_INTERNAL);
  CHECK(pcgen_cmd_train(nullptr, "x") == PCGEN_ERR_INTERNAL);
  pcgen_model* model = nullptr;
  CHECK(pcgen_model_load(ctx.c, nullptr, &model) == PCGEN_ERR_INTERNAL);
  CHECK(pcgen_model_latent_dim(nullptr) < 0);
  CHECK(pcgen_model_n_points(nullptr) < 0);
}

TEST_CASE("a later success clears the previous error message") {
  const Trained& t = Trained::get();
  Ctx ctx;
  pcgen_model* model = nullptr;
  REQUIRE(pcgen_model_load(ctx.c, "missing.ckpt", &model) == PCGEN_ERR_IO);
  CHECK(!std::string(pcgen_last_error(ctx.c)).empty());
  REQUIRE(pcgen_model_load(ctx.c, t.checkpoint.c_str(), &model) == PCGEN_OK);
  CHECK(std::string(pcgen_last_error(ctx.c)).empty());
  pcgen_model_free(model);
}

TEST_CASE("model handle exposes dimensions, sampling, and encoding") {
  const Trained& t = Trained::get();
  Ctx ctx;
  pcgen_model* model = nullptr;
  REQUIRE(pcgen_model_load(ctx.c, t.checkpoint.c_str(), &model) == PCGEN_OK);
  REQUIRE(model != nullptr);
  CHECK(pcgen_model_latent_dim(model) == 4);
  CHECK(pcgen_model_n_points(model) == 24);

  std::vector<double> points(24 * 3, 0.0);
  REQUIRE(pcgen_model_sample(ctx.c, model, 77, points.data()) == PCGEN_OK);
  for (double v : points) {
    CHECK(std::isfinite(v));
  }
  // Same seed, same bytes; different seed, different cloud.
  std::vector<double> again(24 * 3, 0.0);
  REQUIRE(pcgen_model_sample(ctx.c, model, 77, again.data()) == PCGEN_OK);
  CHECK(points == again);
  REQUIRE(pcgen_model_sample(ctx.c, model, 78, again.data()) == PCGEN_OK);
  CHECK(points != again);

  std::vector<double> code(4, 0.0);
  REQUIRE(pcgen_model_encode(ctx.c, model, points.data(), 24, code.data()) ==
          PCGEN_OK);
  for (double v : code) {
    CHECK(std::isfinite(v));
  }
  CHECK(pcgen_model_encode(ctx.c, model, points.data(), 0, code.data()) ==
        PCGEN_ERR_INTERNAL);
  pcgen_model_free(model);
  pcgen_model_free(nullptr);  // must be a no-op
}

TEST_CASE("generate and eval round-trip through the C API") {
  const Trained& t = Trained::get();
  const fs::path dir = scratch("cmds");
  Ctx ctx;
  REQUIRE(pcgen_cmd_generate(ctx.c, t.checkpoint.c_str(), 3, 9,
                             (dir / "gen").string().c_str()) == PCGEN_OK);
  CHECK(fs::exists(dir / "gen" / "gen_002.ply"));
  CHECK(fs::exists(dir / "gen" / "sheet.svg"));

  const std::string report = (dir / "report.txt").string();
  REQUIRE(pcgen_cmd_eval(ctx.c, t.checkpoint.c_str(), t.config.c_str(), 4,
                         report.c_str()) == PCGEN_OK);
  CHECK(slurp(report).find("jsd=") != std::string::npos);

  const std::string a = (dir / "gen" / "gen_000.ply").string();
  const std::string b = (dir / "gen" / "gen_001.ply").string();
  REQUIRE(pcgen_cmd_interp(ctx.c, t.checkpoint.c_str(), a.c_str(), b.c_str(),
                           3, (dir / "interp").string().c_str()) == PCGEN_OK);
  CHECK(fs::exists(dir / "interp" / "interp_02.ply"));

  const std::string codes = (dir / "codes.txt").string();
  REQUIRE(pcgen_cmd_embed(ctx.c, t.checkpoint.c_str(), t.config.c_str(),
                          codes.c_str()) == PCGEN_OK);
  CHECK(!slurp(codes).empty());

  // A non-categorical checkpoint cannot cluster: config error.
  CHECK(pcgen_cmd_cluster(ctx.c, t.checkpoint.c_str(), t.config.c_str(),
                          (dir / "cl.txt").string().c_str()) ==
        PCGEN_ERR_CONFIG);
}
