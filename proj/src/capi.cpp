#include "pcgen.h"

#include <new>
#include <string>
#include <vector>

#include "cli_ops.hpp"
#include "pcgen/errors.hpp"
#include "pcgen/training.hpp"

struct pcgen_ctx {
  std::string last_error;
};

struct pcgen_model {
  pcgen::ModelBundle bundle;
};

namespace {

// Runs fn, routing the pcgen error taxonomy onto status codes. The context
// message is cleared on success so stale errors never leak forward.
template <typename Fn>
pcgen_status guarded(pcgen_ctx* ctx, Fn&& fn) {
  if (!ctx) {
    return PCGEN_ERR_INTERNAL;
  }
  ctx->last_error.clear();
  try {
    fn();
    return PCGEN_OK;
  } catch (const pcgen::config_error& e) {
    ctx->last_error = e.what();
    return PCGEN_ERR_CONFIG;
  } catch (const pcgen::numeric_error& e) {
    ctx->last_error = e.what();
    return PCGEN_ERR_NUMERIC;
  } catch (const pcgen::io_error& e) {
    ctx->last_error = e.what();
    return PCGEN_ERR_IO;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return PCGEN_ERR_INTERNAL;
  } catch (...) {
    ctx->last_error = "unknown error";
    return PCGEN_ERR_INTERNAL;
  }
}

pcgen_status require(pcgen_ctx* ctx, bool ok, const char* msg) {
  if (ok) {
    return PCGEN_OK;
  }
  if (ctx) {
    ctx->last_error = msg;
  }
  return PCGEN_ERR_INTERNAL;
}

}  // namespace

extern "C" {

pcgen_ctx* pcgen_ctx_new(void) { return new (std::nothrow) pcgen_ctx{}; }

void pcgen_ctx_free(pcgen_ctx* ctx) { delete ctx; }

const char* pcgen_last_error(const pcgen_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "";
}

pcgen_status pcgen_cmd_train(pcgen_ctx* ctx, const char* config_path) {
  if (pcgen_status s = require(ctx, config_path, "config_path is NULL")) {
    return s;
  }
  return guarded(ctx, [&] { pcgen::cmd_train(config_path); });
}

pcgen_status pcgen_cmd_generate(pcgen_ctx* ctx, const char* checkpoint_path,
                                int count, uint64_t seed,
                                const char* out_dir) {
  if (pcgen_status s = require(ctx, checkpoint_path && out_dir,
                               "checkpoint_path/out_dir is NULL")) {
    return s;
  }
  return guarded(
      ctx, [&] { pcgen::cmd_generate(checkpoint_path, count, seed, out_dir); });
}

pcgen_status pcgen_cmd_eval(pcgen_ctx* ctx, const char* checkpoint_path,
                            const char* config_path, uint64_t seed,
                            const char* out_path) {
  if (pcgen_status s = require(ctx, checkpoint_path && config_path && out_path,
                               "a path argument is NULL")) {
    return s;
  }
  return guarded(ctx, [&] {
    pcgen::cmd_eval(checkpoint_path, config_path, seed, out_path);
  });
}

pcgen_status pcgen_cmd_interp(pcgen_ctx* ctx, const char* checkpoint_path,
                              const char* ply_a, const char* ply_b, int steps,
                              const char* out_dir) {
  if (pcgen_status s = require(ctx,
                               checkpoint_path && ply_a && ply_b && out_dir,
                               "a path argument is NULL")) {
    return s;
  }
  return guarded(ctx, [&] {
    pcgen::cmd_interp(checkpoint_path, ply_a, ply_b, steps, out_dir);
  });
}

pcgen_status pcgen_cmd_embed(pcgen_ctx* ctx, const char* checkpoint_path,
                             const char* config_path, const char* out_path) {
  if (pcgen_status s = require(ctx, checkpoint_path && config_path && out_path,
                               "a path argument is NULL")) {
    return s;
  }
  return guarded(ctx, [&] {
    pcgen::cmd_embed(checkpoint_path, config_path, out_path);
  });
}

pcgen_status pcgen_cmd_cluster(pcgen_ctx* ctx, const char* checkpoint_path,
                               const char* config_path,
                               const char* out_path) {
  if (pcgen_status s = require(ctx, checkpoint_path && config_path && out_path,
                               "a path argument is NULL")) {
    return s;
  }
  return guarded(ctx, [&] {
    pcgen::cmd_cluster(checkpoint_path, config_path, out_path);
  });
}

pcgen_status pcgen_model_load(pcgen_ctx* ctx, const char* checkpoint_path,
                              pcgen_model** out_model) {
  if (pcgen_status s = require(ctx, checkpoint_path && out_model,
                               "checkpoint_path/out_model is NULL")) {
    return s;
  }
  *out_model = nullptr;
  return guarded(ctx, [&] {
    *out_model = new pcgen_model{pcgen::checkpoint_load(checkpoint_path)};
  });
}

void pcgen_model_free(pcgen_model* model) { delete model; }

int pcgen_model_latent_dim(const pcgen_model* model) {
  return model ? model->bundle.config.encoder.latent_dim : -1;
}

int pcgen_model_n_points(const pcgen_model* model) {
  return model ? model->bundle.config.generator.n_points : -1;
}

pcgen_status pcgen_model_sample(pcgen_ctx* ctx, pcgen_model* model,
                                uint64_t seed, double* out_points) {
  if (pcgen_status s =
          require(ctx, model && out_points, "model/out_points is NULL")) {
    return s;
  }
  return guarded(ctx, [&] {
    pcgen::Rng rng(seed);
    const pcgen::PointCloud cloud = pcgen::sample_cloud(model->bundle, rng);
    double* out = out_points;
    for (const pcgen::Point3& p : cloud.points) {
      *out++ = p[0];
      *out++ = p[1];
      *out++ = p[2];
    }
  });
}

pcgen_status pcgen_model_encode(pcgen_ctx* ctx, pcgen_model* model,
                                const double* points, int n_points,
                                double* out_code) {
  if (pcgen_status s = require(ctx, model && points && out_code,
                               "model/points/out_code is NULL")) {
    return s;
  }
  if (pcgen_status s = require(ctx, n_points >= 1, "n_points must be >= 1")) {
    return s;
  }
  return guarded(ctx, [&] {
    pcgen::PointCloud cloud;
    cloud.points.resize(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
      cloud.points[static_cast<std::size_t>(i)] = {
          points[3 * i], points[3 * i + 1], points[3 * i + 2]};
    }
    const std::vector<double> mu =
        model->bundle.encoder->encode(cloud).mu;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      out_code[i] = mu[i];
    }
  });
}

}  // extern "C"
