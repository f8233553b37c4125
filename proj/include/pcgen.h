/* pcgen C API: the stable binary interface to the point-cloud generation
 * library. All entry points are exception-free; failures come back as a
 * pcgen_status with a human-readable message retrievable from the context.
 */
#ifndef PCGEN_H
#define PCGEN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the CLI uses them verbatim as process exit codes. */
typedef enum pcgen_status {
  PCGEN_OK = 0,
  PCGEN_ERR_INTERNAL = 1, /* unexpected failure (bug, bad arguments) */
  PCGEN_ERR_CONFIG = 2,   /* invalid configuration or flag values */
  PCGEN_ERR_NUMERIC = 3,  /* non-finite loss/gradient, failed update */
  PCGEN_ERR_IO = 4        /* missing/corrupt/unwritable files */
} pcgen_status;

/* Opaque handles. A context carries the last error message and is not
 * thread-safe; use one per thread. */
typedef struct pcgen_ctx pcgen_ctx;
typedef struct pcgen_model pcgen_model;

pcgen_ctx* pcgen_ctx_new(void);
void pcgen_ctx_free(pcgen_ctx* ctx);

/* Message from the most recent failing call on this context; empty string
 * when the last call succeeded. The pointer stays valid until the next call
 * that takes this context, or until the context is freed. */
const char* pcgen_last_error(const pcgen_ctx* ctx);

/* ------------------------------------------------------------------------
 * Whole-command entry points (one per CLI subcommand).
 * All paths are NUL-terminated UTF-8/byte strings.
 * ---------------------------------------------------------------------- */

/* Train per the run config; writes checkpoints, losses.tsv, losses.svg and
 * best.ckpt into the config's out_dir. */
pcgen_status pcgen_cmd_train(pcgen_ctx* ctx, const char* config_path);

/* Sample `count` clouds (seeded) from a checkpoint into out_dir as
 * gen_NNN.ply plus one sheet.svg contact sheet (when count > 0). */
pcgen_status pcgen_cmd_generate(pcgen_ctx* ctx, const char* checkpoint_path,
                                int count, uint64_t seed,
                                const char* out_dir);

/* Run the evaluation protocol against the config's test split and write a
 * key=value report to out_path. */
pcgen_status pcgen_cmd_eval(pcgen_ctx* ctx, const char* checkpoint_path,
                            const char* config_path, uint64_t seed,
                            const char* out_path);

/* Latent interpolation between two PLY clouds: `steps` decoded clouds
 * (endpoints included) as interp_NN.ply plus strip.svg in out_dir. */
pcgen_status pcgen_cmd_interp(pcgen_ctx* ctx, const char* checkpoint_path,
                              const char* ply_a, const char* ply_b, int steps,
                              const char* out_dir);

/* Encode every dataset cloud; one line of code values per cloud, with a
 * tab-separated binarized column for Beta-prior checkpoints. */
pcgen_status pcgen_cmd_embed(pcgen_ctx* ctx, const char* checkpoint_path,
                             const char* config_path, const char* out_path);

/* Cluster assignments from the categorical head plus a trailing purity
 * line; requires an aae_c checkpoint. */
pcgen_status pcgen_cmd_cluster(pcgen_ctx* ctx, const char* checkpoint_path,
                               const char* config_path, const char* out_path);

/* ------------------------------------------------------------------------
 * Model-level access for embedding the generator in other programs.
 * ---------------------------------------------------------------------- */

pcgen_status pcgen_model_load(pcgen_ctx* ctx, const char* checkpoint_path,
                              pcgen_model** out_model);
void pcgen_model_free(pcgen_model* model);

/* Negative on a NULL model. */
int pcgen_model_latent_dim(const pcgen_model* model);
int pcgen_model_n_points(const pcgen_model* model);

/* One prior sample decoded to a cloud; writes n_points*3 doubles (x y z per
 * point, row-major) into out_points. Deterministic in `seed`. */
pcgen_status pcgen_model_sample(pcgen_ctx* ctx, pcgen_model* model,
                                uint64_t seed, double* out_points);

/* Encode n_points*3 doubles (row-major x y z) into latent_dim code values
 * (the deterministic mu head). */
pcgen_status pcgen_model_encode(pcgen_ctx* ctx, pcgen_model* model,
                                const double* points, int n_points,
                                double* out_code);

#ifdef __cplusplus
}
#endif

#endif /* PCGEN_H */
