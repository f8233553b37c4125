#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pcgen/pointcloud.hpp"
#include "pcgen/rng.hpp"

namespace pcgen {

// Occupancy histogram over a 28x28x28 grid spanning [-0.5, 0.5]^3.
struct VoxelHistogram {
  static constexpr int kGrid = 28;
  std::vector<double> grid;  // kGrid^3, x-major then y then z
  bool normalized = false;

  static int flat_index(int ix, int iy, int iz) {
    return (ix * kGrid + iy) * kGrid + iz;
  }
};

// Accumulates every point of every cloud into half-open bins over
// [-0.5, 0.5) per axis; the 0.5 boundary clamps into the top bin. Points
// outside the cube by more than 1e-9 raise numeric_error. Result normalized.
VoxelHistogram voxelize(const std::vector<PointCloud>& clouds);

// Jensen-Shannon divergence, natural log: JSD = KL(P||M)/2 + KL(Q||M)/2 with
// M = (P+Q)/2 and the 0*log 0 = 0 convention. Inputs must be normalized.
double jsd(const VoxelHistogram& p, const VoxelHistogram& q);

enum class MetricKind { cd, emd };

// Per-point-normalized distance used inside MMD/COV:
//   cd:  Eq.4 Chamfer with each directed term divided by its set size.
//   emd: optimal-matching cost with unsquared ground distance, divided by N.
double cloud_distance(const PointCloud& a, const PointCloud& b,
                      MetricKind kind);

// Minimum matching distance: mean over reference clouds of the distance to
// the nearest sample cloud.
double mmd(const std::vector<PointCloud>& samples,
           const std::vector<PointCloud>& reference, MetricKind kind);

// Percentage of reference clouds that are a nearest neighbor of at least one
// sample cloud.
double coverage(const std::vector<PointCloud>& samples,
                const std::vector<PointCloud>& reference, MetricKind kind);

struct EvalReport {
  double jsd = 0.0;
  double mmd_cd = 0.0;
  double mmd_emd = 0.0;
  double cov_cd = 0.0;   // percent
  double cov_emd = 0.0;  // percent
  int repeats = 0;
  int sample_multiplier = 0;
};

// One generated cloud per call; draws randomness only from the given rng.
using CloudSampler = std::function<PointCloud(Rng&)>;

// The evaluation protocol: per repeat, draw multiplier*|comparison| clouds
// from the sampler, normalize them, compute all five metrics against the
// comparison set, then average across repeats. Generated non-finite points
// raise numeric_error naming the repeat.
EvalReport evaluate_generator(const CloudSampler& sampler,
                              const std::vector<PointCloud>& comparison,
                              int multiplier, int repeats, Rng& rng);

// Flat key=value text form of a report.
std::string format_report(const EvalReport& report);

}  // namespace pcgen
