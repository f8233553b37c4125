#include "pcgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "pcgen/distances.hpp"
#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

constexpr double kCubeTol = 1e-9;

int bin_of(double v, const PointCloud& cloud, std::size_t point_idx) {
  if (!(v >= -0.5 - kCubeTol && v <= 0.5 + kCubeTol)) {
    throw numeric_error(
        "voxelize: point " + std::to_string(point_idx) + " of cloud '" +
        cloud.label + "' lies outside [-0.5,0.5]^3 (coordinate " +
        std::to_string(v) + ")");
  }
  const int b = static_cast<int>(std::floor((v + 0.5) * VoxelHistogram::kGrid));
  return std::clamp(b, 0, VoxelHistogram::kGrid - 1);
}

double kl_to_mix(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      const double m = 0.5 * (p[i] + q[i]);
      kl += p[i] * std::log(p[i] / m);
    }
  }
  return kl;
}

void check_normalized(const VoxelHistogram& h, const char* which) {
  const std::size_t n = static_cast<std::size_t>(VoxelHistogram::kGrid) *
                        VoxelHistogram::kGrid * VoxelHistogram::kGrid;
  if (!h.normalized || h.grid.size() != n) {
    throw config_error(std::string("jsd: ") + which +
                       " histogram is not normalized");
  }
  double sum = 0.0;
  for (double v : h.grid) {
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw config_error(std::string("jsd: ") + which +
                       " histogram mass is " + std::to_string(sum));
  }
}

}  // namespace

VoxelHistogram voxelize(const std::vector<PointCloud>& clouds) {
  VoxelHistogram h;
  const std::size_t n = static_cast<std::size_t>(VoxelHistogram::kGrid) *
                        VoxelHistogram::kGrid * VoxelHistogram::kGrid;
  h.grid.assign(n, 0.0);
  std::size_t total = 0;
  for (const PointCloud& cloud : clouds) {
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const Point3& p = cloud.points[i];
      const int ix = bin_of(p[0], cloud, i);
      const int iy = bin_of(p[1], cloud, i);
      const int iz = bin_of(p[2], cloud, i);
      h.grid[static_cast<std::size_t>(VoxelHistogram::flat_index(ix, iy, iz))] +=
          1.0;
      ++total;
    }
  }
  if (total == 0) {
    throw config_error("voxelize: no points to accumulate");
  }
  for (double& v : h.grid) {
    v /= static_cast<double>(total);
  }
  h.normalized = true;
  return h;
}

double jsd(const VoxelHistogram& p, const VoxelHistogram& q) {
  check_normalized(p, "first");
  check_normalized(q, "second");
  return 0.5 * kl_to_mix(p.grid, q.grid) + 0.5 * kl_to_mix(q.grid, p.grid);
}

double cloud_distance(const PointCloud& a, const PointCloud& b,
                      MetricKind kind) {
  if (a.points.empty() || b.points.empty()) {
    throw config_error("cloud_distance: empty point cloud");
  }
  if (kind == MetricKind::cd) {
    // Eq.4 with each directed sum averaged over its own set size.
    KdTree ta(a.points), tb(b.points);
    double term_ab = 0.0;
    for (const Point3& p : a.points) {
      term_ab += tb.nearest(p).second;
    }
    double term_ba = 0.0;
    for (const Point3& p : b.points) {
      term_ba += ta.nearest(p).second;
    }
    return term_ab / static_cast<double>(a.points.size()) +
           term_ba / static_cast<double>(b.points.size());
  }
  Matching m = emd_exact(a.points, b.points, CostKind::unsquared);
  return m.cost / static_cast<double>(a.points.size());
}

double mmd(const std::vector<PointCloud>& samples,
           const std::vector<PointCloud>& reference, MetricKind kind) {
  if (samples.empty() || reference.empty()) {
    throw config_error("mmd: empty sample or reference set");
  }
  double acc = 0.0;
  for (const PointCloud& ref : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const PointCloud& s : samples) {
      best = std::min(best, cloud_distance(s, ref, kind));
    }
    acc += best;
  }
  return acc / static_cast<double>(reference.size());
}

double coverage(const std::vector<PointCloud>& samples,
                const std::vector<PointCloud>& reference, MetricKind kind) {
  if (samples.empty() || reference.empty()) {
    throw config_error("coverage: empty sample or reference set");
  }
  std::vector<char> covered(reference.size(), 0);
  for (const PointCloud& s : samples) {
    std::size_t best_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < reference.size(); ++r) {
      const double d = cloud_distance(s, reference[r], kind);
      if (d < best) {  // ties resolve to the lowest reference index
        best = d;
        best_idx = r;
      }
    }
    covered[best_idx] = 1;
  }
  std::size_t distinct = 0;
  for (char c : covered) {
    distinct += static_cast<std::size_t>(c);
  }
  return 100.0 * static_cast<double>(distinct) /
         static_cast<double>(reference.size());
}

EvalReport evaluate_generator(const CloudSampler& sampler,
                              const std::vector<PointCloud>& comparison,
                              int multiplier, int repeats, Rng& rng) {
  if (comparison.empty()) {
    throw config_error("evaluate_generator: empty comparison set");
  }
  if (multiplier < 1 || repeats < 1) {
    throw config_error("evaluate_generator: multiplier and repeats must be >= 1");
  }
  const VoxelHistogram comparison_hist = voxelize(comparison);
  EvalReport report;
  report.repeats = repeats;
  report.sample_multiplier = multiplier;
  for (int rep = 0; rep < repeats; ++rep) {
    std::vector<PointCloud> generated;
    const std::size_t count = comparison.size() * static_cast<std::size_t>(multiplier);
    generated.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      PointCloud cloud = sampler(rng);
      for (const Point3& p : cloud.points) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) ||
            !std::isfinite(p[2])) {
          throw numeric_error("evaluate_generator: non-finite point in repeat " +
                              std::to_string(rep + 1));
        }
      }
      generated.push_back(normalize(cloud));
    }
    report.jsd += jsd(voxelize(generated), comparison_hist);
    report.mmd_cd += mmd(generated, comparison, MetricKind::cd);
    report.mmd_emd += mmd(generated, comparison, MetricKind::emd);
    report.cov_cd += coverage(generated, comparison, MetricKind::cd);
    report.cov_emd += coverage(generated, comparison, MetricKind::emd);
  }
  report.jsd /= repeats;
  report.mmd_cd /= repeats;
  report.mmd_emd /= repeats;
  report.cov_cd /= repeats;
  report.cov_emd /= repeats;
  return report;
}

std::string format_report(const EvalReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "jsd=%.9g\nmmd_cd=%.9g\nmmd_emd=%.9g\ncov_cd=%.9g\n"
                "cov_emd=%.9g\nrepeats=%d\nsample_multiplier=%d\n",
                report.jsd, report.mmd_cd, report.mmd_emd, report.cov_cd,
                report.cov_emd, report.repeats, report.sample_multiplier);
  return std::string(buf);
}

}  // namespace pcgen
