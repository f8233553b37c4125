#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pcgen {

using Point3 = std::array<double, 3>;

struct PointCloud {
  std::vector<Point3> points;
  std::string label;  // optional class tag; empty = unlabeled

  int size() const { return static_cast<int>(points.size()); }
};

enum class SplitPart : std::uint8_t { train = 0, validation = 1, test = 2 };

struct Dataset {
  std::vector<PointCloud> clouds;
  // Parallel to clouds once split() ran; empty beforehand.
  std::vector<SplitPart> split;

  std::vector<int> part_indices(SplitPart part) const;
  std::vector<std::string> distinct_labels() const;  // sorted, unique
};

Dataset concat(const std::vector<Dataset>& parts);

// Centroid to the origin, then uniform scale so the farthest point sits at
// norm 0.5: every normalized cloud fits [-0.5, 0.5]^3. Errors on clouds whose
// points are all identical.
PointCloud normalize(const PointCloud& cloud);

// Stratified split per label with the largest-remainder rounding rule, so
// each class hits the requested fractions within one cloud. Deterministic in
// the seed. Fractions must be non-negative and sum to 1 within 1e-9.
Dataset split(const Dataset& dataset, std::array<double, 3> fractions,
              std::uint64_t seed);

inline Dataset split(const Dataset& dataset, std::uint64_t seed) {
  return split(dataset, {0.85, 0.05, 0.10}, seed);
}

// ASCII PLY, vertex properties x/y/z (extra scalar properties are ignored on
// load). save_ply writes 9 significant digits and a `comment label ...` line
// when the cloud is labeled; load_ply picks the label back up.
PointCloud load_ply(const std::string& path);
void save_ply(const PointCloud& cloud, const std::string& path);

// Procedural stand-ins for scanned object classes. `family` is one of
// sphere | box | torus | cylinder | chair (a multi-part composite of a seat,
// a back and four legs). Per-cloud dimensions are jittered by a factor drawn
// uniformly from [scale_min, scale_max] per parameter.
struct ShapeFamilySpec {
  std::string family = "sphere";
  double scale_min = 0.8;
  double scale_max = 1.2;
  int n_points = 256;
  std::uint64_t seed = 0;
};

// `count` clouds sampled uniformly by surface area, labeled with the family
// name, deterministic per (family, seed).
Dataset synth_generate(const ShapeFamilySpec& spec, int count);

}  // namespace pcgen
