#pragma once

#include <string>
#include <vector>

#include "pcgen/networks.hpp"

namespace pcgen {

// Thresholded latent code; every entry is exactly 0 or 1.
struct BinaryCode {
  std::vector<int> bits;

  bool operator==(const BinaryCode& o) const { return bits == o.bits; }
};

// Linear path z(t) = (1-t)*z1 + t*z2 at t = k/(steps-1) for k = 0..steps-1.
// Endpoints are reproduced exactly.
std::vector<std::vector<double>> interpolate(const std::vector<double>& z1,
                                             const std::vector<double>& z2,
                                             int steps);

// Elementwise z_base + z_plus - z_minus.
std::vector<double> arithmetic(const std::vector<double>& z_base,
                               const std::vector<double>& z_plus,
                               const std::vector<double>& z_minus);

// bit i = 1 iff z_i >= threshold.
BinaryCode binarize(const std::vector<double>& z, double threshold = 0.5);

// Gallery indices ranked nearest-first; continuous codes use Euclidean
// distance, binary codes Hamming distance. Distance ties break toward the
// lower gallery index. Returns min(k, gallery size) indices.
std::vector<int> retrieve(const std::vector<double>& query,
                          const std::vector<std::vector<double>>& gallery,
                          int k);
std::vector<int> retrieve(const BinaryCode& query,
                          const std::vector<BinaryCode>& gallery, int k);

// Mean average precision; AP per query = mean of precision@rank over the
// ranks of relevant (same-label) gallery items in the full ranking. For each
// query the single lowest-index gallery entry exactly equal to the query is
// excluded as the query itself. Queries with no relevant items contribute 0.
double retrieval_map(const std::vector<std::vector<double>>& queries,
                     const std::vector<int>& query_labels,
                     const std::vector<std::vector<double>>& gallery,
                     const std::vector<int>& gallery_labels);
double retrieval_map(const std::vector<BinaryCode>& queries,
                     const std::vector<int>& query_labels,
                     const std::vector<BinaryCode>& gallery,
                     const std::vector<int>& gallery_labels);

// One-vs-rest linear classifier: hinge loss + L2 1e-3 on the weights, 200
// epochs of full-batch gradient descent from zero init (deterministic).
// Returns accuracy on the test codes.
double linear_probe(const std::vector<std::vector<double>>& train_codes,
                    const std::vector<int>& train_labels,
                    const std::vector<std::vector<double>>& test_codes,
                    const std::vector<int>& test_labels);

// argmax of the categorical head; ties -> lowest index.
int cluster_assign(const LatentCode& code);

// Majority-vote purity: each cluster is labeled with its most common true
// label; purity = fraction of items matching their cluster's label.
double cluster_purity(const std::vector<int>& assignments,
                      const std::vector<int>& labels);

// Text export: one line per code; space-separated floats, or a contiguous
// 0/1 string for binary codes.
std::string codes_to_text(const std::vector<std::vector<double>>& codes);
std::string codes_to_text(const std::vector<BinaryCode>& codes);

}  // namespace pcgen
