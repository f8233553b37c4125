#include "pcgen/latent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

void check_dims(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw shape_error(std::string(what) + ": dimension mismatch (" +
                      std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double euclidean2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int hamming(const BinaryCode& a, const BinaryCode& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    d += a.bits[i] != b.bits[i];
  }
  return d;
}

// Full gallery ranking by (distance, index); dist(i) must be cheap to call
// repeatedly.
template <typename DistFn>
std::vector<int> rank_all(int n, DistFn dist) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist(a) < dist(b); });
  return order;
}

template <typename Code, typename DistFn>
double map_impl(const std::vector<Code>& queries,
                const std::vector<int>& query_labels,
                const std::vector<Code>& gallery,
                const std::vector<int>& gallery_labels, DistFn dist) {
  if (gallery.empty()) {
    throw config_error("retrieval_map: empty gallery");
  }
  if (queries.empty()) {
    throw config_error("retrieval_map: empty query set");
  }
  check_dims(queries.size(), query_labels.size(), "retrieval_map queries");
  check_dims(gallery.size(), gallery_labels.size(), "retrieval_map gallery");

  double ap_sum = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    // Exclude the query itself: the lowest-index exact duplicate, if any.
    int self = -1;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (gallery[g] == queries[q]) {
        self = static_cast<int>(g);
        break;
      }
    }
    std::vector<int> order = rank_all(
        static_cast<int>(gallery.size()),
        [&](int g) { return dist(queries[q], gallery[static_cast<std::size_t>(g)]); });

    int relevant_total = 0;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (static_cast<int>(g) != self &&
          gallery_labels[g] == query_labels[q]) {
        ++relevant_total;
      }
    }
    if (relevant_total == 0) {
      continue;  // contributes AP 0
    }
    int rank = 0, hits = 0;
    double ap = 0.0;
    for (int g : order) {
      if (g == self) {
        continue;
      }
      ++rank;
      if (gallery_labels[static_cast<std::size_t>(g)] == query_labels[q]) {
        ++hits;
        ap += static_cast<double>(hits) / rank;
      }
    }
    ap_sum += ap / relevant_total;
  }
  return ap_sum / static_cast<double>(queries.size());
}

}  // namespace

std::vector<std::vector<double>> interpolate(const std::vector<double>& z1,
                                             const std::vector<double>& z2,
                                             int steps) {
  check_dims(z1.size(), z2.size(), "interpolate");
  if (steps < 2) {
    throw config_error("interpolate: steps must be >= 2");
  }
  std::vector<std::vector<double>> path;
  path.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / (steps - 1);
    std::vector<double> z(z1.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = (1.0 - t) * z1[i] + t * z2[i];
    }
    path.push_back(std::move(z));
  }
  return path;
}

std::vector<double> arithmetic(const std::vector<double>& z_base,
                               const std::vector<double>& z_plus,
                               const std::vector<double>& z_minus) {
  check_dims(z_base.size(), z_plus.size(), "arithmetic");
  check_dims(z_base.size(), z_minus.size(), "arithmetic");
  std::vector<double> out(z_base.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = z_base[i] + z_plus[i] - z_minus[i];
  }
  return out;
}

BinaryCode binarize(const std::vector<double>& z, double threshold) {
  BinaryCode code;
  code.bits.reserve(z.size());
  for (double v : z) {
    if (!std::isfinite(v)) {
      throw numeric_error("binarize: non-finite code entry");
    }
    code.bits.push_back(v >= threshold ? 1 : 0);
  }
  return code;
}

std::vector<int> retrieve(const std::vector<double>& query,
                          const std::vector<std::vector<double>>& gallery,
                          int k) {
  if (gallery.empty()) {
    throw config_error("retrieve: empty gallery");
  }
  if (k < 1) {
    throw config_error("retrieve: k must be >= 1");
  }
  for (const auto& g : gallery) {
    check_dims(query.size(), g.size(), "retrieve");
  }
  std::vector<int> order = rank_all(
      static_cast<int>(gallery.size()),
      [&](int g) { return euclidean2(query, gallery[static_cast<std::size_t>(g)]); });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  return order;
}

std::vector<int> retrieve(const BinaryCode& query,
                          const std::vector<BinaryCode>& gallery, int k) {
  if (gallery.empty()) {
    throw config_error("retrieve: empty gallery");
  }
  if (k < 1) {
    throw config_error("retrieve: k must be >= 1");
  }
  for (const auto& g : gallery) {
    check_dims(query.bits.size(), g.bits.size(), "retrieve");
  }
  std::vector<int> order = rank_all(
      static_cast<int>(gallery.size()),
      [&](int g) { return hamming(query, gallery[static_cast<std::size_t>(g)]); });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  return order;
}

double retrieval_map(const std::vector<std::vector<double>>& queries,
                     const std::vector<int>& query_labels,
                     const std::vector<std::vector<double>>& gallery,
                     const std::vector<int>& gallery_labels) {
  return map_impl(queries, query_labels, gallery, gallery_labels,
                  [](const std::vector<double>& a, const std::vector<double>& b) {
                    return euclidean2(a, b);
                  });
}

double retrieval_map(const std::vector<BinaryCode>& queries,
                     const std::vector<int>& query_labels,
                     const std::vector<BinaryCode>& gallery,
                     const std::vector<int>& gallery_labels) {
  return map_impl(queries, query_labels, gallery, gallery_labels,
                  [](const BinaryCode& a, const BinaryCode& b) {
                    return hamming(a, b);
                  });
}

double linear_probe(const std::vector<std::vector<double>>& train_codes,
                    const std::vector<int>& train_labels,
                    const std::vector<std::vector<double>>& test_codes,
                    const std::vector<int>& test_labels) {
  check_dims(train_codes.size(), train_labels.size(), "linear_probe train");
  check_dims(test_codes.size(), test_labels.size(), "linear_probe test");
  if (train_codes.empty()) {
    throw config_error("linear_probe: empty training set");
  }
  std::vector<int> classes(train_labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) {
    throw config_error("linear_probe: need at least 2 training classes");
  }
  const std::size_t dim = train_codes.front().size();
  for (const auto& c : train_codes) {
    check_dims(dim, c.size(), "linear_probe train");
  }
  for (const auto& c : test_codes) {
    check_dims(dim, c.size(), "linear_probe test");
  }

  const std::size_t C = classes.size();
  const std::size_t n = train_codes.size();
  constexpr double kL2 = 1e-3;
  constexpr double kLr = 0.5;
  constexpr int kEpochs = 200;
  // Per class: dim weights + bias (bias unregularized).
  std::vector<std::vector<double>> w(C, std::vector<double>(dim + 1, 0.0));

  for (int epoch = 0; epoch < kEpochs; ++epoch) {
    std::vector<std::vector<double>> grad(C, std::vector<double>(dim + 1, 0.0));
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t d = 0; d < dim; ++d) {
        grad[c][d] = 2.0 * kL2 * w[c][d];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double>& x = train_codes[i];
      for (std::size_t c = 0; c < C; ++c) {
        const double s = train_labels[i] == classes[c] ? 1.0 : -1.0;
        double score = w[c][dim];
        for (std::size_t d = 0; d < dim; ++d) {
          score += w[c][d] * x[d];
        }
        if (s * score < 1.0) {  // hinge active
          const double coeff = -s / static_cast<double>(n);
          for (std::size_t d = 0; d < dim; ++d) {
            grad[c][d] += coeff * x[d];
          }
          grad[c][dim] += coeff;
        }
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t d = 0; d <= dim; ++d) {
        w[c][d] -= kLr * grad[c][d];
      }
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_codes.size(); ++i) {
    const std::vector<double>& x = test_codes[i];
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
      double score = w[c][dim];
      for (std::size_t d = 0; d < dim; ++d) {
        score += w[c][d] * x[d];
      }
      if (score > best_score) {  // strict: ties keep the lowest class index
        best_score = score;
        best = c;
      }
    }
    correct += classes[best] == test_labels[i];
  }
  return test_codes.empty()
             ? 0.0
             : static_cast<double>(correct) / static_cast<double>(test_codes.size());
}

int cluster_assign(const LatentCode& code) {
  if (!code.y.has_value() || code.y->empty()) {
    throw config_error("cluster_assign: code has no categorical head");
  }
  int best = 0;
  double best_v = (*code.y)[0];
  for (std::size_t i = 1; i < code.y->size(); ++i) {
    if ((*code.y)[i] > best_v) {  // strict: ties keep the lowest index
      best_v = (*code.y)[i];
      best = static_cast<int>(i);
    }
  }
  return best;
}

double cluster_purity(const std::vector<int>& assignments,
                      const std::vector<int>& labels) {
  check_dims(assignments.size(), labels.size(), "cluster_purity");
  if (assignments.empty()) {
    throw config_error("cluster_purity: empty input");
  }
  std::map<int, std::map<int, int>> counts;  // cluster -> label -> count
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    ++counts[assignments[i]][labels[i]];
  }
  long correct = 0;
  for (const auto& [cluster, by_label] : counts) {
    int best = 0;
    for (const auto& [label, count] : by_label) {
      best = std::max(best, count);
    }
    correct += best;
  }
  return static_cast<double>(correct) /
         static_cast<double>(assignments.size());
}

std::string codes_to_text(const std::vector<std::vector<double>>& codes) {
  std::string out;
  char buf[40];
  for (const auto& code : codes) {
    for (std::size_t i = 0; i < code.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", code[i]);
      if (i) {
        out += ' ';
      }
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string codes_to_text(const std::vector<BinaryCode>& codes) {
  std::string out;
  for (const auto& code : codes) {
    for (int b : code.bits) {
      out += b ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

}  // namespace pcgen
