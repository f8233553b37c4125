#pragma once

// Independent reference implementations used only by tests. Deliberately
// naive (permutation search, O(N^2) scans, textbook formulas) so they share
// no code with the library paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using Point = std::array<double, 3>;

inline double dist2(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Central finite differences of a scalar function.
inline std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Worst per-component error; relative where the magnitude supports it,
// absolute below 1e-6.
inline double grad_err(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double num = std::fabs(a[i] - b[i]);
    const double den = std::max(std::fabs(a[i]), std::fabs(b[i]));
    worst = std::max(worst, den > 1e-6 ? num / den : num);
  }
  return worst;
}

enum class BruteCost { SquaredHalf, Euclid };

// Exact minimum-cost bijection by trying all permutations. N <= 8.
inline double brute_emd(const std::vector<Point>& a, const std::vector<Point>& b,
                        BruteCost kind) {
  const std::size_t n = a.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = dist2(a[i], b[static_cast<std::size_t>(perm[i])]);
      c += kind == BruteCost::SquaredHalf ? 0.5 * d2 : std::sqrt(d2);
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Chamfer distance, Eq.-4 form: summed squared nearest-neighbor distances in
// both directions.
inline double brute_chamfer(const std::vector<Point>& a,
                            const std::vector<Point>& b) {
  double total = 0.0;
  for (const Point& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& y : b) best = std::min(best, dist2(x, y));
    total += best;
  }
  for (const Point& y : b) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& x : a) best = std::min(best, dist2(y, x));
    total += best;
  }
  return total;
}

// Five-line scalar Adam: the reference for one parameter.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  long t = 0;
  double step(double w, double g, double alpha = 1e-4, double b1 = 0.5,
              double b2 = 0.999, double eps = 1e-8) {
    t += 1;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    return w - alpha * mhat / (std::sqrt(vhat) + eps);
  }
};

// Jensen-Shannon divergence between two normalized histograms, natural log,
// 0·log 0 = 0.
inline double jsd_ref(const std::vector<double>& p,
                      const std::vector<double>& q) {
  auto kl = [](const std::vector<double>& x, const std::vector<double>& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > 0.0) s += x[i] * std::log(x[i] / m[i]);
    return s;
  };
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl(p, m) + 0.5 * kl(q, m);
}

}  // namespace oracle
