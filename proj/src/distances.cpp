#include "pcgen/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist2(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

double pair_cost(const Point3& a, const Point3& b, CostKind kind) {
  const double d2 = dist2(a, b);
  return kind == CostKind::squared_halved ? 0.5 * d2 : std::sqrt(d2);
}

std::vector<double> cost_matrix(const std::vector<Point3>& s1,
                                const std::vector<Point3>& s2, CostKind kind) {
  const std::size_t n = s1.size();
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] = pair_cost(s1[i], s2[j], kind);
  return c;
}

double matched_cost(const std::vector<Point3>& s1,
                    const std::vector<Point3>& s2,
                    const std::vector<int>& perm, CostKind kind) {
  double total = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i)
    total += pair_cost(s1[i], s2[static_cast<std::size_t>(perm[i])], kind);
  return total;
}

}  // namespace

// Kuhn-Munkres in the potentials ("shortest augmenting path") formulation.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  // 1-indexed work arrays; p[j] = row matched to column j.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      const double* row =
          cost.data() + static_cast<std::size_t>(i0 - 1) * n;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = row[j - 1] - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] =
        j - 1;
  return row_to_col;
}

Matching emd_exact(const std::vector<Point3>& s1, const std::vector<Point3>& s2,
                   CostKind kind) {
  if (s1.size() != s2.size())
    throw shape_error("emd_exact: sizes differ (" + std::to_string(s1.size()) +
                      " vs " + std::to_string(s2.size()) + ")");
  if (s1.empty()) throw shape_error("emd_exact: empty sets");
  const int n = static_cast<int>(s1.size());
  Matching m;
  m.permutation = solve_assignment(cost_matrix(s1, s2, kind), n);
  m.cost = matched_cost(s1, s2, m.permutation, kind);
  return m;
}

// ------------------------------------------------------------ emd_approx

namespace {

// One log-domain Sinkhorn half-step: f_i = eps*log(a) - eps*LSE_j((g_j-C_ij)/eps).
void sinkhorn_rows(const std::vector<double>& c, int n, double eps,
                   double log_marginal, const std::vector<double>& g,
                   std::vector<double>& f) {
  for (int i = 0; i < n; ++i) {
    const double* row = c.data() + static_cast<std::size_t>(i) * n;
    double hi = -kInf;
    for (int j = 0; j < n; ++j)
      hi = std::max(hi, (g[static_cast<std::size_t>(j)] - row[j]) / eps);
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += std::exp((g[static_cast<std::size_t>(j)] - row[j]) / eps - hi);
    f[static_cast<std::size_t>(i)] = eps * (log_marginal - hi - std::log(acc));
  }
}

double row_marginal_residual(const std::vector<double>& c, int n, double eps,
                             const std::vector<double>& f,
                             const std::vector<double>& g) {
  // max_i |n * sum_j P_ij - 1| with P_ij = exp((f_i + g_j - C_ij)/eps) and
  // target row mass 1/n: the worst relative row-mass error. Column sums are
  // exact after every g update, so rows carry all the residual. Convergence
  // bar is 1e-3 (0.1% mass error) — far below what argmax rounding with
  // optimal conflict repair can notice, and reachable at small eps where the
  // tail of Sinkhorn crawls.
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = c.data() + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += std::exp((f[static_cast<std::size_t>(i)] +
                     g[static_cast<std::size_t>(j)] - row[j]) /
                    eps);
    worst = std::max(worst, std::fabs(n * s - 1.0));
  }
  return worst;
}

}  // namespace

Matching emd_approx(const std::vector<Point3>& s1,
                    const std::vector<Point3>& s2, CostKind kind,
                    double epsilon, int max_iters) {
  if (s1.size() != s2.size())
    throw shape_error("emd_approx: sizes differ (" + std::to_string(s1.size()) +
                      " vs " + std::to_string(s2.size()) + ")");
  if (s1.empty()) throw shape_error("emd_approx: empty sets");
  if (!(epsilon > 0.0)) throw config_error("emd_approx: epsilon must be > 0");
  const int n = static_cast<int>(s1.size());
  const auto c = cost_matrix(s1, s2, kind);

  const double mean_cost =
      std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  Matching m;
  m.permutation.resize(static_cast<std::size_t>(n));
  if (!(mean_cost > 0.0)) {
    // All pairwise costs zero: any bijection is optimal.
    std::iota(m.permutation.begin(), m.permutation.end(), 0);
    m.cost = 0.0;
    return m;
  }

  // The anneal floor sits a fixed factor below epsilon*mean so the rounding
  // sees the eps-level transport rather than its entropic blur; epsilon
  // remains the single accuracy knob (smaller -> colder -> tighter).
  const double eps_target = epsilon * mean_cost / 16.0;
  const double log_marginal = -std::log(static_cast<double>(n));
  std::vector<double> f(static_cast<std::size_t>(n), 0.0);
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);

  // Epsilon scaling: anneal from the cost scale down to the floor, then
  // polish there until the marginals close.
  int iters = 0;
  double residual = kInf;
  bool converged = false;
  for (double eps = std::max(eps_target, mean_cost);; eps = std::max(eps_target, eps * 0.25)) {
    const bool final_level = eps == eps_target;
    const int budget = final_level ? max_iters : std::min(30, max_iters);
    for (int it = 0; it < budget && iters < max_iters; ++it, ++iters) {
      sinkhorn_rows(c, n, eps, log_marginal, g, f);
      // Symmetric column update on the transposed matrix.
      for (int j = 0; j < n; ++j) {
        double hi = -kInf;
        for (int i = 0; i < n; ++i)
          hi = std::max(hi, (f[static_cast<std::size_t>(i)] -
                             c[static_cast<std::size_t>(i) * n + j]) /
                                eps);
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += std::exp((f[static_cast<std::size_t>(i)] -
                           c[static_cast<std::size_t>(i) * n + j]) /
                              eps -
                          hi);
        g[static_cast<std::size_t>(j)] =
            eps * (log_marginal - hi - std::log(acc));
      }
      if (final_level && it % 5 == 4) {
        residual = row_marginal_residual(c, n, eps, f, g);
        if (residual < 1e-3) {
          converged = true;
          break;
        }
      }
    }
    if (final_level || iters >= max_iters) break;
  }
  if (!converged) {
    residual = row_marginal_residual(c, n, eps_target, f, g);
    if (residual >= 1e-3)
      throw numeric_error(
          "emd_approx: sinkhorn did not converge in " +
          std::to_string(max_iters) +
          " iterations (marginal residual " + std::to_string(residual) + ")");
  }

  // Round: every row claims its plan argmax; unique claims stick, the rest
  // are completed optimally on the leftover submatrix.
  std::vector<int> claim(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double* row = c.data() + static_cast<std::size_t>(i) * n;
    int best_j = 0;
    double best = -kInf;
    for (int j = 0; j < n; ++j) {
      const double score = g[static_cast<std::size_t>(j)] - row[j];
      if (score > best) {
        best = score;
        best_j = j;
      }
    }
    claim[static_cast<std::size_t>(i)] = best_j;
  }
  std::vector<int> col_owner(static_cast<std::size_t>(n), -1);
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int j = claim[static_cast<std::size_t>(i)];
    if (col_owner[static_cast<std::size_t>(j)] < 0) {
      col_owner[static_cast<std::size_t>(j)] = i;
      assignment[static_cast<std::size_t>(i)] = j;
    }
  }
  std::vector<int> free_rows, free_cols;
  for (int i = 0; i < n; ++i)
    if (assignment[static_cast<std::size_t>(i)] < 0) free_rows.push_back(i);
  for (int j = 0; j < n; ++j)
    if (col_owner[static_cast<std::size_t>(j)] < 0) free_cols.push_back(j);
  if (!free_rows.empty()) {
    const int k = static_cast<int>(free_rows.size());
    std::vector<double> sub(static_cast<std::size_t>(k) * k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        sub[static_cast<std::size_t>(a) * k + b] =
            c[static_cast<std::size_t>(free_rows[static_cast<std::size_t>(a)]) *
                  n +
              free_cols[static_cast<std::size_t>(b)]];
    const auto repair = solve_assignment(sub, k);
    for (int a = 0; a < k; ++a)
      assignment[static_cast<std::size_t>(free_rows[static_cast<std::size_t>(a)])] =
          free_cols[static_cast<std::size_t>(repair[static_cast<std::size_t>(a)])];
  }

  // Local-search polish: pairwise swaps, then 3-cycle rotations, repeated
  // until a full sweep finds no improving move. Cleans up rows whose
  // first-come claims beat better-suited rivals to a column.
  auto at = [&](int i, int j) {
    return c[static_cast<std::size_t>(i) * n + j];
  };
  auto col = [&](int i) -> int& {
    return assignment[static_cast<std::size_t>(i)];
  };
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (int i = 0; i < n; ++i)
      for (int i2 = i + 1; i2 < n; ++i2) {
        const int j = col(i), j2 = col(i2);
        if (at(i, j2) + at(i2, j) - at(i, j) - at(i2, j2) < -1e-15) {
          std::swap(col(i), col(i2));
          improved = true;
        }
      }
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        if (i2 == i1) continue;
        for (int i3 = i2 + 1; i3 < n; ++i3) {
          if (i3 == i1) continue;
          const int j1 = col(i1), j2 = col(i2), j3 = col(i3);
          const double base = at(i1, j1) + at(i2, j2) + at(i3, j3);
          if (at(i1, j2) + at(i2, j3) + at(i3, j1) - base < -1e-15) {
            col(i1) = j2;
            col(i2) = j3;
            col(i3) = j1;
            improved = true;
          }
        }
      }
    if (!improved) break;
  }

  m.permutation = assignment;
  m.cost = matched_cost(s1, s2, m.permutation, kind);
  return m;
}

// --------------------------------------------------------------- k-d tree

KdTree::KdTree(const std::vector<Point3>& pts, int leaf_size)
    : pts_(&pts), leaf_size_(std::max(1, leaf_size)) {
  if (pts.empty()) throw shape_error("KdTree: empty point set");
  order_.resize(pts.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * pts.size() / static_cast<std::size_t>(leaf_size_) + 8);
  root_ = build(0, static_cast<int>(pts.size()));
}

int KdTree::build(int begin, int end) {
  Node nd;
  nd.begin = begin;
  nd.end = end;
  if (end - begin <= leaf_size_) {
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
  }
  // Split the widest axis at the median.
  double lo[3] = {kInf, kInf, kInf}, hi[3] = {-kInf, -kInf, -kInf};
  for (int t = begin; t < end; ++t) {
    const Point3& p = (*pts_)[static_cast<std::size_t>(order_[static_cast<std::size_t>(t)])];
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = k;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     return (*pts_)[static_cast<std::size_t>(a)][static_cast<std::size_t>(axis)] <
                            (*pts_)[static_cast<std::size_t>(b)][static_cast<std::size_t>(axis)];
                   });
  nd.axis = axis;
  nd.split = (*pts_)[static_cast<std::size_t>(order_[static_cast<std::size_t>(mid)])]
                    [static_cast<std::size_t>(axis)];
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(nd);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

void KdTree::search(int node, const Point3& q, int& best_i,
                    double& best_d2) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (nd.left < 0) {
    for (int t = nd.begin; t < nd.end; ++t) {
      const int idx = order_[static_cast<std::size_t>(t)];
      const double d2 = dist2((*pts_)[static_cast<std::size_t>(idx)], q);
      if (d2 < best_d2 || (d2 == best_d2 && idx < best_i)) {
        best_d2 = d2;
        best_i = idx;
      }
    }
    return;
  }
  const double delta = q[static_cast<std::size_t>(nd.axis)] - nd.split;
  const int near = delta < 0.0 ? nd.left : nd.right;
  const int far = delta < 0.0 ? nd.right : nd.left;
  search(near, q, best_i, best_d2);
  // Equal plane distance must still be searched: an equally distant point
  // with a lower index may sit on the far side.
  if (delta * delta <= best_d2) search(far, q, best_i, best_d2);
}

std::pair<int, double> KdTree::nearest(const Point3& q) const {
  int best_i = static_cast<int>(pts_->size());
  double best_d2 = kInf;
  search(root_, q, best_i, best_d2);
  return {best_i, best_d2};
}

// ---------------------------------------------------------------- chamfer

double chamfer(const std::vector<Point3>& s1, const std::vector<Point3>& s2) {
  if (s1.empty() || s2.empty()) throw shape_error("chamfer: empty set");
  const KdTree t2(s2);
  double total = 0.0;
  for (const Point3& x : s1) total += t2.nearest(x).second;
  const KdTree t1(s1);
  for (const Point3& y : s2) total += t1.nearest(y).second;
  return total;
}

// -------------------------------------------------------------- gradients

std::vector<Point3> emd_grad(const std::vector<Point3>& pred,
                             const std::vector<Point3>& target,
                             const Matching& matching, CostKind kind) {
  if (pred.size() != target.size() ||
      matching.permutation.size() != pred.size())
    throw shape_error("emd_grad: stale matching (sizes " +
                      std::to_string(pred.size()) + "/" +
                      std::to_string(target.size()) + "/" +
                      std::to_string(matching.permutation.size()) + ")");
  std::vector<Point3> grad(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Point3& x = pred[i];
    const Point3& y = target[static_cast<std::size_t>(matching.permutation[i])];
    if (kind == CostKind::squared_halved) {
      grad[i] = {x[0] - y[0], x[1] - y[1], x[2] - y[2]};
    } else {
      const double d = std::sqrt(dist2(x, y));
      if (d == 0.0)
        grad[i] = {0, 0, 0};  // subgradient at the coincident pair
      else
        grad[i] = {(x[0] - y[0]) / d, (x[1] - y[1]) / d, (x[2] - y[2]) / d};
    }
  }
  return grad;
}

std::vector<Point3> chamfer_grad(const std::vector<Point3>& pred,
                                 const std::vector<Point3>& target) {
  if (pred.empty() || target.empty())
    throw shape_error("chamfer_grad: empty set");
  std::vector<Point3> grad(pred.size(), {0, 0, 0});
  const KdTree ttar(target);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Point3& x = pred[i];
    const Point3& y = target[static_cast<std::size_t>(ttar.nearest(x).first)];
    for (int k = 0; k < 3; ++k) grad[i][k] += 2.0 * (x[k] - y[k]);
  }
  const KdTree tpred(pred);
  for (const Point3& y : target) {
    const int i = tpred.nearest(y).first;
    for (int k = 0; k < 3; ++k)
      grad[static_cast<std::size_t>(i)][k] += 2.0 * (pred[static_cast<std::size_t>(i)][k] - y[k]);
  }
  return grad;
}

// -------------------------------------------------------------- tape losses

namespace {

Tensor const_points(Tape& tape, const std::vector<Point3>& pts) {
  std::vector<double> flat;
  flat.reserve(pts.size() * 3);
  for (const Point3& p : pts) flat.insert(flat.end(), p.begin(), p.end());
  return tape.constant({static_cast<int>(pts.size()), 3}, std::move(flat));
}

}  // namespace

Tensor emd_loss(Tape& tape, Tensor pred, const std::vector<Point3>& target,
                const Matching& matching, CostKind kind) {
  const int n = pred.shape()[0];
  if (static_cast<std::size_t>(n) != target.size() ||
      matching.permutation.size() != target.size())
    throw shape_error("emd_loss: stale matching");
  std::vector<Point3> matched(target.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    matched[i] = target[static_cast<std::size_t>(matching.permutation[i])];
  Tensor diff = tape.sub(pred, const_points(tape, matched));
  Tensor per_point = tape.row_sum(tape.square(diff));  // {N}: ||x_i - y_i||^2
  if (kind == CostKind::squared_halved)
    return tape.scale(tape.sum(per_point), 0.5);
  return tape.sum(tape.sqrt(per_point));  // sqrt(0) has subgradient 0
}

Tensor chamfer_loss(Tape& tape, Tensor pred,
                    const std::vector<Point3>& target) {
  if (target.empty()) throw shape_error("chamfer_loss: empty target");
  const int n = pred.shape()[0];
  // Fixed correspondences from the current pred values.
  const auto& pv = pred.values();
  std::vector<Point3> pred_pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    pred_pts[static_cast<std::size_t>(i)] = {pv[static_cast<std::size_t>(3 * i)],
                                             pv[static_cast<std::size_t>(3 * i + 1)],
                                             pv[static_cast<std::size_t>(3 * i + 2)]};
  const KdTree ttar(target);
  std::vector<Point3> nn_of_pred(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    nn_of_pred[static_cast<std::size_t>(i)] =
        target[static_cast<std::size_t>(ttar.nearest(pred_pts[static_cast<std::size_t>(i)]).first)];
  const KdTree tpred(pred_pts);
  std::vector<int> nn_of_target(target.size());
  for (std::size_t j = 0; j < target.size(); ++j)
    nn_of_target[j] = tpred.nearest(target[j]).first;

  Tensor d1 = tape.sub(pred, const_points(tape, nn_of_pred));
  Tensor term1 = tape.sum(tape.square(d1));
  Tensor gathered = tape.gather_rows(pred, nn_of_target);
  Tensor d2 = tape.sub(gathered, const_points(tape, target));
  Tensor term2 = tape.sum(tape.square(d2));
  return tape.add(term1, term2);
}

}  // namespace pcgen
