#pragma once

#include <utility>
#include <vector>

#include "pcgen/pointcloud.hpp"
#include "pcgen/tensor.hpp"

namespace pcgen {

// Transport cost per matched pair: 0.5*||x-y||^2 or plain ||x-y||.
enum class CostKind { squared_halved, unsquared };

struct Matching {
  std::vector<int> permutation;  // index i in s1 -> partner in s2
  double cost = 0.0;
};

// Globally optimal assignment (Kuhn-Munkres on the pairwise cost matrix).
// Requires |s1| == |s2|.
Matching emd_exact(const std::vector<Point3>& s1, const std::vector<Point3>& s2,
                   CostKind kind);

// Entropic-regularized transport (log-domain Sinkhorn with epsilon scaling),
// rounded to a feasible assignment by row-argmax with optimal repair of
// conflicts. `epsilon` is relative: the regularizer is epsilon * mean
// pairwise cost, which makes the knob scale-free. The returned cost is the
// rounded assignment's cost, so it can never undercut emd_exact. Errors with
// the last marginal residual if Sinkhorn fails to converge in max_iters.
Matching emd_approx(const std::vector<Point3>& s1,
                    const std::vector<Point3>& s2, CostKind kind,
                    double epsilon, int max_iters = 2000);

// Summed squared nearest-neighbor distance, both directions (sizes may
// differ). Nearest neighbors via exact median-split k-d trees.
double chamfer(const std::vector<Point3>& s1, const std::vector<Point3>& s2);

// Gradient of the matched EMD cost w.r.t. pred, with the matching held
// fixed. Unsquared cost uses subgradient 0 for coincident pairs.
std::vector<Point3> emd_grad(const std::vector<Point3>& pred,
                             const std::vector<Point3>& target,
                             const Matching& matching, CostKind kind);

// Gradient of chamfer(pred, target) w.r.t. pred with both sets of nearest-
// neighbor correspondences held fixed (envelope rule).
std::vector<Point3> chamfer_grad(const std::vector<Point3>& pred,
                                 const std::vector<Point3>& target);

// Tape-level losses for training: the same fixed-correspondence treatment as
// the closed-form gradients above, but differentiable end to end.
Tensor emd_loss(Tape& tape, Tensor pred, const std::vector<Point3>& target,
                const Matching& matching, CostKind kind);
Tensor chamfer_loss(Tape& tape, Tensor pred,
                    const std::vector<Point3>& target);

// Exact nearest neighbor over a fixed point set; equal distances resolve to
// the lowest point index.
class KdTree {
 public:
  explicit KdTree(const std::vector<Point3>& pts, int leaf_size = 16);
  // Returns (point index, squared distance).
  std::pair<int, double> nearest(const Point3& q) const;

 private:
  struct Node {
    int axis = 0;
    double split = 0.0;
    int left = -1, right = -1;  // -1 marks a leaf
    int begin = 0, end = 0;     // leaf range into order_
  };
  int build(int begin, int end);
  void search(int node, const Point3& q, int& best_i, double& best_d2) const;

  const std::vector<Point3>* pts_;
  int leaf_size_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Optimal row->column assignment minimizing total cost over an n x n matrix
// (row-major). Building block for emd_exact and the approximation repair.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

}  // namespace pcgen
