#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

namespace pcgen {

class Tape;

// A named block of trainable parameters. Lives outside any tape; gradients
// accumulate here when a tape backward pass reaches a bound leaf.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string n, std::vector<int> s, std::vector<double> v);

  std::int64_t numel() const { return static_cast<std::int64_t>(value.size()); }
  void zero_grad();
};

// Handle to a node on a Tape. Cheap to copy; default-constructed handles are
// "undefined" and only valid for presence checks.
class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  const std::vector<int>& shape() const;
  std::int64_t numel() const;
  const std::vector<double>& values() const;
  double scalar() const;  // requires numel() == 1
  bool requires_grad() const;
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Tensor(Tape* t, int id) : tape_(t), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Gradients produced by one backward pass: node id -> grad node id.
struct BackwardResult {
  std::vector<int> grad_ids;
};

// Reverse-mode differentiation tape. Nodes are recorded in topological order
// (an op's inputs always precede it); backward walks ids in reverse, visiting
// each reached node exactly once. Backward emits its vector-Jacobian products
// as ordinary tape ops, so gradients are themselves differentiable and a
// second backward pass (e.g., through a gradient penalty) is exact.
//
// Shapes are rank-1 or rank-2; scalars are shape {1}. The only broadcasting
// is scalar-with-tensor in the binary elementwise ops.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Tensor constant(std::vector<int> shape, std::vector<double> data);
  Tensor constant_scalar(double v);
  Tensor leaf(Param& p);  // differentiable, bound; cached per tape
  Tensor variable(std::vector<int> shape, std::vector<double> data);

  // Elementwise; operands share a shape or one of them is a scalar.
  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor div(Tensor a, Tensor b);

  Tensor matmul(Tensor a, Tensor b);
  Tensor transpose(Tensor a);

  // Unary elementwise. relu'(0) and clamp' at the bounds are defined as 0;
  // sqrt uses subgradient 0 at exactly 0.
  Tensor relu(Tensor a);
  Tensor sigmoid(Tensor a);
  Tensor exp(Tensor a);
  Tensor log(Tensor a);  // domain error on non-positive input
  Tensor sqrt(Tensor a);
  Tensor square(Tensor a);
  Tensor scale(Tensor a, double c);
  Tensor clamp(Tensor a, double lo, double hi);

  // Reductions and their broadcast inverses.
  Tensor sum(Tensor a);                       // -> {1}
  Tensor row_sum(Tensor a);                   // {n,c} -> {n}
  Tensor col_sum(Tensor a);                   // {n,c} -> {c}
  Tensor mean(Tensor a);                      // sum / numel
  Tensor repeat_rows(Tensor v, int n);        // {c} -> {n,c}
  Tensor repeat_cols(Tensor v, int c);        // {n} -> {n,c}
  Tensor broadcast_scalar(Tensor s, std::vector<int> shape);

  // Column-wise max over the row axis with argmax routing (ties -> lowest
  // row index). The permutation-invariant pooling of the point encoder.
  Tensor max_over_rows(Tensor a);  // {n,c} -> {c}

  // Row indexing. gather duplicates allowed; scatter accumulates.
  Tensor gather_rows(Tensor a, std::vector<int> idx);
  Tensor scatter_rows(Tensor a, std::vector<int> idx, int n_rows);

  Tensor reshape(Tensor a, std::vector<int> shape);
  Tensor concat_rows(const std::vector<Tensor>& parts);

  // x:{n,c_in} * w:{c_in,c_out} + b:{c_out}, the same affine map applied to
  // every row.
  Tensor linear(Tensor x, Tensor w, Tensor b);

  // Runs a backward pass from a scalar loss. When accumulate_params is set,
  // gradients reaching bound leaves are added into Param::grad. Repeated
  // calls accumulate; zero_grad between steps is the caller's job.
  BackwardResult backward(Tensor loss, bool accumulate_params = true);

  // Gradient of the last backward() w.r.t. x; undefined Tensor if x was not
  // reached.
  Tensor grad_of(const BackwardResult& r, Tensor x) const;

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op : std::uint8_t {
    Constant, Leaf, Variable,
    Add, Sub, Mul, Div,
    MatMul, Transpose,
    Relu, Sigmoid, Exp, Log, Sqrt, Square, Scale, Clamp,
    Sum, RowSum, ColSum, RepeatRows, RepeatCols, BroadcastScalar,
    MaxOverRows, ExpandCols, SelectCols,
    GatherRows, ScatterRows, Reshape, ConcatRows,
  };

  struct Node {
    Op op;
    bool requires_grad = false;
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<int> parents;
    std::vector<int> aux;       // gather/scatter/argmax indices, concat offsets
    double c0 = 0.0, c1 = 0.0;  // scale factor / clamp bounds
    Param* param = nullptr;
  };

  friend class Tensor;

  Tensor expand_cols(Tensor v, const std::vector<int>& rows, int n);
  Tensor select_cols(Tensor a, const std::vector<int>& rows);

  int emit(Node n);
  Tensor wrap(int id) { return Tensor(this, id); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  Tensor binary(Op op, Tensor a, Tensor b);
  Tensor unary(Op op, Tensor a, double c0 = 0.0, double c1 = 0.0);
  void check_same_tape(const Tensor& t) const;
  // Appends each parent's grad contribution for node id given upstream g.
  void apply_vjp(int id, Tensor g, std::vector<int>& grad_ids);
  void accumulate(std::vector<int>& grad_ids, int target, Tensor contrib);

  // Deque so references into node values stay valid as ops are emitted.
  std::deque<Node> nodes_;
  std::unordered_map<const Param*, int> leaf_cache_;
};

std::string shape_str(const std::vector<int>& shape);

// Adam with bias correction. Defaults follow the training setup used across
// the models: alpha 1e-4, beta1 0.5, beta2 0.999, eps 1e-8.
struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// One update from p.grad. Throws numeric_error naming the block when the
// gradient is non-finite; p is untouched in that case.
void adam_step(Param& p, AdamState& s);

}  // namespace pcgen
