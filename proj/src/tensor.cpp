#include "pcgen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

std::int64_t numel_of(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

bool is_scalar_shape(const std::vector<int>& shape) {
  return shape.size() == 1 && shape[0] == 1;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw shape_error(msg);
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "{";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "}";
}

Param::Param(std::string n, std::vector<int> s, std::vector<double> v)
    : name(std::move(n)), shape(std::move(s)), value(std::move(v)) {
  if (numel_of(shape) != static_cast<std::int64_t>(value.size()))
    throw shape_error("param '" + name + "': " + std::to_string(value.size()) +
                      " values for shape " + shape_str(shape));
  grad.assign(value.size(), 0.0);
}

void Param::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

const std::vector<int>& Tensor::shape() const { return tape_->node(id_).shape; }
std::int64_t Tensor::numel() const { return numel_of(shape()); }
const std::vector<double>& Tensor::values() const {
  return tape_->node(id_).value;
}
double Tensor::scalar() const {
  const auto& v = values();
  require(v.size() == 1, "scalar() on tensor of shape " + shape_str(shape()));
  return v[0];
}
bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

int Tape::emit(Node n) {
  if (numel_of(n.shape) != static_cast<std::int64_t>(n.value.size()))
    throw shape_error("node value size " + std::to_string(n.value.size()) +
                      " does not match shape " + shape_str(n.shape));
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_same_tape(const Tensor& t) const {
  require(t.defined() && t.tape() == this, "tensor belongs to another tape");
}

// ---------------------------------------------------------------- leaves

Tensor Tape::constant(std::vector<int> shape, std::vector<double> data) {
  Node n;
  n.op = Op::Constant;
  n.shape = std::move(shape);
  n.value = std::move(data);
  return wrap(emit(std::move(n)));
}

Tensor Tape::constant_scalar(double v) { return constant({1}, {v}); }

Tensor Tape::leaf(Param& p) {
  auto it = leaf_cache_.find(&p);
  if (it != leaf_cache_.end()) return wrap(it->second);
  Node n;
  n.op = Op::Leaf;
  n.requires_grad = true;
  n.shape = p.shape;
  n.value = p.value;
  n.param = &p;
  int id = emit(std::move(n));
  leaf_cache_.emplace(&p, id);
  return wrap(id);
}

Tensor Tape::variable(std::vector<int> shape, std::vector<double> data) {
  Node n;
  n.op = Op::Variable;
  n.requires_grad = true;
  n.shape = std::move(shape);
  n.value = std::move(data);
  return wrap(emit(std::move(n)));
}

// ----------------------------------------------------- elementwise binary

Tensor Tape::binary(Op op, Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.shape() != b.shape()) {
    if (is_scalar_shape(a.shape()))
      a = broadcast_scalar(a, b.shape());
    else if (is_scalar_shape(b.shape()))
      b = broadcast_scalar(b, a.shape());
    else
      throw shape_error("elementwise op on shapes " + shape_str(a.shape()) +
                        " and " + shape_str(b.shape()));
  }
  const auto& av = a.values();
  const auto& bv = b.values();
  Node n;
  n.op = op;
  n.requires_grad = a.requires_grad() || b.requires_grad();
  n.shape = a.shape();
  n.parents = {a.id(), b.id()};
  n.value.resize(av.size());
  switch (op) {
    case Op::Add:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
      break;
    case Op::Sub:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
      break;
    case Op::Mul:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
      break;
    case Op::Div:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] / bv[i];
      break;
    default:
      throw shape_error("binary(): bad op");
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::add(Tensor a, Tensor b) { return binary(Op::Add, a, b); }
Tensor Tape::sub(Tensor a, Tensor b) { return binary(Op::Sub, a, b); }
Tensor Tape::mul(Tensor a, Tensor b) { return binary(Op::Mul, a, b); }
Tensor Tape::div(Tensor a, Tensor b) { return binary(Op::Div, a, b); }

// ------------------------------------------------------------- matmul etc.

Tensor Tape::matmul(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  require(sa.size() == 2 && sb.size() == 2 && sa[1] == sb[0],
          "matmul on shapes " + shape_str(sa) + " and " + shape_str(sb));
  const int nr = sa[0], nk = sa[1], nc = sb[1];
  Node n;
  n.op = Op::MatMul;
  n.requires_grad = a.requires_grad() || b.requires_grad();
  n.shape = {nr, nc};
  n.parents = {a.id(), b.id()};
  n.value.assign(static_cast<std::size_t>(nr) * nc, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* out = n.value.data();
  for (int i = 0; i < nr; ++i) {
    const double* arow = av + static_cast<std::size_t>(i) * nk;
    double* orow = out + static_cast<std::size_t>(i) * nc;
    for (int k = 0; k < nk; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = bv + static_cast<std::size_t>(k) * nc;
      for (int j = 0; j < nc; ++j) orow[j] += aik * brow[j];
    }
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::transpose(Tensor a) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 2, "transpose on shape " + shape_str(s));
  const int nr = s[0], nc = s[1];
  Node n;
  n.op = Op::Transpose;
  n.requires_grad = a.requires_grad();
  n.shape = {nc, nr};
  n.parents = {a.id()};
  n.value.resize(a.values().size());
  const auto& av = a.values();
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      n.value[static_cast<std::size_t>(j) * nr + i] =
          av[static_cast<std::size_t>(i) * nc + j];
  return wrap(emit(std::move(n)));
}

// ------------------------------------------------------- unary elementwise

Tensor Tape::unary(Op op, Tensor a, double c0, double c1) {
  check_same_tape(a);
  Node n;
  n.op = op;
  n.requires_grad = a.requires_grad();
  n.shape = a.shape();
  n.parents = {a.id()};
  n.c0 = c0;
  n.c1 = c1;
  const auto& av = a.values();
  n.value.resize(av.size());
  switch (op) {
    case Op::Relu:
      for (std::size_t i = 0; i < av.size(); ++i)
        n.value[i] = av[i] > 0.0 ? av[i] : 0.0;
      break;
    case Op::Sigmoid:
      for (std::size_t i = 0; i < av.size(); ++i) {
        const double x = av[i];
        n.value[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
      }
      break;
    case Op::Exp:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = std::exp(av[i]);
      break;
    case Op::Log:
      for (std::size_t i = 0; i < av.size(); ++i) {
        if (!(av[i] > 0.0))
          throw numeric_error("log of non-positive value " +
                              std::to_string(av[i]));
        n.value[i] = std::log(av[i]);
      }
      break;
    case Op::Sqrt:
      for (std::size_t i = 0; i < av.size(); ++i) {
        if (av[i] < 0.0)
          throw numeric_error("sqrt of negative value " +
                              std::to_string(av[i]));
        n.value[i] = std::sqrt(av[i]);
      }
      break;
    case Op::Square:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * av[i];
      break;
    case Op::Scale:
      for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = c0 * av[i];
      break;
    case Op::Clamp:
      for (std::size_t i = 0; i < av.size(); ++i)
        n.value[i] = std::min(c1, std::max(c0, av[i]));
      break;
    default:
      throw shape_error("unary(): bad op");
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::relu(Tensor a) { return unary(Op::Relu, a); }
Tensor Tape::sigmoid(Tensor a) { return unary(Op::Sigmoid, a); }
Tensor Tape::exp(Tensor a) { return unary(Op::Exp, a); }
Tensor Tape::log(Tensor a) { return unary(Op::Log, a); }
Tensor Tape::sqrt(Tensor a) { return unary(Op::Sqrt, a); }
Tensor Tape::square(Tensor a) { return unary(Op::Square, a); }
Tensor Tape::scale(Tensor a, double c) { return unary(Op::Scale, a, c); }
Tensor Tape::clamp(Tensor a, double lo, double hi) {
  require(lo <= hi, "clamp with lo > hi");
  return unary(Op::Clamp, a, lo, hi);
}

// --------------------------------------------------- reductions/broadcasts

Tensor Tape::sum(Tensor a) {
  check_same_tape(a);
  Node n;
  n.op = Op::Sum;
  n.requires_grad = a.requires_grad();
  n.shape = {1};
  n.parents = {a.id()};
  n.value = {std::accumulate(a.values().begin(), a.values().end(), 0.0)};
  return wrap(emit(std::move(n)));
}

Tensor Tape::row_sum(Tensor a) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 2, "row_sum on shape " + shape_str(s));
  const int nr = s[0], nc = s[1];
  Node n;
  n.op = Op::RowSum;
  n.requires_grad = a.requires_grad();
  n.shape = {nr};
  n.parents = {a.id()};
  n.value.assign(nr, 0.0);
  const auto& av = a.values();
  for (int i = 0; i < nr; ++i) {
    double acc = 0.0;
    for (int j = 0; j < nc; ++j) acc += av[static_cast<std::size_t>(i) * nc + j];
    n.value[i] = acc;
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::col_sum(Tensor a) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 2, "col_sum on shape " + shape_str(s));
  const int nr = s[0], nc = s[1];
  Node n;
  n.op = Op::ColSum;
  n.requires_grad = a.requires_grad();
  n.shape = {nc};
  n.parents = {a.id()};
  n.value.assign(nc, 0.0);
  const auto& av = a.values();
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      n.value[j] += av[static_cast<std::size_t>(i) * nc + j];
  return wrap(emit(std::move(n)));
}

Tensor Tape::mean(Tensor a) {
  check_same_tape(a);
  require(a.numel() > 0, "mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor Tape::repeat_rows(Tensor v, int nr) {
  check_same_tape(v);
  const auto& s = v.shape();
  require(s.size() == 1 && nr > 0, "repeat_rows on shape " + shape_str(s));
  const int nc = s[0];
  Node n;
  n.op = Op::RepeatRows;
  n.requires_grad = v.requires_grad();
  n.shape = {nr, nc};
  n.parents = {v.id()};
  n.value.resize(static_cast<std::size_t>(nr) * nc);
  const auto& vv = v.values();
  for (int i = 0; i < nr; ++i)
    std::copy(vv.begin(), vv.end(),
              n.value.begin() + static_cast<std::size_t>(i) * nc);
  return wrap(emit(std::move(n)));
}

Tensor Tape::repeat_cols(Tensor v, int nc) {
  check_same_tape(v);
  const auto& s = v.shape();
  require(s.size() == 1 && nc > 0, "repeat_cols on shape " + shape_str(s));
  const int nr = s[0];
  Node n;
  n.op = Op::RepeatCols;
  n.requires_grad = v.requires_grad();
  n.shape = {nr, nc};
  n.parents = {v.id()};
  n.value.resize(static_cast<std::size_t>(nr) * nc);
  const auto& vv = v.values();
  for (int i = 0; i < nr; ++i)
    std::fill_n(n.value.begin() + static_cast<std::size_t>(i) * nc, nc, vv[i]);
  return wrap(emit(std::move(n)));
}

Tensor Tape::broadcast_scalar(Tensor s, std::vector<int> shape) {
  check_same_tape(s);
  require(is_scalar_shape(s.shape()),
          "broadcast_scalar on shape " + shape_str(s.shape()));
  Node n;
  n.op = Op::BroadcastScalar;
  n.requires_grad = s.requires_grad();
  n.value.assign(static_cast<std::size_t>(numel_of(shape)), s.values()[0]);
  n.shape = std::move(shape);
  n.parents = {s.id()};
  return wrap(emit(std::move(n)));
}

Tensor Tape::max_over_rows(Tensor a) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 2 && s[0] > 0, "max_over_rows on shape " + shape_str(s));
  const int nr = s[0], nc = s[1];
  Node n;
  n.op = Op::MaxOverRows;
  n.requires_grad = a.requires_grad();
  n.shape = {nc};
  n.parents = {a.id()};
  n.value.resize(nc);
  n.aux.resize(nc);
  const auto& av = a.values();
  for (int j = 0; j < nc; ++j) {
    double best = av[j];
    int arg = 0;
    for (int i = 1; i < nr; ++i) {
      const double v = av[static_cast<std::size_t>(i) * nc + j];
      if (v > best) {  // ties keep the lowest row index
        best = v;
        arg = i;
      }
    }
    n.value[j] = best;
    n.aux[j] = arg;
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::expand_cols(Tensor v, const std::vector<int>& rows, int nr) {
  check_same_tape(v);
  const auto& s = v.shape();
  require(s.size() == 1 && static_cast<int>(rows.size()) == s[0],
          "expand_cols on shape " + shape_str(s));
  const int nc = s[0];
  Node n;
  n.op = Op::ExpandCols;
  n.requires_grad = v.requires_grad();
  n.shape = {nr, nc};
  n.parents = {v.id()};
  n.aux = rows;
  n.value.assign(static_cast<std::size_t>(nr) * nc, 0.0);
  const auto& vv = v.values();
  for (int j = 0; j < nc; ++j) {
    require(rows[j] >= 0 && rows[j] < nr, "expand_cols row out of range");
    n.value[static_cast<std::size_t>(rows[j]) * nc + j] = vv[j];
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::select_cols(Tensor a, const std::vector<int>& rows) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 2 && static_cast<int>(rows.size()) == s[1],
          "select_cols on shape " + shape_str(s));
  const int nr = s[0], nc = s[1];
  Node n;
  n.op = Op::SelectCols;
  n.requires_grad = a.requires_grad();
  n.shape = {nc};
  n.parents = {a.id()};
  n.aux = rows;
  n.value.resize(nc);
  const auto& av = a.values();
  for (int j = 0; j < nc; ++j) {
    require(rows[j] >= 0 && rows[j] < nr, "select_cols row out of range");
    n.value[j] = av[static_cast<std::size_t>(rows[j]) * nc + j];
  }
  return wrap(emit(std::move(n)));
}

Tensor Tape::gather_rows(Tensor a, std::vector<int> idx) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 1 || s.size() == 2,
          "gather_rows on shape " + shape_str(s));
  const int nr = s[0];
  const int nc = s.size() == 2 ? s[1] : 1;
  const int m = static_cast<int>(idx.size());
  Node n;
  n.op = Op::GatherRows;
  n.requires_grad = a.requires_grad();
  n.shape = s.size() == 2 ? std::vector<int>{m, nc} : std::vector<int>{m};
  n.parents = {a.id()};
  n.value.resize(static_cast<std::size_t>(m) * nc);
  const auto& av = a.values();
  for (int i = 0; i < m; ++i) {
    require(idx[i] >= 0 && idx[i] < nr, "gather_rows index out of range");
    std::copy_n(av.begin() + static_cast<std::size_t>(idx[i]) * nc, nc,
                n.value.begin() + static_cast<std::size_t>(i) * nc);
  }
  n.aux = std::move(idx);
  return wrap(emit(std::move(n)));
}

Tensor Tape::scatter_rows(Tensor a, std::vector<int> idx, int n_rows) {
  check_same_tape(a);
  const auto& s = a.shape();
  require(s.size() == 1 || s.size() == 2,
          "scatter_rows on shape " + shape_str(s));
  const int m = s[0];
  const int nc = s.size() == 2 ? s[1] : 1;
  require(static_cast<int>(idx.size()) == m,
          "scatter_rows: index count does not match rows");
  Node n;
  n.op = Op::ScatterRows;
  n.requires_grad = a.requires_grad();
  n.shape = s.size() == 2 ? std::vector<int>{n_rows, nc}
                          : std::vector<int>{n_rows};
  n.parents = {a.id()};
  n.value.assign(static_cast<std::size_t>(n_rows) * nc, 0.0);
  const auto& av = a.values();
  for (int i = 0; i < m; ++i) {
    require(idx[i] >= 0 && idx[i] < n_rows, "scatter_rows index out of range");
    for (int j = 0; j < nc; ++j)
      n.value[static_cast<std::size_t>(idx[i]) * nc + j] +=
          av[static_cast<std::size_t>(i) * nc + j];
  }
  n.aux = std::move(idx);
  return wrap(emit(std::move(n)));
}

Tensor Tape::reshape(Tensor a, std::vector<int> shape) {
  check_same_tape(a);
  require(numel_of(shape) == a.numel(),
          "reshape " + shape_str(a.shape()) + " -> " + shape_str(shape));
  Node n;
  n.op = Op::Reshape;
  n.requires_grad = a.requires_grad();
  n.shape = std::move(shape);
  n.parents = {a.id()};
  n.value = a.values();
  return wrap(emit(std::move(n)));
}

Tensor Tape::concat_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows of nothing");
  const auto& s0 = parts.front().shape();
  const std::size_t rank = s0.size();
  require(rank == 1 || rank == 2, "concat_rows on shape " + shape_str(s0));
  const int nc = rank == 2 ? s0[1] : 1;
  Node n;
  n.op = Op::ConcatRows;
  int total = 0;
  for (const Tensor& p : parts) {
    check_same_tape(p);
    const auto& s = p.shape();
    require(s.size() == rank && (rank == 1 || s[1] == nc),
            "concat_rows on mismatched shapes " + shape_str(s0) + " and " +
                shape_str(s));
    n.requires_grad = n.requires_grad || p.requires_grad();
    n.parents.push_back(p.id());
    n.aux.push_back(total);  // row offset of this part
    total += s[0];
  }
  n.shape = rank == 2 ? std::vector<int>{total, nc} : std::vector<int>{total};
  n.value.reserve(static_cast<std::size_t>(total) * nc);
  for (const Tensor& p : parts)
    n.value.insert(n.value.end(), p.values().begin(), p.values().end());
  return wrap(emit(std::move(n)));
}

Tensor Tape::linear(Tensor x, Tensor w, Tensor b) {
  Tensor y = matmul(x, w);
  return add(y, repeat_rows(b, y.shape()[0]));
}

// ---------------------------------------------------------------- backward

void Tape::accumulate(std::vector<int>& grad_ids, int target, Tensor contrib) {
  if (!node(target).requires_grad) return;
  if (grad_ids[target] < 0)
    grad_ids[target] = contrib.id();
  else
    grad_ids[target] = add(wrap(grad_ids[target]), contrib).id();
}

void Tape::apply_vjp(int id, Tensor g, std::vector<int>& grad_ids) {
  // Copy: emitting vjp nodes may reallocate nodes_.
  const Node nd = node(id);
  const auto& par = nd.parents;
  switch (nd.op) {
    case Op::Constant:
    case Op::Leaf:
    case Op::Variable:
      break;
    case Op::Add:
      accumulate(grad_ids, par[0], g);
      accumulate(grad_ids, par[1], g);
      break;
    case Op::Sub:
      accumulate(grad_ids, par[0], g);
      accumulate(grad_ids, par[1], scale(g, -1.0));
      break;
    case Op::Mul:
      accumulate(grad_ids, par[0], mul(g, wrap(par[1])));
      accumulate(grad_ids, par[1], mul(g, wrap(par[0])));
      break;
    case Op::Div: {
      Tensor b = wrap(par[1]);
      accumulate(grad_ids, par[0], div(g, b));
      accumulate(grad_ids, par[1], scale(mul(g, div(wrap(id), b)), -1.0));
      break;
    }
    case Op::MatMul:
      accumulate(grad_ids, par[0], matmul(g, transpose(wrap(par[1]))));
      accumulate(grad_ids, par[1], matmul(transpose(wrap(par[0])), g));
      break;
    case Op::Transpose:
      accumulate(grad_ids, par[0], transpose(g));
      break;
    case Op::Relu: {
      const auto& xv = node(par[0]).value;
      std::vector<double> m(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i) m[i] = xv[i] > 0.0 ? 1.0 : 0.0;
      accumulate(grad_ids, par[0], mul(g, constant(nd.shape, std::move(m))));
      break;
    }
    case Op::Sigmoid: {
      Tensor y = wrap(id);
      Tensor one_minus = sub(constant_scalar(1.0), y);
      accumulate(grad_ids, par[0], mul(g, mul(y, one_minus)));
      break;
    }
    case Op::Exp:
      accumulate(grad_ids, par[0], mul(g, wrap(id)));
      break;
    case Op::Log:
      accumulate(grad_ids, par[0], div(g, wrap(par[0])));
      break;
    case Op::Sqrt: {
      // Subgradient 0 exactly at 0: mask the term and pad the denominator
      // so no division by zero ever happens.
      const auto& xv = node(par[0]).value;
      std::vector<double> mask(xv.size()), pad(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i) {
        mask[i] = xv[i] > 0.0 ? 1.0 : 0.0;
        pad[i] = xv[i] > 0.0 ? 0.0 : 1.0;
      }
      Tensor denom = add(scale(wrap(id), 2.0), constant(nd.shape, std::move(pad)));
      accumulate(grad_ids, par[0],
                 mul(div(g, denom), constant(nd.shape, std::move(mask))));
      break;
    }
    case Op::Square:
      accumulate(grad_ids, par[0], mul(g, scale(wrap(par[0]), 2.0)));
      break;
    case Op::Scale:
      accumulate(grad_ids, par[0], scale(g, nd.c0));
      break;
    case Op::Clamp: {
      const auto& xv = node(par[0]).value;
      std::vector<double> m(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i)
        m[i] = (xv[i] > nd.c0 && xv[i] < nd.c1) ? 1.0 : 0.0;
      accumulate(grad_ids, par[0], mul(g, constant(nd.shape, std::move(m))));
      break;
    }
    case Op::Sum:
      accumulate(grad_ids, par[0], broadcast_scalar(g, node(par[0]).shape));
      break;
    case Op::RowSum:
      accumulate(grad_ids, par[0], repeat_cols(g, node(par[0]).shape[1]));
      break;
    case Op::ColSum:
      accumulate(grad_ids, par[0], repeat_rows(g, node(par[0]).shape[0]));
      break;
    case Op::RepeatRows:
      accumulate(grad_ids, par[0], col_sum(g));
      break;
    case Op::RepeatCols:
      accumulate(grad_ids, par[0], row_sum(g));
      break;
    case Op::BroadcastScalar:
      accumulate(grad_ids, par[0], sum(g));
      break;
    case Op::MaxOverRows:
      accumulate(grad_ids, par[0],
                 expand_cols(g, nd.aux, node(par[0]).shape[0]));
      break;
    case Op::ExpandCols:
      accumulate(grad_ids, par[0], select_cols(g, nd.aux));
      break;
    case Op::SelectCols:
      accumulate(grad_ids, par[0],
                 expand_cols(g, nd.aux, node(par[0]).shape[0]));
      break;
    case Op::GatherRows:
      accumulate(grad_ids, par[0],
                 scatter_rows(g, nd.aux, node(par[0]).shape[0]));
      break;
    case Op::ScatterRows:
      accumulate(grad_ids, par[0], gather_rows(g, nd.aux));
      break;
    case Op::Reshape:
      accumulate(grad_ids, par[0], reshape(g, node(par[0]).shape));
      break;
    case Op::ConcatRows:
      for (std::size_t p = 0; p < par.size(); ++p) {
        const int off = nd.aux[p];
        const int rows = node(par[p]).shape[0];
        std::vector<int> idx(rows);
        std::iota(idx.begin(), idx.end(), off);
        accumulate(grad_ids, par[p], gather_rows(g, std::move(idx)));
      }
      break;
  }
}

BackwardResult Tape::backward(Tensor loss, bool accumulate_params) {
  check_same_tape(loss);
  require(loss.numel() == 1,
          "backward from non-scalar of shape " + shape_str(loss.shape()));
  const int n0 = size();
  BackwardResult r;
  r.grad_ids.assign(n0, -1);
  if (!loss.requires_grad()) return r;
  r.grad_ids[loss.id()] = constant_scalar(1.0).id();
  for (int id = loss.id(); id >= 0; --id) {
    if (r.grad_ids[id] < 0) continue;
    if (!node(id).requires_grad) continue;
    apply_vjp(id, wrap(r.grad_ids[id]), r.grad_ids);
  }
  if (accumulate_params) {
    for (int id = 0; id < n0; ++id) {
      if (node(id).op != Op::Leaf || r.grad_ids[id] < 0) continue;
      Param* p = node(id).param;
      const auto& gv = node(r.grad_ids[id]).value;
      for (std::size_t i = 0; i < gv.size(); ++i) p->grad[i] += gv[i];
    }
  }
  return r;
}

Tensor Tape::grad_of(const BackwardResult& r, Tensor x) const {
  if (!x.defined() || x.tape() != this) return {};
  if (x.id() >= static_cast<int>(r.grad_ids.size())) return {};
  const int gid = r.grad_ids[x.id()];
  if (gid < 0) return {};
  return Tensor(const_cast<Tape*>(this), gid);
}

// -------------------------------------------------------------------- adam

void adam_step(Param& p, AdamState& s) {
  const std::size_t n = p.value.size();
  if (s.m.size() != n) {
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(p.grad[i]))
      throw numeric_error("non-finite gradient in parameter block '" + p.name +
                          "'");
  s.step += 1;
  const double b1 = s.cfg.beta1, b2 = s.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = p.grad[i];
    s.m[i] = b1 * s.m[i] + (1.0 - b1) * g;
    s.v[i] = b2 * s.v[i] + (1.0 - b2) * g * g;
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    p.value[i] -= s.cfg.alpha * mhat / (std::sqrt(vhat) + s.cfg.eps);
  }
}

}  // namespace pcgen
