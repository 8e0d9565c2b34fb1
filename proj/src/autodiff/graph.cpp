#include "r3/autodiff/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace r3::ad {

namespace {

void require(bool ok, Op op, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op_name(op)) + ": " + detail);
}

std::string both(const Matrix& a, const Matrix& b) {
  return shape_string(a) + " vs " + shape_string(b);
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix softmax_columns(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double m = z.col(c).maxCoeff();
    double total = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      out(r, c) = std::exp(z(r, c) - m);
      total += out(r, c);
    }
    out.col(c) /= total;
  }
  return out;
}

Matrix log_softmax_columns(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double m = z.col(c).maxCoeff();
    double total = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) total += std::exp(z(r, c) - m);
    const double lse = m + std::log(total);
    for (Eigen::Index r = 0; r < z.rows(); ++r) out(r, c) = z(r, c) - lse;
  }
  return out;
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Param: return "param";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::AddColumn: return "add_column";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::Tanh: return "tanh";
    case Op::Relu: return "relu";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sigmoid: return "sigmoid";
    case Op::SoftmaxCols: return "softmax_cols";
    case Op::LogSoftmaxCols: return "log_softmax_cols";
    case Op::ConcatCols: return "concat_cols";
    case Op::ConcatRows: return "concat_rows";
    case Op::MaxCols: return "max_cols";
    case Op::Transpose: return "transpose";
    case Op::SliceRows: return "slice_rows";
    case Op::SliceCols: return "slice_cols";
    case Op::Sum: return "sum";
    case Op::Pick: return "pick";
    case Op::NllPick: return "nll_pick";
    case Op::Lstm: return "lstm";
  }
  return "?";
}

Graph::Node& Graph::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("Var does not belong to this graph");
  return nodes_[v.id];
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("Var does not belong to this graph");
  return nodes_[v.id];
}

Graph::Node Graph::make(Op op, std::initializer_list<Var> inputs) const {
  Node n;
  n.op = op;
  for (Var v : inputs) {
    const Node& in = node(v);
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || in.requires_grad;
  }
  return n;
}

Var Graph::push(Node n) {
  if (!n.value.allFinite()) {
    throw std::runtime_error(std::string(op_name(n.op)) + ": produced a non-finite value");
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Matrix& Graph::value(Var v) const { return node(v).value; }

Matrix Graph::grad(Var v) const {
  const Node& n = node(v);
  if (n.reached && n.grad.size() == n.value.size()) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

double Graph::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) {
    throw ShapeError("scalar: expected 1x1, got " + shape_string(m));
  }
  return m(0, 0);
}

Var Graph::constant(Matrix value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(x.cols() == y.rows(), Op::MatMul, both(x, y));
  Node n = make(Op::MatMul, {a, b});
  n.value.noalias() = x * y;
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(x.rows() == y.rows() && x.cols() == y.cols(), Op::Add, both(x, y));
  Node n = make(Op::Add, {a, b});
  n.value = x + y;
  return push(std::move(n));
}

Var Graph::add_column(Var a, Var column) {
  const Matrix& x = value(a);
  const Matrix& c = value(column);
  require(c.cols() == 1 && c.rows() == x.rows(), Op::AddColumn, both(x, c));
  Node n = make(Op::AddColumn, {a, column});
  n.value = x.colwise() + c.col(0);
  return push(std::move(n));
}

Var Graph::sub(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(x.rows() == y.rows() && x.cols() == y.cols(), Op::Sub, both(x, y));
  Node n = make(Op::Sub, {a, b});
  n.value = x - y;
  return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(x.rows() == y.rows() && x.cols() == y.cols(), Op::Mul, both(x, y));
  Node n = make(Op::Mul, {a, b});
  n.value = x.cwiseProduct(y);
  return push(std::move(n));
}

Var Graph::scale(Var a, double factor) {
  Node n = make(Op::Scale, {a});
  n.factor = factor;
  n.value = value(a) * factor;
  return push(std::move(n));
}

Var Graph::tanh(Var a) {
  Node n = make(Op::Tanh, {a});
  n.value = value(a).array().tanh().matrix();
  return push(std::move(n));
}

Var Graph::relu(Var a) {
  Node n = make(Op::Relu, {a});
  n.value = value(a).cwiseMax(0.0);
  return push(std::move(n));
}

Var Graph::exp(Var a) {
  Node n = make(Op::Exp, {a});
  n.value = value(a).array().exp().matrix();
  return push(std::move(n));
}

Var Graph::log(Var a) {
  const Matrix& x = value(a);
  require((x.array() > 0.0).all(), Op::Log, "input must be strictly positive");
  Node n = make(Op::Log, {a});
  n.value = x.array().log().matrix();
  return push(std::move(n));
}

Var Graph::sigmoid(Var a) {
  Node n = make(Op::Sigmoid, {a});
  n.value = value(a).unaryExpr([](double v) { return sigmoid_scalar(v); });
  return push(std::move(n));
}

Var Graph::softmax_cols(Var a) {
  const Matrix& x = value(a);
  require(x.rows() > 0, Op::SoftmaxCols, "empty column");
  Node n = make(Op::SoftmaxCols, {a});
  n.value = softmax_columns(x);
  return push(std::move(n));
}

Var Graph::log_softmax_cols(Var a) {
  const Matrix& x = value(a);
  require(x.rows() > 0, Op::LogSoftmaxCols, "empty column");
  Node n = make(Op::LogSoftmaxCols, {a});
  n.value = log_softmax_columns(x);
  return push(std::move(n));
}

Var Graph::concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var Graph::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), Op::ConcatCols, "no inputs");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  Node n;
  n.op = Op::ConcatCols;
  for (Var v : parts) {
    const Matrix& x = value(v);
    require(x.rows() == rows, Op::ConcatCols, both(value(parts[0]), x));
    cols += x.cols();
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || node(v).requires_grad;
  }
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var v : parts) {
    const Matrix& x = value(v);
    n.value.middleCols(at, x.cols()) = x;
    at += x.cols();
  }
  return push(std::move(n));
}

Var Graph::concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}

Var Graph::concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), Op::ConcatRows, "no inputs");
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  Node n;
  n.op = Op::ConcatRows;
  for (Var v : parts) {
    const Matrix& x = value(v);
    require(x.cols() == cols, Op::ConcatRows, both(value(parts[0]), x));
    rows += x.rows();
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || node(v).requires_grad;
  }
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var v : parts) {
    const Matrix& x = value(v);
    n.value.middleRows(at, x.rows()) = x;
    at += x.rows();
  }
  return push(std::move(n));
}

Var Graph::max_cols(Var a) {
  const Matrix& x = value(a);
  require(x.cols() > 0, Op::MaxCols, "no columns");
  Node n = make(Op::MaxCols, {a});
  n.value.resize(x.rows(), 1);
  n.argmax.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < x.cols(); ++c) {
      if (x(r, c) > x(r, best)) best = c;
    }
    n.argmax[static_cast<std::size_t>(r)] = best;
    n.value(r, 0) = x(r, best);
  }
  return push(std::move(n));
}

Var Graph::transpose(Var a) {
  Node n = make(Op::Transpose, {a});
  n.value = value(a).transpose();
  return push(std::move(n));
}

Var Graph::slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  const Matrix& x = value(a);
  require(start >= 0 && count > 0 && start + count <= x.rows(), Op::SliceRows,
          "rows [" + std::to_string(start) + ", +" + std::to_string(count) + ") of " + shape_string(x));
  Node n = make(Op::SliceRows, {a});
  n.a0 = start;
  n.a1 = count;
  n.value = x.middleRows(start, count);
  return push(std::move(n));
}

Var Graph::slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  const Matrix& x = value(a);
  require(start >= 0 && count > 0 && start + count <= x.cols(), Op::SliceCols,
          "cols [" + std::to_string(start) + ", +" + std::to_string(count) + ") of " + shape_string(x));
  Node n = make(Op::SliceCols, {a});
  n.a0 = start;
  n.a1 = count;
  n.value = x.middleCols(start, count);
  return push(std::move(n));
}

Var Graph::sum(Var a) {
  Node n = make(Op::Sum, {a});
  n.value = Matrix::Constant(1, 1, value(a).sum());
  return push(std::move(n));
}

Var Graph::pick(Var a, Eigen::Index row, Eigen::Index col) {
  const Matrix& x = value(a);
  require(row >= 0 && row < x.rows() && col >= 0 && col < x.cols(), Op::Pick,
          "index (" + std::to_string(row) + "," + std::to_string(col) + ") outside " + shape_string(x));
  Node n = make(Op::Pick, {a});
  n.a0 = row;
  n.a1 = col;
  n.value = Matrix::Constant(1, 1, x(row, col));
  return push(std::move(n));
}

Var Graph::nll_pick(Var column, Eigen::Index k) {
  const Matrix& z = value(column);
  require(z.cols() == 1 && z.rows() > 0, Op::NllPick, "expected a column vector, got " + shape_string(z));
  require(k >= 0 && k < z.rows(), Op::NllPick,
          "index " + std::to_string(k) + " outside " + shape_string(z));
  Node n = make(Op::NllPick, {column});
  n.a0 = k;
  n.cache.push_back(softmax_columns(z));
  const Matrix logp = log_softmax_columns(z);
  n.value = Matrix::Constant(1, 1, -logp(k, 0));
  return push(std::move(n));
}

Var Graph::lstm(Var x, Var wx, Var wh, Var b, bool reverse) {
  const Matrix& X = value(x);
  const Matrix& Wx = value(wx);
  const Matrix& Wh = value(wh);
  const Matrix& B = value(b);
  const Eigen::Index h = Wh.cols();
  require(X.cols() > 0, Op::Lstm, "empty sequence");
  require(Wh.rows() == 4 * h, Op::Lstm, "recurrent weights must be 4h x h, got " + shape_string(Wh));
  require(Wx.rows() == 4 * h && Wx.cols() == X.rows(), Op::Lstm,
          "input weights " + shape_string(Wx) + " vs input " + shape_string(X));
  require(B.rows() == 4 * h && B.cols() == 1, Op::Lstm, "bias " + shape_string(B));

  Node n = make(Op::Lstm, {x, wx, wh, b});
  n.flag = reverse;
  const Eigen::Index T = X.cols();
  Matrix pre = Wx * X;
  pre.colwise() += B.col(0);

  Matrix gates(4 * h, T);   // post-activation i, f, g, o
  Matrix cells(h, T);
  Matrix tanh_cells(h, T);
  Matrix prev_h = Matrix::Zero(h, T);  // h_{t-1} as seen by step t
  Matrix prev_c = Matrix::Zero(h, T);
  n.value.resize(h, T);

  Eigen::VectorXd hs = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd z(4 * h);
  for (Eigen::Index s = 0; s < T; ++s) {
    const Eigen::Index t = reverse ? T - 1 - s : s;
    prev_h.col(t) = hs;
    prev_c.col(t) = cs;
    z.noalias() = pre.col(t) + Wh * hs;
    for (Eigen::Index r = 0; r < h; ++r) {
      const double ig = sigmoid_scalar(z(r));
      const double fg = sigmoid_scalar(z(h + r));
      const double gg = std::tanh(z(2 * h + r));
      const double og = sigmoid_scalar(z(3 * h + r));
      gates(r, t) = ig;
      gates(h + r, t) = fg;
      gates(2 * h + r, t) = gg;
      gates(3 * h + r, t) = og;
      cs(r) = fg * cs(r) + ig * gg;
      const double tc = std::tanh(cs(r));
      cells(r, t) = cs(r);
      tanh_cells(r, t) = tc;
      hs(r) = og * tc;
    }
    n.value.col(t) = hs;
  }
  n.cache = {std::move(gates), std::move(cells), std::move(tanh_cells), std::move(prev_h), std::move(prev_c)};
  return push(std::move(n));
}

void Graph::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.reached) {
    n.grad = g;
    n.reached = true;
  } else {
    n.grad += g;
  }
}

void Graph::backward(Var loss) {
  const Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + shape_string(l.value));
  }
  for (auto& n : nodes_) {
    n.reached = false;
    n.grad.resize(0, 0);
  }
  accumulate(loss.id, Matrix::Ones(1, 1));
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.reached) continue;
    backward_node(n);
  }
}

void Graph::backward_node(Node& n) {
  const Matrix& g = n.grad;
  auto in = [&](std::size_t k) -> const Matrix& { return nodes_[n.inputs[k]].value; };
  auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };

  switch (n.op) {
    case Op::Constant:
      break;
    case Op::Param:
      n.param->grad += g;
      break;
    case Op::MatMul:
      if (wants(0)) accumulate(n.inputs[0], g * in(1).transpose());
      if (wants(1)) accumulate(n.inputs[1], in(0).transpose() * g);
      break;
    case Op::Add:
      accumulate(n.inputs[0], g);
      accumulate(n.inputs[1], g);
      break;
    case Op::AddColumn:
      accumulate(n.inputs[0], g);
      if (wants(1)) accumulate(n.inputs[1], g.rowwise().sum());
      break;
    case Op::Sub:
      accumulate(n.inputs[0], g);
      if (wants(1)) accumulate(n.inputs[1], -g);
      break;
    case Op::Mul:
      if (wants(0)) accumulate(n.inputs[0], g.cwiseProduct(in(1)));
      if (wants(1)) accumulate(n.inputs[1], g.cwiseProduct(in(0)));
      break;
    case Op::Scale:
      accumulate(n.inputs[0], g * n.factor);
      break;
    case Op::Tanh:
      accumulate(n.inputs[0], g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
      break;
    case Op::Relu:
      accumulate(n.inputs[0], (in(0).array() > 0.0).select(g, 0.0));
      break;
    case Op::Exp:
      accumulate(n.inputs[0], g.cwiseProduct(n.value));
      break;
    case Op::Log:
      accumulate(n.inputs[0], g.cwiseQuotient(in(0)));
      break;
    case Op::Sigmoid:
      accumulate(n.inputs[0], g.cwiseProduct((n.value.array() * (1.0 - n.value.array())).matrix()));
      break;
    case Op::SoftmaxCols: {
      const Matrix& y = n.value;
      Matrix dz = y.cwiseProduct(g);
      const Eigen::RowVectorXd dots = dz.colwise().sum();
      dz -= y * dots.asDiagonal();
      accumulate(n.inputs[0], dz);
      break;
    }
    case Op::LogSoftmaxCols: {
      const Matrix y = n.value.array().exp().matrix();
      const Eigen::RowVectorXd totals = g.colwise().sum();
      accumulate(n.inputs[0], g - y * totals.asDiagonal());
      break;
    }
    case Op::ConcatCols: {
      Eigen::Index at = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Eigen::Index c = in(k).cols();
        if (wants(k)) accumulate(n.inputs[k], g.middleCols(at, c));
        at += c;
      }
      break;
    }
    case Op::ConcatRows: {
      Eigen::Index at = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Eigen::Index r = in(k).rows();
        if (wants(k)) accumulate(n.inputs[k], g.middleRows(at, r));
        at += r;
      }
      break;
    }
    case Op::MaxCols: {
      Matrix dx = Matrix::Zero(in(0).rows(), in(0).cols());
      for (Eigen::Index r = 0; r < dx.rows(); ++r) dx(r, n.argmax[static_cast<std::size_t>(r)]) = g(r, 0);
      accumulate(n.inputs[0], dx);
      break;
    }
    case Op::Transpose:
      accumulate(n.inputs[0], g.transpose());
      break;
    case Op::SliceRows: {
      Matrix dx = Matrix::Zero(in(0).rows(), in(0).cols());
      dx.middleRows(n.a0, n.a1) = g;
      accumulate(n.inputs[0], dx);
      break;
    }
    case Op::SliceCols: {
      Matrix dx = Matrix::Zero(in(0).rows(), in(0).cols());
      dx.middleCols(n.a0, n.a1) = g;
      accumulate(n.inputs[0], dx);
      break;
    }
    case Op::Sum:
      accumulate(n.inputs[0], Matrix::Constant(in(0).rows(), in(0).cols(), g(0, 0)));
      break;
    case Op::Pick: {
      Matrix dx = Matrix::Zero(in(0).rows(), in(0).cols());
      dx(n.a0, n.a1) = g(0, 0);
      accumulate(n.inputs[0], dx);
      break;
    }
    case Op::NllPick: {
      Matrix dz = n.cache[0];
      dz(n.a0, 0) -= 1.0;
      accumulate(n.inputs[0], dz * g(0, 0));
      break;
    }
    case Op::Lstm:
      backward_lstm(n);
      break;
  }
}

void Graph::backward_lstm(Node& n) {
  const Matrix& X = nodes_[n.inputs[0]].value;
  const Matrix& Wx = nodes_[n.inputs[1]].value;
  const Matrix& Wh = nodes_[n.inputs[2]].value;
  const Matrix& gates = n.cache[0];
  const Matrix& tanh_cells = n.cache[2];
  const Matrix& prev_h = n.cache[3];
  const Matrix& prev_c = n.cache[4];
  const Eigen::Index h = Wh.cols();
  const Eigen::Index T = X.cols();

  Matrix dz(4 * h, T);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  // Walk backwards through processing order.
  for (Eigen::Index s = T; s-- > 0;) {
    const Eigen::Index t = n.flag ? T - 1 - s : s;
    for (Eigen::Index r = 0; r < h; ++r) {
      const double ig = gates(r, t);
      const double fg = gates(h + r, t);
      const double gg = gates(2 * h + r, t);
      const double og = gates(3 * h + r, t);
      const double tc = tanh_cells(r, t);
      const double dh = n.grad(r, t) + dh_next(r);
      const double dc = dc_next(r) + dh * og * (1.0 - tc * tc);
      dz(r, t) = dc * gg * ig * (1.0 - ig);
      dz(h + r, t) = dc * prev_c(r, t) * fg * (1.0 - fg);
      dz(2 * h + r, t) = dc * ig * (1.0 - gg * gg);
      dz(3 * h + r, t) = dh * tc * og * (1.0 - og);
      dc_next(r) = dc * fg;
    }
    dh_next.noalias() = Wh.transpose() * dz.col(t);
  }
  if (nodes_[n.inputs[0]].requires_grad) accumulate(n.inputs[0], Wx.transpose() * dz);
  if (nodes_[n.inputs[1]].requires_grad) accumulate(n.inputs[1], dz * X.transpose());
  if (nodes_[n.inputs[2]].requires_grad) accumulate(n.inputs[2], dz * prev_h.transpose());
  if (nodes_[n.inputs[3]].requires_grad) accumulate(n.inputs[3], dz.rowwise().sum());
}

}  // namespace r3::ad
