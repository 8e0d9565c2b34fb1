#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "r3/autodiff/tensor.hpp"

namespace r3::ad {

/// Handle to a node of a Graph. Only meaningful for the graph that made it.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

enum class Op {
  Constant,
  Param,
  MatMul,
  Add,
  AddColumn,  // a + b ⊗ e, b a column vector repeated across a's columns
  Sub,
  Mul,
  Scale,
  Tanh,
  Relu,
  Exp,
  Log,
  Sigmoid,
  SoftmaxCols,
  LogSoftmaxCols,
  ConcatCols,
  ConcatRows,
  MaxCols,  // row-wise max over columns (max pooling)
  Transpose,
  SliceRows,
  SliceCols,
  Sum,
  Pick,
  NllPick,  // -log softmax(z)[k] for a column vector z
  Lstm,     // one direction of an LSTM layer over a whole sequence
};

std::string_view op_name(Op op);

/// Tape of operations recorded in topological order. Each op computes its
/// value eagerly; `backward` walks the tape in reverse and accumulates into
/// the `grad` of every Parameter reached from the loss.
///
/// A Graph is single-threaded. Parameters are only read during the forward
/// pass, so several graphs may share a ParameterStore for evaluation.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  Var constant(Matrix value);
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_column(Var a, Var column);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var sigmoid(Var a);
  Var softmax_cols(Var a);
  Var log_softmax_cols(Var a);
  Var concat_cols(std::span<const Var> parts);
  Var concat_cols(std::initializer_list<Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var concat_rows(std::initializer_list<Var> parts);
  Var max_cols(Var a);
  Var transpose(Var a);
  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
  Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
  Var sum(Var a);
  Var pick(Var a, Eigen::Index row, Eigen::Index col);
  Var nll_pick(Var column, Eigen::Index k);

  /// LSTM over the columns of `x` (input_dim x T). Gate rows of `wx`, `wh`
  /// and `b` are ordered input, forget, cell, output. With `reverse` the
  /// sequence is consumed from the last column, but column t of the result is
  /// still the state at position t.
  Var lstm(Var x, Var wx, Var wh, Var b, bool reverse);

  const Matrix& value(Var v) const;
  /// Gradient of the last backward() loss with respect to v. Zero if v was
  /// not reached or does not depend on a parameter.
  Matrix grad(Var v) const;
  double scalar(Var v) const;

  /// Reverse pass from a 1x1 loss. Parameter grads are accumulated, not reset.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  Op op(Var v) const { return node(v).op; }

 private:
  struct Node {
    Op op = Op::Constant;
    std::vector<std::size_t> inputs;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool reached = false;
    Parameter* param = nullptr;
    Eigen::Index a0 = 0;
    Eigen::Index a1 = 0;
    double factor = 0.0;
    bool flag = false;
    std::vector<Eigen::Index> argmax;
    std::vector<Matrix> cache;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node n);
  Node make(Op op, std::initializer_list<Var> inputs) const;
  void accumulate(std::size_t id, const Matrix& g);
  void backward_node(Node& n);
  void backward_lstm(Node& n);

  std::vector<Node> nodes_;
};

}  // namespace r3::ad
