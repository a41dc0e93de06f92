#pragma once

#include <vector>

#include "lvad/common.hpp"
#include "lvad/params.hpp"

namespace lvad {

// Handle into a Tape. Only valid for the tape that produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode differentiation tape over dense matrices.
//
// A forward pass records one node per operation; backward() runs the nodes in
// reverse and accumulates into Parameter::grad for every parameter leaf. The
// graph is rebuilt each step (dynamic recording). Every operation with a leaf
// on the tape has a gradient rule; there is no silent fallthrough.
class Tape {
 public:
  enum class Op : int {
    constant,
    parameter,
    add,
    sub,
    neg,
    mul,
    div,
    scale_const,
    add_const,
    matmul,
    matmul_nt,  // A * B^T
    transpose,
    row_dot,
    row_scale,
    col_scale_const,
    broadcast_col,
    broadcast_row,
    broadcast_scalar,
    row_sum,
    sum_all,
    mean_all,
    cosh_op,
    sinh_op,
    exp_op,
    log_op,
    sqrt_op,
    rsqrt_op,
    relu_op,
    logistic_op,
    sinhc_op,
    arcosh_clamped,
    softmax_rows,
    colwise_max_segments,
    segment_mean_rows,
    concat_cols,
    slice_cols,
    concat_rows,
    slice_rows,
    dropout,
  };

  static const char* op_name(Op op);

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reset();
  int size() const { return int(nodes_.size()); }

  // Leaves.
  Var constant(Mat value);
  Var parameter(Parameter& p);

  // Arithmetic.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var neg(Var a);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);
  Var transpose(Var a);
  Var row_dot(Var a, Var b);              // (R x C, R x C) -> R x 1
  Var row_scale(Var a, Var s);            // scales row i of a by s(i, 0)
  Var col_scale_const(Var a, Eigen::RowVectorXd c);

  // Broadcasts and reductions.
  Var broadcast_col(Var v, int cols);     // R x 1 -> R x cols
  Var broadcast_row(Var v, int rows);     // 1 x C -> rows x C
  Var broadcast_scalar(Var s, int rows, int cols);
  Var row_sum(Var a);                     // R x C -> R x 1
  Var sum_all(Var a);                     // -> 1 x 1
  Var mean_all(Var a);                    // -> 1 x 1

  // Elementwise nonlinearities.
  Var cosh(Var a);
  Var sinh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var sqrt(Var a);   // gradient guarded to 0 where the value vanishes
  Var rsqrt(Var a);  // x^(-1/2); domain x > 0
  Var relu(Var a);
  Var logistic(Var a);
  Var sinhc(Var a);  // sinh(x)/x with series branch below kExpBranchTol
  Var arcosh(Var a); // arcosh(max(x, 1)); gradient 0 at clamped arguments

  // Structured ops.
  Var softmax_rows(Var a);
  Var colwise_max_segments(Var a, int segment_rows);
  Var segment_mean_rows(Var a, int segment_rows);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var a, int start, int len);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_rows(Var a, int start, int len);
  // Inverted dropout with a caller-supplied keep mask already divided by the
  // keep probability. Evaluation mode simply omits the node.
  Var dropout(Var a, Mat scaled_mask);

  const Mat& val(Var v) const { return nodes_[check(v)].value; }
  double scalar(Var v) const;

  // Reverse pass from a 1x1 loss node. Fills Parameter::grad (accumulating,
  // so callers zero grads between steps).
  void backward(Var loss);

 private:
  struct Node {
    Op op;
    std::vector<int> in;
    Mat value;
    Mat grad;
    Mat aux;             // op-specific payload: masks, argmax, slice extents
    Eigen::RowVectorXd col_const;
    double c = 0.0;
    int i0 = 0, i1 = 0;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  int check(Var v) const;
  Var push(Node n);
  Var unary(Op op, Var a, Mat value);
  Mat& grad_of(int id, const Mat& shape_like);
  void check_finite(const Node& n) const;

  std::vector<Node> nodes_;
};

}  // namespace lvad
