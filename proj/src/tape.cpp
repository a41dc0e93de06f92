#include "lvad/tape.hpp"

#include <cmath>

#include "lvad/geometry.hpp"

namespace lvad {

namespace {
constexpr double kSqrtGradGuard = 1e-15;
}

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::constant: return "constant";
    case Op::parameter: return "parameter";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::neg: return "neg";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::scale_const: return "scale_const";
    case Op::add_const: return "add_const";
    case Op::matmul: return "matmul";
    case Op::matmul_nt: return "matmul_nt";
    case Op::transpose: return "transpose";
    case Op::row_dot: return "row_dot";
    case Op::row_scale: return "row_scale";
    case Op::col_scale_const: return "col_scale_const";
    case Op::broadcast_col: return "broadcast_col";
    case Op::broadcast_row: return "broadcast_row";
    case Op::broadcast_scalar: return "broadcast_scalar";
    case Op::row_sum: return "row_sum";
    case Op::sum_all: return "sum_all";
    case Op::mean_all: return "mean_all";
    case Op::cosh_op: return "cosh";
    case Op::sinh_op: return "sinh";
    case Op::exp_op: return "exp";
    case Op::log_op: return "log";
    case Op::sqrt_op: return "sqrt";
    case Op::rsqrt_op: return "rsqrt";
    case Op::relu_op: return "relu";
    case Op::logistic_op: return "logistic";
    case Op::sinhc_op: return "sinhc";
    case Op::arcosh_clamped: return "arcosh";
    case Op::softmax_rows: return "softmax_rows";
    case Op::colwise_max_segments: return "colwise_max_segments";
    case Op::segment_mean_rows: return "segment_mean_rows";
    case Op::concat_cols: return "concat_cols";
    case Op::slice_cols: return "slice_cols";
    case Op::concat_rows: return "concat_rows";
    case Op::slice_rows: return "slice_rows";
    case Op::dropout: return "dropout";
  }
  return "?";
}

void Tape::reset() { nodes_.clear(); }

int Tape::check(Var v) const {
  require(v.id >= 0 && v.id < int(nodes_.size()), Errc::invalid_argument,
          "variable does not belong to this tape");
  return v.id;
}

void Tape::check_finite(const Node& n) const {
  if (!n.value.allFinite())
    fail(Errc::non_finite_gradient,
         std::string("non-finite value produced by operation '") + op_name(n.op) + "'");
}

Var Tape::push(Node n) {
  check_finite(n);
  nodes_.push_back(std::move(n));
  return Var{int(nodes_.size()) - 1};
}

Var Tape::unary(Op op, Var a, Mat value) {
  Node n;
  n.op = op;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(Mat value) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(value);
  n.needs_grad = false;
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.op = Op::parameter;
  n.value = p.value;
  n.param = &p;
  n.needs_grad = p.trainable;
  return push(std::move(n));
}

static void expect_same_shape(const Mat& a, const Mat& b, const char* where) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), Errc::invalid_dimension,
          std::string(where) + ": shape mismatch");
}

Var Tape::add(Var a, Var b) {
  expect_same_shape(val(a), val(b), "add");
  Node n;
  n.op = Op::add;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a) + val(b);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  expect_same_shape(val(a), val(b), "sub");
  Node n;
  n.op = Op::sub;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a) - val(b);
  return push(std::move(n));
}

Var Tape::neg(Var a) { return unary(Op::neg, a, -val(a)); }

Var Tape::mul(Var a, Var b) {
  expect_same_shape(val(a), val(b), "mul");
  Node n;
  n.op = Op::mul;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a).cwiseProduct(val(b));
  return push(std::move(n));
}

Var Tape::div(Var a, Var b) {
  expect_same_shape(val(a), val(b), "div");
  Node n;
  n.op = Op::div;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a).cwiseQuotient(val(b));
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  Node n;
  n.op = Op::scale_const;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.c = c;
  n.value = c * val(a);
  return push(std::move(n));
}

Var Tape::add_scalar(Var a, double c) {
  Node n;
  n.op = Op::add_const;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.c = c;
  n.value = val(a).array() + c;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  require(val(a).cols() == val(b).rows(), Errc::invalid_dimension, "matmul: inner dims differ");
  Node n;
  n.op = Op::matmul;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a) * val(b);
  return push(std::move(n));
}

Var Tape::matmul_nt(Var a, Var b) {
  require(val(a).cols() == val(b).cols(), Errc::invalid_dimension, "matmul_nt: inner dims differ");
  Node n;
  n.op = Op::matmul_nt;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a) * val(b).transpose();
  return push(std::move(n));
}

Var Tape::transpose(Var a) { return unary(Op::transpose, a, val(a).transpose()); }

Var Tape::row_dot(Var a, Var b) {
  expect_same_shape(val(a), val(b), "row_dot");
  Node n;
  n.op = Op::row_dot;
  n.in = {check(a), check(b)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.value = val(a).cwiseProduct(val(b)).rowwise().sum();
  return push(std::move(n));
}

Var Tape::row_scale(Var a, Var s) {
  require(val(s).cols() == 1 && val(s).rows() == val(a).rows(), Errc::invalid_dimension,
          "row_scale: scale must be a column matching a's rows");
  Node n;
  n.op = Op::row_scale;
  n.in = {check(a), check(s)};
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[s.id].needs_grad;
  n.value = val(s).col(0).asDiagonal() * val(a);
  return push(std::move(n));
}

Var Tape::col_scale_const(Var a, Eigen::RowVectorXd c) {
  require(c.size() == val(a).cols(), Errc::invalid_dimension, "col_scale_const: width mismatch");
  Node n;
  n.op = Op::col_scale_const;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.col_const = std::move(c);
  n.value = val(a).array().rowwise() * n.col_const.array();
  return push(std::move(n));
}

Var Tape::broadcast_col(Var v, int cols) {
  require(val(v).cols() == 1, Errc::invalid_dimension, "broadcast_col: input must be R x 1");
  Node n;
  n.op = Op::broadcast_col;
  n.in = {check(v)};
  n.needs_grad = nodes_[v.id].needs_grad;
  n.value = val(v).col(0).replicate(1, cols);
  return push(std::move(n));
}

Var Tape::broadcast_row(Var v, int rows) {
  require(val(v).rows() == 1, Errc::invalid_dimension, "broadcast_row: input must be 1 x C");
  Node n;
  n.op = Op::broadcast_row;
  n.in = {check(v)};
  n.needs_grad = nodes_[v.id].needs_grad;
  n.value = val(v).row(0).replicate(rows, 1);
  return push(std::move(n));
}

Var Tape::broadcast_scalar(Var s, int rows, int cols) {
  require(val(s).size() == 1, Errc::invalid_dimension, "broadcast_scalar: input must be 1 x 1");
  Node n;
  n.op = Op::broadcast_scalar;
  n.in = {check(s)};
  n.needs_grad = nodes_[s.id].needs_grad;
  n.value = Mat::Constant(rows, cols, val(s)(0, 0));
  return push(std::move(n));
}

Var Tape::row_sum(Var a) { return unary(Op::row_sum, a, val(a).rowwise().sum()); }

Var Tape::sum_all(Var a) {
  Mat m(1, 1);
  m(0, 0) = val(a).sum();
  return unary(Op::sum_all, a, std::move(m));
}

Var Tape::mean_all(Var a) {
  Mat m(1, 1);
  m(0, 0) = val(a).mean();
  return unary(Op::mean_all, a, std::move(m));
}

Var Tape::cosh(Var a) { return unary(Op::cosh_op, a, val(a).array().cosh()); }
Var Tape::sinh(Var a) { return unary(Op::sinh_op, a, val(a).array().sinh()); }
Var Tape::exp(Var a) { return unary(Op::exp_op, a, val(a).array().exp()); }
Var Tape::log(Var a) { return unary(Op::log_op, a, val(a).array().log()); }
Var Tape::sqrt(Var a) { return unary(Op::sqrt_op, a, val(a).array().sqrt()); }
Var Tape::rsqrt(Var a) { return unary(Op::rsqrt_op, a, val(a).array().rsqrt()); }
Var Tape::relu(Var a) { return unary(Op::relu_op, a, val(a).cwiseMax(0.0)); }

Var Tape::logistic(Var a) {
  Mat y = (1.0 / (1.0 + (-val(a).array()).exp())).matrix();
  return unary(Op::logistic_op, a, std::move(y));
}

Var Tape::sinhc(Var a) {
  Mat y = val(a);
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double x = y(i, j);
      y(i, j) = std::abs(x) < kExpBranchTol ? 1.0 + x * x / 6.0 : std::sinh(x) / x;
    }
  return unary(Op::sinhc_op, a, std::move(y));
}

Var Tape::arcosh(Var a) {
  Mat y = val(a);
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, j) = std::acosh(std::max(1.0, y(i, j)));
  return unary(Op::arcosh_clamped, a, std::move(y));
}

Var Tape::softmax_rows(Var a) {
  Mat y = val(a);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    double m = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  return unary(Op::softmax_rows, a, std::move(y));
}

Var Tape::colwise_max_segments(Var a, int segment_rows) {
  const Mat& x = val(a);
  require(segment_rows >= 1 && x.rows() % segment_rows == 0, Errc::invalid_dimension,
          "colwise_max_segments: rows must be a multiple of the segment length");
  const int segs = int(x.rows()) / segment_rows;
  Mat y(segs, x.cols());
  Mat arg(segs, x.cols());
  for (int s = 0; s < segs; ++s)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      int best = s * segment_rows;
      for (int r = s * segment_rows + 1; r < (s + 1) * segment_rows; ++r)
        if (x(r, c) > x(best, c)) best = r;  // first maximum wins on ties
      y(s, c) = x(best, c);
      arg(s, c) = double(best);
    }
  Node n;
  n.op = Op::colwise_max_segments;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.i0 = segment_rows;
  n.aux = std::move(arg);
  n.value = std::move(y);
  return push(std::move(n));
}

Var Tape::segment_mean_rows(Var a, int segment_rows) {
  const Mat& x = val(a);
  require(segment_rows >= 1 && x.rows() % segment_rows == 0, Errc::invalid_dimension,
          "segment_mean_rows: rows must be a multiple of the segment length");
  const int segs = int(x.rows()) / segment_rows;
  Mat y = Mat::Zero(segs, x.cols());
  for (int s = 0; s < segs; ++s)
    y.row(s) = x.middleRows(s * segment_rows, segment_rows).colwise().mean();
  Node n;
  n.op = Op::segment_mean_rows;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.i0 = segment_rows;
  n.value = std::move(y);
  return push(std::move(n));
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), Errc::invalid_argument, "concat_cols: empty part list");
  Eigen::Index rows = val(parts[0]).rows(), cols = 0;
  for (Var p : parts) {
    require(val(p).rows() == rows, Errc::invalid_dimension, "concat_cols: row mismatch");
    cols += val(p).cols();
  }
  Node n;
  n.op = Op::concat_cols;
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    n.in.push_back(check(p));
    n.needs_grad = n.needs_grad || nodes_[p.id].needs_grad;
    n.value.middleCols(at, val(p).cols()) = val(p);
    at += val(p).cols();
  }
  return push(std::move(n));
}

Var Tape::slice_cols(Var a, int start, int len) {
  require(start >= 0 && len >= 1 && start + len <= val(a).cols(), Errc::invalid_dimension,
          "slice_cols: out of range");
  Node n;
  n.op = Op::slice_cols;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.i0 = start;
  n.i1 = len;
  n.value = val(a).middleCols(start, len);
  return push(std::move(n));
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), Errc::invalid_argument, "concat_rows: empty part list");
  Eigen::Index cols = val(parts[0]).cols(), rows = 0;
  for (Var p : parts) {
    require(val(p).cols() == cols, Errc::invalid_dimension, "concat_rows: column mismatch");
    rows += val(p).rows();
  }
  Node n;
  n.op = Op::concat_rows;
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    n.in.push_back(check(p));
    n.needs_grad = n.needs_grad || nodes_[p.id].needs_grad;
    n.value.middleRows(at, val(p).rows()) = val(p);
    at += val(p).rows();
  }
  return push(std::move(n));
}

Var Tape::slice_rows(Var a, int start, int len) {
  require(start >= 0 && len >= 1 && start + len <= val(a).rows(), Errc::invalid_dimension,
          "slice_rows: out of range");
  Node n;
  n.op = Op::slice_rows;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.i0 = start;
  n.i1 = len;
  n.value = val(a).middleRows(start, len);
  return push(std::move(n));
}

Var Tape::dropout(Var a, Mat scaled_mask) {
  expect_same_shape(val(a), scaled_mask, "dropout");
  Node n;
  n.op = Op::dropout;
  n.in = {check(a)};
  n.needs_grad = nodes_[a.id].needs_grad;
  n.aux = std::move(scaled_mask);
  n.value = val(a).cwiseProduct(n.aux);
  return push(std::move(n));
}

double Tape::scalar(Var v) const {
  require(val(v).size() == 1, Errc::invalid_dimension, "scalar: variable is not 1 x 1");
  return val(v)(0, 0);
}

Mat& Tape::grad_of(int id, const Mat& shape_like) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(shape_like.rows(), shape_like.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  const int root = check(loss);
  require(nodes_[root].value.size() == 1, Errc::invalid_argument,
          "backward: loss must be a 1 x 1 node");
  require(std::isfinite(nodes_[root].value(0, 0)), Errc::non_finite_gradient,
          "backward: loss is not finite");
  grad_of(root, nodes_[root].value)(0, 0) = 1.0;

  for (int id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Mat& g = n.grad;
    if (!g.allFinite())
      fail(Errc::non_finite_gradient,
           std::string("non-finite gradient at operation '") + op_name(n.op) + "'");
    auto gin = [&](int slot) -> Mat& { return grad_of(n.in[slot], nodes_[n.in[slot]].value); };
    auto vin = [&](int slot) -> const Mat& { return nodes_[n.in[slot]].value; };
    auto wants = [&](int slot) { return nodes_[n.in[slot]].needs_grad; };

    switch (n.op) {
      case Op::constant:
        break;
      case Op::parameter:
        n.param->grad += g;
        break;
      case Op::add:
        if (wants(0)) gin(0) += g;
        if (wants(1)) gin(1) += g;
        break;
      case Op::sub:
        if (wants(0)) gin(0) += g;
        if (wants(1)) gin(1) -= g;
        break;
      case Op::neg:
        if (wants(0)) gin(0) -= g;
        break;
      case Op::mul:
        if (wants(0)) gin(0) += g.cwiseProduct(vin(1));
        if (wants(1)) gin(1) += g.cwiseProduct(vin(0));
        break;
      case Op::div:
        if (wants(0)) gin(0) += g.cwiseQuotient(vin(1));
        if (wants(1)) gin(1) -= g.cwiseProduct(n.value).cwiseQuotient(vin(1));
        break;
      case Op::scale_const:
        if (wants(0)) gin(0) += n.c * g;
        break;
      case Op::add_const:
        if (wants(0)) gin(0) += g;
        break;
      case Op::matmul:
        if (wants(0)) gin(0).noalias() += g * vin(1).transpose();
        if (wants(1)) gin(1).noalias() += vin(0).transpose() * g;
        break;
      case Op::matmul_nt:
        if (wants(0)) gin(0).noalias() += g * vin(1);
        if (wants(1)) gin(1).noalias() += g.transpose() * vin(0);
        break;
      case Op::transpose:
        if (wants(0)) gin(0) += g.transpose();
        break;
      case Op::row_dot:
        if (wants(0)) gin(0) += g.col(0).asDiagonal() * vin(1);
        if (wants(1)) gin(1) += g.col(0).asDiagonal() * vin(0);
        break;
      case Op::row_scale:
        if (wants(0)) gin(0) += vin(1).col(0).asDiagonal() * g;
        if (wants(1)) gin(1) += g.cwiseProduct(vin(0)).rowwise().sum();
        break;
      case Op::col_scale_const:
        if (wants(0)) gin(0) += (g.array().rowwise() * n.col_const.array()).matrix();
        break;
      case Op::broadcast_col:
        if (wants(0)) gin(0) += g.rowwise().sum();
        break;
      case Op::broadcast_row:
        if (wants(0)) gin(0) += g.colwise().sum();
        break;
      case Op::broadcast_scalar:
        if (wants(0)) gin(0)(0, 0) += g.sum();
        break;
      case Op::row_sum:
        if (wants(0)) gin(0) += g.col(0).replicate(1, vin(0).cols());
        break;
      case Op::sum_all:
        if (wants(0)) gin(0).array() += g(0, 0);
        break;
      case Op::mean_all:
        if (wants(0)) gin(0).array() += g(0, 0) / double(vin(0).size());
        break;
      case Op::cosh_op:
        if (wants(0)) gin(0) += g.cwiseProduct(vin(0).array().sinh().matrix());
        break;
      case Op::sinh_op:
        if (wants(0)) gin(0) += g.cwiseProduct(vin(0).array().cosh().matrix());
        break;
      case Op::exp_op:
        if (wants(0)) gin(0) += g.cwiseProduct(n.value);
        break;
      case Op::log_op:
        if (wants(0)) gin(0) += g.cwiseQuotient(vin(0));
        break;
      case Op::sqrt_op:
        if (wants(0)) {
          Mat& d = gin(0);
          for (Eigen::Index j = 0; j < g.cols(); ++j)
            for (Eigen::Index i = 0; i < g.rows(); ++i)
              if (n.value(i, j) > kSqrtGradGuard) d(i, j) += g(i, j) * 0.5 / n.value(i, j);
        }
        break;
      case Op::rsqrt_op:
        if (wants(0))
          gin(0) -= 0.5 * g.cwiseProduct(n.value.cwiseQuotient(vin(0)));
        break;
      case Op::relu_op:
        if (wants(0))
          gin(0) += g.cwiseProduct((vin(0).array() > 0.0).cast<double>().matrix());
        break;
      case Op::logistic_op:
        if (wants(0))
          gin(0) += g.cwiseProduct(n.value.cwiseProduct((1.0 - n.value.array()).matrix()));
        break;
      case Op::sinhc_op:
        if (wants(0)) {
          Mat& d = gin(0);
          const Mat& x = vin(0);
          for (Eigen::Index j = 0; j < g.cols(); ++j)
            for (Eigen::Index i = 0; i < g.rows(); ++i) {
              double xv = x(i, j);
              double deriv = std::abs(xv) < kExpBranchTol
                                 ? xv / 3.0
                                 : (xv * std::cosh(xv) - std::sinh(xv)) / (xv * xv);
              d(i, j) += g(i, j) * deriv;
            }
        }
        break;
      case Op::arcosh_clamped:
        if (wants(0)) {
          Mat& d = gin(0);
          const Mat& x = vin(0);
          for (Eigen::Index j = 0; j < g.cols(); ++j)
            for (Eigen::Index i = 0; i < g.rows(); ++i) {
              double xv = x(i, j);
              if (xv > 1.0) d(i, j) += g(i, j) / std::sqrt(xv * xv - 1.0);
            }
        }
        break;
      case Op::softmax_rows:
        if (wants(0)) {
          Mat& d = gin(0);
          for (Eigen::Index i = 0; i < g.rows(); ++i) {
            double dot = g.row(i).cwiseProduct(n.value.row(i)).sum();
            d.row(i) += (g.row(i).array() - dot).matrix().cwiseProduct(n.value.row(i));
          }
        }
        break;
      case Op::colwise_max_segments:
        if (wants(0)) {
          Mat& d = gin(0);
          for (Eigen::Index s = 0; s < g.rows(); ++s)
            for (Eigen::Index c = 0; c < g.cols(); ++c)
              d(Eigen::Index(n.aux(s, c)), c) += g(s, c);
        }
        break;
      case Op::segment_mean_rows:
        if (wants(0)) {
          Mat& d = gin(0);
          const double inv = 1.0 / double(n.i0);
          for (Eigen::Index s = 0; s < g.rows(); ++s)
            d.middleRows(s * n.i0, n.i0).rowwise() += inv * g.row(s);
        }
        break;
      case Op::concat_cols: {
        Eigen::Index at = 0;
        for (size_t k = 0; k < n.in.size(); ++k) {
          Eigen::Index w = nodes_[n.in[k]].value.cols();
          if (nodes_[n.in[k]].needs_grad)
            grad_of(n.in[k], nodes_[n.in[k]].value) += g.middleCols(at, w);
          at += w;
        }
        break;
      }
      case Op::slice_cols:
        if (wants(0)) gin(0).middleCols(n.i0, n.i1) += g;
        break;
      case Op::concat_rows: {
        Eigen::Index at = 0;
        for (size_t k = 0; k < n.in.size(); ++k) {
          Eigen::Index h = nodes_[n.in[k]].value.rows();
          if (nodes_[n.in[k]].needs_grad)
            grad_of(n.in[k], nodes_[n.in[k]].value) += g.middleRows(at, h);
          at += h;
        }
        break;
      }
      case Op::slice_rows:
        if (wants(0)) gin(0).middleRows(n.i0, n.i1) += g;
        break;
      case Op::dropout:
        if (wants(0)) gin(0) += g.cwiseProduct(n.aux);
        break;
    }
  }
}

}  // namespace lvad
