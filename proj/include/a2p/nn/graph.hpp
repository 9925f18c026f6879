#pragma once

#include "a2p/common.hpp"

#include <Eigen/Dense>

#include <vector>

namespace a2p::nn {

/// Eager reverse-mode tape over dense matrices. Every node value is a
/// (features x batch) matrix; losses end in a 1x1 node. The op set is exactly
/// what the SAC losses need: affine layers, the elementwise functions of the
/// squashed-Gaussian head, twin-critic min, and batch reductions.
class Graph {
 public:
  struct Ref {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Ref constant(Mat v) { return push(Op::Constant, std::move(v), false); }
  Ref leaf(Mat v) { return push(Op::Leaf, std::move(v), true); }

  /// W*x + b with b broadcast across batch columns.
  Ref affine(Ref w, Ref b, Ref x) {
    const Mat& wv = val(w);
    const Mat& bv = val(b);
    const Mat& xv = val(x);
    if (wv.cols() != xv.rows() || bv.rows() != wv.rows() || bv.cols() != 1) {
      throw ConfigError("graph affine: shape mismatch");
    }
    Mat out = (wv * xv).colwise() + bv.col(0);
    Ref r = push(Op::Affine, std::move(out), any_grad(w, b, x));
    link(r, w, b, x);
    return r;
  }

  Ref add(Ref a, Ref b) { return binary(Op::Add, a, b, val(a) + val(b)); }
  Ref sub(Ref a, Ref b) { return binary(Op::Sub, a, b, val(a) - val(b)); }
  Ref mul(Ref a, Ref b) { return binary(Op::Mul, a, b, val(a).cwiseProduct(val(b))); }
  Ref cmin(Ref a, Ref b) { return binary(Op::CMin, a, b, val(a).cwiseMin(val(b))); }

  Ref tanh(Ref a) { return unary(Op::Tanh, a, val(a).array().tanh().matrix()); }
  Ref relu(Ref a) { return unary(Op::Relu, a, val(a).cwiseMax(0.0)); }
  Ref exp(Ref a) { return unary(Op::Exp, a, val(a).array().exp().matrix()); }
  Ref log(Ref a) { return unary(Op::Log, a, val(a).array().log().matrix()); }
  Ref square(Ref a) { return unary(Op::Square, a, val(a).cwiseProduct(val(a))); }

  Ref softplus(Ref a) {
    Mat out = val(a).unaryExpr([](double x) { return a2p::softplus(x); });
    return unary(Op::Softplus, a, std::move(out));
  }

  /// Hard clamp; gradient passes only where lo <= x <= hi.
  Ref clamp(Ref a, double lo, double hi) {
    Mat out = val(a).cwiseMax(lo).cwiseMin(hi);
    Ref r = unary(Op::Clamp, a, std::move(out));
    nodes_[r.id].p0 = lo;
    nodes_[r.id].p1 = hi;
    return r;
  }

  Ref scale(Ref a, double s) {
    Ref r = unary(Op::Scale, a, s * val(a));
    nodes_[r.id].p0 = s;
    return r;
  }

  Ref shift(Ref a, double c) {
    return unary(Op::Shift, a, (val(a).array() + c).matrix());
  }

  /// Sum over rows: (D x B) -> (1 x B).
  Ref colsum(Ref a) { return unary(Op::ColSum, a, val(a).colwise().sum()); }

  /// Mean over all coefficients: -> 1x1.
  Ref mean(Ref a) {
    Mat out(1, 1);
    out(0, 0) = val(a).mean();
    return unary(Op::Mean, a, std::move(out));
  }

  /// Row slice [i0, i0+n): shares no storage, gradient routes back to the slice.
  Ref rows(Ref a, int i0, int n) {
    Ref r = unary(Op::Rows, a, val(a).middleRows(i0, n));
    nodes_[r.id].p0 = i0;
    nodes_[r.id].p1 = n;
    return r;
  }

  /// Vertical concatenation.
  Ref vcat(Ref a, Ref b) {
    const Mat& av = val(a);
    const Mat& bv = val(b);
    if (av.cols() != bv.cols()) throw ConfigError("graph vcat: column mismatch");
    Mat out(av.rows() + bv.rows(), av.cols());
    out.topRows(av.rows()) = av;
    out.bottomRows(bv.rows()) = bv;
    return binary(Op::VCat, a, b, std::move(out));
  }

  const Mat& value(Ref r) const { return nodes_[r.id].val; }

  double scalar(Ref r) const {
    const Mat& v = nodes_[r.id].val;
    if (v.size() != 1) throw ConfigError("graph scalar: node is not 1x1");
    return v(0, 0);
  }

  /// Reverse pass from a 1x1 root. Clears all gradients first, so repeated
  /// backward calls on one graph give per-root gradients.
  void backward(Ref root) {
    if (nodes_[root.id].val.size() != 1) {
      throw ConfigError("graph backward: root must be scalar");
    }
    for (auto& n : nodes_) {
      if (n.needs_grad) {
        n.grad.setZero(n.val.rows(), n.val.cols());
      }
    }
    if (!nodes_[root.id].needs_grad) return;  // nothing upstream of the root
    nodes_[root.id].grad(0, 0) = 1.0;
    for (int id = root.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.needs_grad || n.grad.size() == 0) continue;
      pull(n);
    }
  }

  const Mat& gradient(Ref r) const { return nodes_[r.id].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    Constant, Leaf, Affine, Add, Sub, Mul, CMin, Tanh, Relu, Exp, Log,
    Square, Softplus, Clamp, Scale, Shift, ColSum, Mean, Rows, VCat
  };

  struct Node {
    Op op;
    Mat val;
    Mat grad;
    bool needs_grad = false;
    int a = -1, b = -1, c = -1;
    double p0 = 0.0, p1 = 0.0;
  };

  const Mat& val(Ref r) const { return nodes_[r.id].val; }
  bool wants(int id) const { return id >= 0 && nodes_[id].needs_grad; }
  bool any_grad(Ref a, Ref b = {}, Ref c = {}) const {
    return wants(a.id) || (b.valid() && wants(b.id)) || (c.valid() && wants(c.id));
  }

  Ref push(Op op, Mat v, bool needs_grad) {
    Node n;
    n.op = op;
    n.val = std::move(v);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return Ref{static_cast<int>(nodes_.size()) - 1};
  }

  void link(Ref r, Ref a, Ref b = {}, Ref c = {}) {
    nodes_[r.id].a = a.id;
    nodes_[r.id].b = b.id;
    nodes_[r.id].c = c.id;
  }

  Ref unary(Op op, Ref a, Mat out) {
    Ref r = push(op, std::move(out), any_grad(a));
    link(r, a);
    return r;
  }

  Ref binary(Op op, Ref a, Ref b, Mat out) {
    Ref r = push(op, std::move(out), any_grad(a, b));
    link(r, a, b);
    return r;
  }

  void acc(int id, const Mat& g) {
    if (wants(id)) nodes_[id].grad += g;
  }

  void pull(Node& n) {
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::Constant:
      case Op::Leaf:
        break;
      case Op::Affine: {
        // n.a = W, n.b = bias, n.c = x
        const Mat& wv = nodes_[n.a].val;
        const Mat& xv = nodes_[n.c].val;
        if (wants(n.a)) nodes_[n.a].grad.noalias() += g * xv.transpose();
        if (wants(n.b)) nodes_[n.b].grad.col(0) += g.rowwise().sum();
        if (wants(n.c)) nodes_[n.c].grad.noalias() += wv.transpose() * g;
        break;
      }
      case Op::Add:
        acc(n.a, g);
        acc(n.b, g);
        break;
      case Op::Sub:
        acc(n.a, g);
        if (wants(n.b)) nodes_[n.b].grad -= g;
        break;
      case Op::Mul:
        if (wants(n.a)) nodes_[n.a].grad += g.cwiseProduct(nodes_[n.b].val);
        if (wants(n.b)) nodes_[n.b].grad += g.cwiseProduct(nodes_[n.a].val);
        break;
      case Op::CMin: {
        // ties route to the first argument
        const Mat& av = nodes_[n.a].val;
        const Mat& bv = nodes_[n.b].val;
        const Eigen::ArrayXXd take_a = (av.array() <= bv.array()).cast<double>();
        if (wants(n.a)) nodes_[n.a].grad.array() += g.array() * take_a;
        if (wants(n.b)) nodes_[n.b].grad.array() += g.array() * (1.0 - take_a);
        break;
      }
      case Op::Tanh:
        acc(n.a, g.cwiseProduct((1.0 - n.val.array().square()).matrix()));
        break;
      case Op::Relu:
        acc(n.a, g.cwiseProduct((nodes_[n.a].val.array() > 0.0).cast<double>().matrix()));
        break;
      case Op::Exp:
        acc(n.a, g.cwiseProduct(n.val));
        break;
      case Op::Log:
        acc(n.a, g.cwiseQuotient(nodes_[n.a].val));
        break;
      case Op::Square:
        acc(n.a, 2.0 * g.cwiseProduct(nodes_[n.a].val));
        break;
      case Op::Softplus:
        acc(n.a, g.cwiseProduct(
                     nodes_[n.a].val.unaryExpr([](double x) { return sigmoid(x); })));
        break;
      case Op::Clamp: {
        const Eigen::ArrayXXd inside = (nodes_[n.a].val.array() >= n.p0 &&
                                        nodes_[n.a].val.array() <= n.p1)
                                           .cast<double>();
        if (wants(n.a)) nodes_[n.a].grad.array() += g.array() * inside;
        break;
      }
      case Op::Scale:
        acc(n.a, n.p0 * g);
        break;
      case Op::Shift:
        acc(n.a, g);
        break;
      case Op::ColSum:
        if (wants(n.a)) {
          nodes_[n.a].grad += g.replicate(nodes_[n.a].val.rows(), 1);
        }
        break;
      case Op::Mean:
        if (wants(n.a)) {
          nodes_[n.a].grad.array() +=
              g(0, 0) / static_cast<double>(nodes_[n.a].val.size());
        }
        break;
      case Op::Rows:
        if (wants(n.a)) {
          nodes_[n.a].grad.middleRows(static_cast<int>(n.p0), static_cast<int>(n.p1)) += g;
        }
        break;
      case Op::VCat: {
        const auto ra = nodes_[n.a].val.rows();
        if (wants(n.a)) nodes_[n.a].grad += g.topRows(ra);
        if (wants(n.b)) nodes_[n.b].grad += g.bottomRows(nodes_[n.b].val.rows());
        break;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace a2p::nn
