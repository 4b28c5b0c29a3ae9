// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_AUTOGRAD_HPP_
#define RDC_AUTOGRAD_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rdc/common.hpp"
#include "rdc/tensor.hpp"

namespace rdc::ag {

// Reverse-mode autodiff over Tensor<S>. Each op builds a Node whose backprop
// closure scatters the node's gradient into its parents. Graphs are rebuilt
// per step; parameters are long-lived leaf nodes whose gradients accumulate
// until zero_grad().
template <typename S>
struct Node {
  Tensor<S> value;
  Tensor<S> grad;
  bool grad_alloc = false;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  Tensor<S>& grad_ref() {
    if (!grad_alloc) {
      grad = Tensor<S>::zeros(value.shape());
      grad_alloc = true;
    }
    return grad;
  }
  void zero_grad() {
    if (grad_alloc) grad.array().setZero();
  }
};

template <typename S>
using Var = std::shared_ptr<Node<S>>;

// Graph recording switch. Inference paths disable recording so layer code can
// be shared between training and sampling without building tapes.
inline bool& grad_recording() {
  thread_local bool enabled = true;
  return enabled;
}

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_recording()) { grad_recording() = false; }
  ~NoGradGuard() { grad_recording() = prev; }
};

template <typename S>
Var<S> leaf(Tensor<S> value, bool requires_grad = false) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

template <typename S>
Var<S> constant(Tensor<S> value) {
  return leaf(std::move(value), false);
}

template <typename S>
Var<S> make_op(Tensor<S> value, std::vector<Var<S>> parents,
               std::function<void(Node<S>&)> backprop) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  if (grad_recording()) {
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    if (rg) {
      n->requires_grad = true;
      n->parents = std::move(parents);
      n->backprop = std::move(backprop);
    }
  }
  return n;
}

// Runs backprop from a scalar root. Seeds the root gradient with 1.
template <typename S>
void backward(const Var<S>& root) {
  check(root->value.numel() == 1, ErrorKind::kContract,
        "backward: root must be a scalar");
  if (!root->requires_grad) return;
  // Iterative post-order topological sort.
  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> seen;
  std::vector<std::pair<Node<S>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<S>* p = node->parents[idx++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_ref().array().setConstant(S(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<S>* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

// ---- element-wise binary ----

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  check(a->value.same_shape(b->value), ErrorKind::kContract, "add: shape mismatch");
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() + b->value.array()),
                    {a, b}, [](Node<S>& n) {
                      n.parents[0]->grad_ref().array() += n.grad.array();
                      n.parents[1]->grad_ref().array() += n.grad.array();
                    });
}

template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  check(a->value.same_shape(b->value), ErrorKind::kContract, "sub: shape mismatch");
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() - b->value.array()),
                    {a, b}, [](Node<S>& n) {
                      n.parents[0]->grad_ref().array() += n.grad.array();
                      n.parents[1]->grad_ref().array() -= n.grad.array();
                    });
}

template <typename S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  check(a->value.same_shape(b->value), ErrorKind::kContract, "mul: shape mismatch");
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() * b->value.array()),
                    {a, b}, [](Node<S>& n) {
                      n.parents[0]->grad_ref().array() +=
                          n.grad.array() * n.parents[1]->value.array();
                      n.parents[1]->grad_ref().array() +=
                          n.grad.array() * n.parents[0]->value.array();
                    });
}

// a / b; caller guarantees b bounded away from zero.
template <typename S>
Var<S> div(const Var<S>& a, const Var<S>& b) {
  check(a->value.same_shape(b->value), ErrorKind::kContract, "div: shape mismatch");
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() / b->value.array()),
                    {a, b}, [](Node<S>& n) {
                      const auto& bv = n.parents[1]->value.array();
                      n.parents[0]->grad_ref().array() += n.grad.array() / bv;
                      n.parents[1]->grad_ref().array() -=
                          n.grad.array() * n.value.array() / bv;
                    });
}

// ---- scalar-constant and tensor-constant ops ----

template <typename S>
Var<S> scale(const Var<S>& a, double c) {
  const S cs = static_cast<S>(c);
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() * cs), {a},
                    [cs](Node<S>& n) {
                      n.parents[0]->grad_ref().array() += n.grad.array() * cs;
                    });
}

template <typename S>
Var<S> add_scalar(const Var<S>& a, double c) {
  return make_op<S>(
      Tensor<S>(a->value.shape(), a->value.array() + static_cast<S>(c)), {a},
      [](Node<S>& n) { n.parents[0]->grad_ref().array() += n.grad.array(); });
}

// a + k where k carries no gradient (pseudo-quantization noise).
template <typename S>
Var<S> add_const(const Var<S>& a, const Tensor<S>& k) {
  check(a->value.same_shape(k), ErrorKind::kContract, "add_const: shape mismatch");
  return make_op<S>(
      Tensor<S>(a->value.shape(), a->value.array() + k.array()), {a},
      [](Node<S>& n) { n.parents[0]->grad_ref().array() += n.grad.array(); });
}

template <typename S>
Var<S> neg(const Var<S>& a) {
  return scale(a, -1.0);
}

// Cuts the graph: value passes through, gradient stops.
template <typename S>
Var<S> detach(const Var<S>& a) {
  return constant(a->value);
}

// ---- element-wise unary ----

template <typename S, typename FwdFn, typename BwdFn>
Var<S> unary(const Var<S>& a, FwdFn fwd, BwdFn bwd_from_input) {
  Tensor<S> out(a->value.shape(), fwd(a->value.array()));
  return make_op<S>(std::move(out), {a}, [bwd_from_input](Node<S>& n) {
    n.parents[0]->grad_ref().array() +=
        n.grad.array() * bwd_from_input(n.parents[0]->value.array());
  });
}

template <typename S>
Var<S> abs_(const Var<S>& a) {
  return unary(
      a, [](const auto& x) { return x.abs().eval(); },
      [](const auto& x) { return x.sign().eval(); });
}

template <typename S>
Var<S> square(const Var<S>& a) {
  return unary(
      a, [](const auto& x) { return x.square().eval(); },
      [](const auto& x) { return (S(2) * x).eval(); });
}

template <typename S>
Var<S> exp_(const Var<S>& a) {
  return unary(
      a, [](const auto& x) { return x.exp().eval(); },
      [](const auto& x) { return x.exp().eval(); });
}

// Natural log; caller guarantees positive input.
template <typename S>
Var<S> log_(const Var<S>& a) {
  return unary(
      a, [](const auto& x) { return x.log().eval(); },
      [](const auto& x) { return x.inverse().eval(); });
}

template <typename S>
Var<S> sigmoid(const Var<S>& a) {
  Tensor<S> out(a->value.shape(),
                (S(1) / (S(1) + (-a->value.array()).exp())).eval());
  return make_op<S>(std::move(out), {a}, [](Node<S>& n) {
    const auto& y = n.value.array();
    n.parents[0]->grad_ref().array() += n.grad.array() * y * (S(1) - y);
  });
}

template <typename S>
Var<S> tanh_(const Var<S>& a) {
  Tensor<S> out(a->value.shape(), a->value.array().tanh().eval());
  return make_op<S>(std::move(out), {a}, [](Node<S>& n) {
    const auto& y = n.value.array();
    n.parents[0]->grad_ref().array() += n.grad.array() * (S(1) - y * y);
  });
}

template <typename S>
Var<S> silu(const Var<S>& a) {
  return mul(a, sigmoid(a));
}

template <typename S>
Var<S> softplus(const Var<S>& a) {
  // log(1 + exp(x)), stable form max(x,0) + log1p(exp(-|x|)).
  return unary(
      a,
      [](const auto& x) {
        return (x.max(S(0)) + (S(1) + (-x.abs()).exp()).log()).eval();
      },
      [](const auto& x) { return (S(1) / (S(1) + (-x).exp())).eval(); });
}

// Standard normal CDF.
template <typename S>
Var<S> normal_cdf(const Var<S>& a) {
  const S inv_sqrt2 = static_cast<S>(M_SQRT1_2);
  const S inv_sqrt2pi = static_cast<S>(1.0 / std::sqrt(2.0 * M_PI));
  return unary(
      a,
      [=](const auto& x) {
        return (S(0.5) * (-x * inv_sqrt2).erfc()).eval();
      },
      [=](const auto& x) {
        return (inv_sqrt2pi * (S(-0.5) * x.square()).exp()).eval();
      });
}

// Gradient passes only where the input is strictly inside the bounds.
template <typename S>
Var<S> clamp_min(const Var<S>& a, double lo) {
  const S l = static_cast<S>(lo);
  return unary(
      a, [l](const auto& x) { return x.max(l).eval(); },
      [l](const auto& x) { return (x > l).template cast<S>().eval(); });
}

template <typename S>
Var<S> clamp(const Var<S>& a, double lo, double hi) {
  const S l = static_cast<S>(lo), h = static_cast<S>(hi);
  return unary(
      a, [=](const auto& x) { return x.max(l).min(h).eval(); },
      [=](const auto& x) {
        return ((x > l) && (x < h)).template cast<S>().eval();
      });
}

// ---- reductions ----

template <typename S>
Var<S> sum_all(const Var<S>& a) {
  return make_op<S>(Tensor<S>::scalar(a->value.array().sum()), {a},
                    [](Node<S>& n) {
                      n.parents[0]->grad_ref().array() += n.grad[0];
                    });
}

template <typename S>
Var<S> mean_all(const Var<S>& a) {
  const S inv = S(1) / static_cast<S>(a->value.numel());
  return make_op<S>(Tensor<S>::scalar(a->value.array().mean()), {a},
                    [inv](Node<S>& n) {
                      n.parents[0]->grad_ref().array() += n.grad[0] * inv;
                    });
}

// ---- broadcasting with {1}-shaped scalars ----

template <typename S>
Var<S> mul_bscalar(const Var<S>& a, const Var<S>& s) {
  check(s->value.numel() == 1, ErrorKind::kContract, "mul_bscalar: scalar expected");
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() * s->value[0]),
                    {a, s}, [](Node<S>& n) {
                      n.parents[0]->grad_ref().array() +=
                          n.grad.array() * n.parents[1]->value[0];
                      n.parents[1]->grad_ref()[0] +=
                          (n.grad.array() * n.parents[0]->value.array()).sum();
                    });
}

template <typename S>
Var<S> add_bscalar(const Var<S>& a, const Var<S>& s) {
  check(s->value.numel() == 1, ErrorKind::kContract, "add_bscalar: scalar expected");
  return make_op<S>(Tensor<S>(a->value.shape(), a->value.array() + s->value[0]),
                    {a, s}, [](Node<S>& n) {
                      n.parents[0]->grad_ref().array() += n.grad.array();
                      n.parents[1]->grad_ref()[0] += n.grad.array().sum();
                    });
}

// Picks one element as a {1}-shaped scalar.
template <typename S>
Var<S> select(const Var<S>& a, Eigen::Index idx) {
  check(idx >= 0 && idx < a->value.numel(), ErrorKind::kContract,
        "select: index out of range");
  return make_op<S>(Tensor<S>::scalar(a->value[idx]), {a}, [idx](Node<S>& n) {
    n.parents[0]->grad_ref()[idx] += n.grad[0];
  });
}

// ---- shape ops on (C,H,W) tensors ----

template <typename S>
Var<S> concat_ch(const Var<S>& a, const Var<S>& b) {
  const auto& sa = a->value.shape();
  const auto& sb = b->value.shape();
  check(sa.size() == 3 && sb.size() == 3 && sa[1] == sb[1] && sa[2] == sb[2],
        ErrorKind::kContract, "concat_ch: spatial dims must match");
  Tensor<S> out({sa[0] + sb[0], sa[1], sa[2]});
  const Eigen::Index na = a->value.numel();
  out.array().head(na) = a->value.array();
  out.array().tail(b->value.numel()) = b->value.array();
  return make_op<S>(std::move(out), {a, b}, [na](Node<S>& n) {
    n.parents[0]->grad_ref().array() += n.grad.array().head(na);
    n.parents[1]->grad_ref().array() +=
        n.grad.array().tail(n.grad.numel() - na);
  });
}

template <typename S>
Var<S> slice_ch(const Var<S>& a, int c0, int c1) {
  const auto& sh = a->value.shape();
  check(sh.size() == 3 && 0 <= c0 && c0 < c1 && c1 <= sh[0], ErrorKind::kContract,
        "slice_ch: bad channel range");
  const Eigen::Index plane = static_cast<Eigen::Index>(sh[1]) * sh[2];
  Tensor<S> out({c1 - c0, sh[1], sh[2]});
  out.array() = a->value.array().segment(c0 * plane, (c1 - c0) * plane);
  return make_op<S>(std::move(out), {a}, [c0, plane](Node<S>& n) {
    n.parents[0]->grad_ref().array().segment(c0 * plane, n.grad.numel()) +=
        n.grad.array();
  });
}

// Adds a per-channel bias (shape {C}) to a (C,H,W) tensor.
template <typename S>
Var<S> channel_bias(const Var<S>& x, const Var<S>& b) {
  const auto& sh = x->value.shape();
  check(sh.size() == 3 && b->value.numel() == sh[0], ErrorKind::kContract,
        "channel_bias: bias length must equal channel count");
  const Eigen::Index plane = static_cast<Eigen::Index>(sh[1]) * sh[2];
  Tensor<S> out = x->value;
  for (int c = 0; c < sh[0]; ++c)
    out.array().segment(c * plane, plane) += b->value[c];
  return make_op<S>(std::move(out), {x, b}, [plane](Node<S>& n) {
    n.parents[0]->grad_ref().array() += n.grad.array();
    auto& gb = n.parents[1]->grad_ref();
    for (Eigen::Index c = 0; c < gb.numel(); ++c)
      gb[c] += n.grad.array().segment(c * plane, plane).sum();
  });
}

// Forward differences along width: out(c,h,w) = x(c,h,w+1) - x(c,h,w).
template <typename S>
Var<S> diff_x(const Var<S>& x) {
  const auto& sh = x->value.shape();
  check(sh.size() == 3 && sh[2] >= 2, ErrorKind::kContract, "diff_x: width >= 2");
  const int C = sh[0], H = sh[1], W = sh[2];
  Tensor<S> out({C, H, W - 1});
  for (int c = 0; c < C; ++c)
    for (int h = 0; h < H; ++h)
      for (int w = 0; w + 1 < W; ++w)
        out.at(c, h, w) = x->value.at(c, h, w + 1) - x->value.at(c, h, w);
  return make_op<S>(std::move(out), {x}, [C, H, W](Node<S>& n) {
    auto& g = n.parents[0]->grad_ref();
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w + 1 < W; ++w) {
          const S gv = n.grad.at(c, h, w);
          g.at(c, h, w + 1) += gv;
          g.at(c, h, w) -= gv;
        }
  });
}

// Forward differences along height.
template <typename S>
Var<S> diff_y(const Var<S>& x) {
  const auto& sh = x->value.shape();
  check(sh.size() == 3 && sh[1] >= 2, ErrorKind::kContract, "diff_y: height >= 2");
  const int C = sh[0], H = sh[1], W = sh[2];
  Tensor<S> out({C, H - 1, W});
  for (int c = 0; c < C; ++c)
    for (int h = 0; h + 1 < H; ++h)
      for (int w = 0; w < W; ++w)
        out.at(c, h, w) = x->value.at(c, h + 1, w) - x->value.at(c, h, w);
  return make_op<S>(std::move(out), {x}, [C, H, W](Node<S>& n) {
    auto& g = n.parents[0]->grad_ref();
    for (int c = 0; c < C; ++c)
      for (int h = 0; h + 1 < H; ++h)
        for (int w = 0; w < W; ++w) {
          const S gv = n.grad.at(c, h, w);
          g.at(c, h + 1, w) += gv;
          g.at(c, h, w) -= gv;
        }
  });
}

// 2x2 average pooling (dims must be even).
template <typename S>
Var<S> avg_pool2(const Var<S>& x) {
  const auto& sh = x->value.shape();
  check(sh.size() == 3 && sh[1] % 2 == 0 && sh[2] % 2 == 0, ErrorKind::kContract,
        "avg_pool2: even spatial dims required");
  const int C = sh[0], H = sh[1], W = sh[2];
  Tensor<S> out({C, H / 2, W / 2});
  for (int c = 0; c < C; ++c)
    for (int h = 0; h < H / 2; ++h)
      for (int w = 0; w < W / 2; ++w)
        out.at(c, h, w) =
            (x->value.at(c, 2 * h, 2 * w) + x->value.at(c, 2 * h, 2 * w + 1) +
             x->value.at(c, 2 * h + 1, 2 * w) +
             x->value.at(c, 2 * h + 1, 2 * w + 1)) *
            S(0.25);
  return make_op<S>(std::move(out), {x}, [C, H, W](Node<S>& n) {
    auto& g = n.parents[0]->grad_ref();
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H / 2; ++h)
        for (int w = 0; w < W / 2; ++w) {
          const S gv = n.grad.at(c, h, w) * S(0.25);
          g.at(c, 2 * h, 2 * w) += gv;
          g.at(c, 2 * h, 2 * w + 1) += gv;
          g.at(c, 2 * h + 1, 2 * w) += gv;
          g.at(c, 2 * h + 1, 2 * w + 1) += gv;
        }
  });
}

// Nearest-neighbour upsampling by an integer factor.
template <typename S>
Var<S> upsample_nearest(const Var<S>& x, int factor) {
  const auto& sh = x->value.shape();
  check(sh.size() == 3 && factor >= 1, ErrorKind::kContract,
        "upsample_nearest: rank-3 input, factor >= 1");
  if (factor == 1) return x;
  const int C = sh[0], H = sh[1], W = sh[2];
  Tensor<S> out({C, H * factor, W * factor});
  for (int c = 0; c < C; ++c)
    for (int h = 0; h < H * factor; ++h)
      for (int w = 0; w < W * factor; ++w)
        out.at(c, h, w) = x->value.at(c, h / factor, w / factor);
  return make_op<S>(std::move(out), {x}, [C, H, W, factor](Node<S>& n) {
    auto& g = n.parents[0]->grad_ref();
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H * factor; ++h)
        for (int w = 0; w < W * factor; ++w)
          g.at(c, h / factor, w / factor) += n.grad.at(c, h, w);
  });
}

}  // namespace rdc::ag

#endif  // RDC_AUTOGRAD_HPP_
