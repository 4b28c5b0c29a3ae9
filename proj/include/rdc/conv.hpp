// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_CONV_HPP_
#define RDC_CONV_HPP_

#include <Eigen/Core>
#include <memory>
#include <utility>

#include "rdc/autograd.hpp"

namespace rdc::ag {

namespace detail {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Unfolds zero-padded (C,H,W) input into a (C*k*k, Ho*Wo) column matrix.
template <typename S>
Mat<S> im2col(const Tensor<S>& x, int k, int stride, int pad, int ho, int wo) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Mat<S> col(C * k * k, ho * wo);
  col.setZero();
  for (int c = 0; c < C; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const int row = (c * k + ki) * k + kj;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * stride + ki - pad;
          if (ih < 0 || ih >= H) continue;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * stride + kj - pad;
            if (iw < 0 || iw >= W) continue;
            col(row, oh * wo + ow) = x.at(c, ih, iw);
          }
        }
      }
    }
  }
  return col;
}

// Scatter-adds a column matrix back into (C,H,W) gradient layout.
template <typename S>
void col2im_acc(const Mat<S>& col, int k, int stride, int pad, int ho, int wo,
                Tensor<S>& gx) {
  const int C = gx.dim(0), H = gx.dim(1), W = gx.dim(2);
  for (int c = 0; c < C; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const int row = (c * k + ki) * k + kj;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * stride + ki - pad;
          if (ih < 0 || ih >= H) continue;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * stride + kj - pad;
            if (iw < 0 || iw >= W) continue;
            gx.at(c, ih, iw) += col(row, oh * wo + ow);
          }
        }
      }
    }
  }
}

}  // namespace detail

// 2-d convolution. x: (Cin,H,W), w: (Cout,Cin,k,k), b: (Cout). Zero padding.
template <typename S>
Var<S> conv2d(const Var<S>& x, const Var<S>& w, const Var<S>& b, int stride,
              int pad) {
  using detail::Mat;
  const auto& xs = x->value.shape();
  const auto& ws = w->value.shape();
  check(xs.size() == 3 && ws.size() == 4, ErrorKind::kContract,
        "conv2d: expects (C,H,W) input and (Co,Ci,k,k) weights");
  check(ws[1] == xs[0], ErrorKind::kShape, "conv2d: channel mismatch");
  check(ws[2] == ws[3], ErrorKind::kContract, "conv2d: square kernels only");
  const int k = ws[2], cout = ws[0];
  check(b->value.numel() == cout, ErrorKind::kContract, "conv2d: bias size");
  const int ho = (xs[1] + 2 * pad - k) / stride + 1;
  const int wo = (xs[2] + 2 * pad - k) / stride + 1;
  check(ho >= 1 && wo >= 1, ErrorKind::kShape, "conv2d: output would be empty");

  auto col = std::make_shared<Mat<S>>(
      detail::im2col(x->value, k, stride, pad, ho, wo));
  // Flat (Cout,Cin,k,k) row-major storage viewed column-major is the
  // (Cin*k*k, Cout) transpose of the weight matrix.
  Eigen::Map<const Mat<S>> wm(w->value.data(), ws[1] * k * k, cout);
  Mat<S> out = wm.transpose() * (*col);
  for (int co = 0; co < cout; ++co) out.row(co).array() += b->value[co];

  Tensor<S> result({cout, ho, wo});
  Eigen::Map<Mat<S>>(result.data(), ho * wo, cout) = out.transpose();

  const int stride_c = stride, pad_c = pad;
  return make_op<S>(
      std::move(result), {x, w, b},
      [col, k, stride_c, pad_c, ho, wo, cout](Node<S>& n) {
        auto& xn = *n.parents[0];
        auto& wn = *n.parents[1];
        auto& bn = *n.parents[2];
        Eigen::Map<const Mat<S>> gy(n.grad.data(), ho * wo, cout);
        // dW
        {
          auto& gw = wn.grad_ref();
          const int rows = static_cast<int>(col->rows());
          Eigen::Map<Mat<S>> gwm(gw.data(), rows, cout);
          gwm.noalias() += (*col) * gy;
        }
        // db
        {
          auto& gb = bn.grad_ref();
          for (int co = 0; co < cout; ++co) gb[co] += gy.col(co).sum();
        }
        // dX
        if (xn.requires_grad) {
          Eigen::Map<const Mat<S>> wm(wn.value.data(),
                                      static_cast<int>(col->rows()), cout);
          Mat<S> gcol = wm * gy.transpose();
          detail::col2im_acc(gcol, k, stride_c, pad_c, ho, wo, xn.grad_ref());
        }
      });
}

// Dense layer on rank-1 tensors. x: (in), w: (out,in), b: (out).
template <typename S>
Var<S> linear(const Var<S>& x, const Var<S>& w, const Var<S>& b) {
  using detail::Mat;
  const auto& ws = w->value.shape();
  check(ws.size() == 2 && x->value.numel() == ws[1] && b->value.numel() == ws[0],
        ErrorKind::kContract, "linear: shape mismatch");
  const int out_n = ws[0], in_n = ws[1];
  Eigen::Map<const Mat<S>> wm(w->value.data(), in_n, out_n);
  Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> xv(x->value.data(), in_n);
  Tensor<S> y({out_n});
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(y.data(), out_n) =
      wm.transpose() * xv;
  y.array() += b->value.array();
  return make_op<S>(std::move(y), {x, w, b}, [in_n, out_n](Node<S>& n) {
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> gy(n.grad.data(), out_n);
    auto& xn = *n.parents[0];
    auto& wn = *n.parents[1];
    auto& bn = *n.parents[2];
    {
      Eigen::Map<Mat<S>> gw(wn.grad_ref().data(), in_n, out_n);
      Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> xv(xn.value.data(),
                                                               in_n);
      gw.noalias() += xv * gy.transpose();
    }
    bn.grad_ref().array() += n.grad.array();
    if (xn.requires_grad) {
      Eigen::Map<const Mat<S>> wm(wn.value.data(), in_n, out_n);
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> gx(xn.grad_ref().data(),
                                                         in_n);
      gx.noalias() += wm * gy;
    }
  });
}

}  // namespace rdc::ag

#endif  // RDC_CONV_HPP_
