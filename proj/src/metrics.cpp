// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include "rdc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rdc {

double psnr(const TensorF& a, const TensorF& b) {
  check(a.same_shape(b), ErrorKind::kContract, "psnr: shape mismatch");
  double mse = 0.0;
  for (Eigen::Index i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.numel());
  if (mse <= 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01, kK2 = 0.03;
const double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

std::vector<double> gauss_kernel() {
  std::vector<double> k(kWin);
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double x = i - (kWin - 1) / 2.0;
    k[static_cast<size_t>(i)] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (auto& e : k) e /= sum;
  return k;
}

// Separable valid-region Gaussian filter.
Plane filter(const Plane& p) {
  static const std::vector<double> k = gauss_kernel();
  Plane tmp{p.h, p.w - kWin + 1, {}};
  tmp.v.assign(static_cast<size_t>(tmp.h) * tmp.w, 0.0);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += k[static_cast<size_t>(i)] * p.at(y, x + i);
      tmp.at(y, x) = s;
    }
  Plane out{p.h - kWin + 1, tmp.w, {}};
  out.v.assign(static_cast<size_t>(out.h) * out.w, 0.0);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += k[static_cast<size_t>(i)] * tmp.at(y + i, x);
      out.at(y, x) = s;
    }
  return out;
}

Plane downsample2(const Plane& p) {
  Plane out{p.h / 2, p.w / 2, {}};
  out.v.assign(static_cast<size_t>(out.h) * out.w, 0.0);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.at(y, x) = 0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) +
                             p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1));
  return out;
}

Plane channel_plane(const TensorF& img, int c) {
  Plane p{img.dim(1), img.dim(2), {}};
  p.v.resize(static_cast<size_t>(p.h) * p.w);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) p.at(y, x) = img.at(c, y, x);
  return p;
}

// Mean luminance term and mean contrast-structure term over one scale.
void ssim_scale(const Plane& a, const Plane& b, double* lum, double* cs) {
  const double c1 = kK1 * kK1, c2 = kK2 * kK2;
  Plane mua = filter(a), mub = filter(b);
  Plane a2 = a, b2 = b, ab = a;
  for (size_t i = 0; i < a.v.size(); ++i) {
    a2.v[i] = a.v[i] * a.v[i];
    b2.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  Plane sa2 = filter(a2), sb2 = filter(b2), sab = filter(ab);
  double lsum = 0.0, csum = 0.0;
  const size_t n = mua.v.size();
  for (size_t i = 0; i < n; ++i) {
    const double ma = mua.v[i], mb = mub.v[i];
    const double va = sa2.v[i] - ma * ma;
    const double vb = sb2.v[i] - mb * mb;
    const double cov = sab.v[i] - ma * mb;
    lsum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    csum += (2.0 * cov + c2) / (va + vb + c2);
  }
  *lum = lsum / static_cast<double>(n);
  *cs = csum / static_cast<double>(n);
}

}  // namespace

MsSsimResult ms_ssim_ex(const TensorF& a, const TensorF& b) {
  check(a.same_shape(b), ErrorKind::kContract, "ms_ssim: shape mismatch");
  check(a.rank() == 3, ErrorKind::kContract, "ms_ssim: (C,H,W) expected");
  const int C = a.dim(0);

  int scales = 0;
  for (int h = a.dim(1), w = a.dim(2); scales < 5 && h >= kWin && w >= kWin;
       h /= 2, w /= 2)
    ++scales;
  check(scales >= 1, ErrorKind::kContract, "ms_ssim: image smaller than window");

  double wsum = 0.0;
  for (int s = 0; s < scales; ++s) wsum += kMsWeights[s];

  std::vector<Plane> pa(static_cast<size_t>(C)), pb(static_cast<size_t>(C));
  for (int c = 0; c < C; ++c) {
    pa[static_cast<size_t>(c)] = channel_plane(a, c);
    pb[static_cast<size_t>(c)] = channel_plane(b, c);
  }

  double value = 1.0;
  for (int s = 0; s < scales; ++s) {
    double lum = 0.0, cs = 0.0;
    for (int c = 0; c < C; ++c) {
      double l = 0.0, x = 0.0;
      ssim_scale(pa[static_cast<size_t>(c)], pb[static_cast<size_t>(c)], &l, &x);
      lum += l / C;
      cs += x / C;
    }
    const double w = kMsWeights[s] / wsum;
    // Contrast-structure at every scale; luminance only at the coarsest.
    const double term = (s == scales - 1) ? lum * cs : cs;
    value *= std::pow(std::max(term, 0.0), w);
    if (s < scales - 1) {
      for (int c = 0; c < C; ++c) {
        pa[static_cast<size_t>(c)] = downsample2(pa[static_cast<size_t>(c)]);
        pb[static_cast<size_t>(c)] = downsample2(pb[static_cast<size_t>(c)]);
      }
    }
  }
  return {value, scales};
}

double ms_ssim(const TensorF& a, const TensorF& b) { return ms_ssim_ex(a, b).value; }

std::vector<TensorF> fid_patches(const TensorF& img, int patch) {
  check(img.rank() == 3, ErrorKind::kContract, "fid_patches: (C,H,W) expected");
  check(patch >= 1, ErrorKind::kParameter, "fid_patches: patch size >= 1");
  const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
  std::vector<TensorF> out;
  for (int py = 0; py + patch <= H; py += patch)
    for (int px = 0; px + patch <= W; px += patch) {
      TensorF p({C, patch, patch});
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < patch; ++y)
          for (int x = 0; x < patch; ++x)
            p.at(c, y, x) = img.at(c, py + y, px + x);
      out.push_back(std::move(p));
    }
  return out;
}

void RDCurve::sort_by_bpp() {
  std::sort(points.begin(), points.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
}

void RDCurve::validate() const {
  for (const auto& p : points) {
    check(p.bpp > 0.0 && std::isfinite(p.bpp), ErrorKind::kParameter,
          "RD point needs positive finite bpp");
    for (const auto& [k, v] : p.metrics)
      check(std::isfinite(v), ErrorKind::kParameter, "RD metric " + k + " not finite");
  }
  for (size_t i = 1; i < points.size(); ++i)
    check(points[i - 1].bpp <= points[i].bpp, ErrorKind::kParameter,
          "RD curve must be sorted by bpp");
}

}  // namespace rdc
