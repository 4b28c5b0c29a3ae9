// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_METRICS_HPP_
#define RDC_METRICS_HPP_

#include <map>
#include <string>
#include <vector>

#include "rdc/tensor.hpp"

namespace rdc {

// PSNR in dB on [0,1] images; identical inputs are reported as the 100 dB cap
// so CSV fields stay finite.
inline constexpr double kPsnrCap = 100.0;
double psnr(const TensorF& a, const TensorF& b);

struct MsSsimResult {
  double value = 0.0;
  int scales_used = 0;  // < 5 means the image was too small for all scales
};

// Multi-scale SSIM, 11x11 Gaussian window (sigma 1.5), standard five scale
// weights. Small images use fewer scales with renormalized weights.
MsSsimResult ms_ssim_ex(const TensorF& a, const TensorF& b);
double ms_ssim(const TensorF& a, const TensorF& b);

// Non-overlapping 256x256 patches from a top-left anchored grid; remainders
// along each edge are dropped, so a (H,W) image yields
// floor(H/256) * floor(W/256) patches.
std::vector<TensorF> fid_patches(const TensorF& img, int patch = 256);

// One operating point of a codec on a dataset.
struct RDPoint {
  double bpp = 0.0;
  std::map<std::string, double> metrics;
};

// Points sorted by bpp.
struct RDCurve {
  std::string label;
  std::vector<RDPoint> points;

  void sort_by_bpp();
  void validate() const;
};

struct BdRateResult {
  double percent = 0.0;
  bool used_pchip = false;       // cubic fit was non-monotone, fell back
  bool reduced_degree = false;   // fewer than 4 points
};

// Bjontegaard rate difference (percent) between two curves at equal quality,
// integrated over the overlapping range of `metric`.
BdRateResult bd_rate(const RDCurve& reference, const RDCurve& test,
                     const std::string& metric);

}  // namespace rdc

#endif  // RDC_METRICS_HPP_
