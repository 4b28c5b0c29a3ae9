// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_RNG_HPP_
#define RDC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "rdc/tensor.hpp"

namespace rdc {

// Deterministic RNG with hand-rolled distributions. std:: distributions are
// implementation-defined, so sampling goes through explicit formulas to keep
// seeded runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  uint64_t bits() { return gen_(); }

  // Integer in [0, n).
  int64_t below(int64_t n) {
    return static_cast<int64_t>(uniform() * static_cast<double>(n)) % n;
  }

  template <typename S>
  Tensor<S> normal_tensor(std::vector<int> shape) {
    Tensor<S> t(std::move(shape));
    for (Eigen::Index i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(normal());
    return t;
  }

  template <typename S>
  Tensor<S> uniform_tensor(std::vector<int> shape, double lo, double hi) {
    Tensor<S> t(std::move(shape));
    for (Eigen::Index i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(uniform(lo, hi));
    return t;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rdc

#endif  // RDC_RNG_HPP_
