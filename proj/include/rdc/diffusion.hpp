// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_DIFFUSION_HPP_
#define RDC_DIFFUSION_HPP_

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <vector>

#include "rdc/common.hpp"
#include "rdc/tensor.hpp"

namespace rdc {

// Numeric floor for square roots and divisions of schedule quantities.
inline constexpr double kScheduleFloor = 1e-12;

// Variance schedule of the diffusion chain. beta[t] is the per-step noise
// variance, alpha_bar[t] the cumulative product of (1 - beta[s]) for s <= t.
// All downstream diffusion arithmetic is a pure function of this struct.
struct NoiseSchedule {
  int T = 0;
  Eigen::ArrayXd beta;
  Eigen::ArrayXd alpha_bar;

  // alpha_bar for a step index, with t == -1 denoting the clean-signal
  // boundary (alpha_bar = 1) used by the final sampler step.
  double abar(int t) const {
    if (t < 0) return 1.0;
    check(t < T, ErrorKind::kContract, "timestep out of range");
    return alpha_bar[t];
  }

  // True when the chain ends close enough to pure noise for sampling to
  // start from N(0, I).
  bool terminal_is_noise(double tol = 5e-5) const {
    return alpha_bar[T - 1] < tol;
  }
};

namespace detail {
inline void validate_schedule(NoiseSchedule& s) {
  check(s.T >= 2, ErrorKind::kParameter, "schedule needs T >= 2");
  double prev = 1.0;
  for (int t = 0; t < s.T; ++t) {
    check(s.beta[t] > 0.0 && s.beta[t] < 1.0, ErrorKind::kParameter,
          "beta must lie strictly in (0,1)");
    check(s.alpha_bar[t] < prev, ErrorKind::kParameter,
          "alpha_bar must be strictly decreasing");
    check(s.alpha_bar[t] > 0.0, ErrorKind::kParameter,
          "alpha_bar must stay positive");
    prev = s.alpha_bar[t];
  }
}
}  // namespace detail

inline NoiseSchedule make_linear_schedule(int T, double beta_start = 1e-4,
                                          double beta_end = 0.02) {
  check(T >= 2, ErrorKind::kParameter, "linear schedule needs T >= 2");
  check(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
        ErrorKind::kParameter, "need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.T = T;
  s.beta = Eigen::ArrayXd::LinSpaced(T, beta_start, beta_end);
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (int t = 0; t < T; ++t) {
    prod *= 1.0 - s.beta[t];
    s.alpha_bar[t] = prod;
  }
  detail::validate_schedule(s);
  return s;
}

// Squared-cosine alpha_bar schedule; optional alternative, never the default.
inline NoiseSchedule make_cosine_schedule(int T, double offset = 0.008,
                                          double max_beta = 0.999) {
  check(T >= 2, ErrorKind::kParameter, "cosine schedule needs T >= 2");
  auto f = [&](double t) {
    const double v = std::cos((t / T + offset) / (1.0 + offset) * M_PI / 2.0);
    return v * v;
  };
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (int t = 0; t < T; ++t) {
    double b = 1.0 - f(t + 1.0) / f(static_cast<double>(t));
    b = std::min(b, max_beta);
    s.beta[t] = b;
    prod *= 1.0 - b;
    s.alpha_bar[t] = prod;
  }
  detail::validate_schedule(s);
  return s;
}

inline NoiseSchedule make_schedule(const std::string& kind, int T,
                                   double beta_start = 1e-4,
                                   double beta_end = 0.02) {
  if (kind == "linear") return make_linear_schedule(T, beta_start, beta_end);
  if (kind == "cosine") return make_cosine_schedule(T);
  fail(ErrorKind::kParameter, "unknown schedule kind: " + kind);
}

// How the denoising network output is interpreted.
enum class Parameterization { kEpsilon, kX0, kV };

inline const char* parameterization_name(Parameterization p) {
  switch (p) {
    case Parameterization::kEpsilon: return "epsilon";
    case Parameterization::kX0: return "x0";
    case Parameterization::kV: return "v";
  }
  return "?";
}

// Sampler settings. gamma scales the starting noise only; gamma == 0 together
// with eta == 0 makes decoding a pure function of its inputs.
struct SamplerConfig {
  int num_steps = 100;
  double gamma = 0.8;
  double eta = 0.0;
};

// ---- Pointwise diffusion arithmetic over Eigen array expressions. ----

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
template <typename D1, typename D2>
typename D1::PlainObject forward_sample(const Eigen::ArrayBase<D1>& x0, int t,
                                        const Eigen::ArrayBase<D2>& eps,
                                        const NoiseSchedule& s) {
  using S = typename D1::Scalar;
  check(x0.size() == eps.size(), ErrorKind::kContract,
        "forward_sample: x0/eps size mismatch");
  check(t >= 0 && t < s.T, ErrorKind::kContract, "forward_sample: t out of range");
  const double ab = s.alpha_bar[t];
  const S a = static_cast<S>(std::sqrt(ab));
  const S b = static_cast<S>(std::sqrt(1.0 - ab));
  return a * x0.derived() + b * eps.derived();
}

// Inverts forward_sample for a known noise estimate.
template <typename D1, typename D2>
typename D1::PlainObject predict_x0_from_eps(const Eigen::ArrayBase<D1>& x_t,
                                             const Eigen::ArrayBase<D2>& eps_hat,
                                             int t, const NoiseSchedule& s) {
  using S = typename D1::Scalar;
  check(x_t.size() == eps_hat.size(), ErrorKind::kContract,
        "predict_x0_from_eps: size mismatch");
  const double ab = s.abar(t);
  check(ab > kScheduleFloor, ErrorKind::kSingularity,
        "predict_x0_from_eps: alpha_bar below numeric floor");
  const S inv = static_cast<S>(1.0 / std::sqrt(ab));
  const S b = static_cast<S>(std::sqrt(std::max(1.0 - ab, 0.0)));
  return (x_t.derived() - b * eps_hat.derived()) * inv;
}

// v = sqrt(abar) eps - sqrt(1 - abar) x0.
template <typename D1, typename D2>
typename D1::PlainObject v_from_x0_eps(const Eigen::ArrayBase<D1>& x0,
                                       const Eigen::ArrayBase<D2>& eps, int t,
                                       const NoiseSchedule& s) {
  using S = typename D1::Scalar;
  check(x0.size() == eps.size(), ErrorKind::kContract, "v_convert: size mismatch");
  const double ab = s.abar(t);
  const S a = static_cast<S>(std::sqrt(ab));
  const S b = static_cast<S>(std::sqrt(std::max(1.0 - ab, 0.0)));
  return a * eps.derived() - b * x0.derived();
}

// Joint inverse of v_from_x0_eps and forward_sample: recovers (x0, eps) from
// (x_t, v). The pair (x_t, v) is a rotation of (x0, eps), so the inverse is
// x0 = sqrt(abar) x_t - sqrt(1-abar) v, eps = sqrt(1-abar) x_t + sqrt(abar) v.
template <typename D1, typename D2>
std::pair<typename D1::PlainObject, typename D1::PlainObject> x0_eps_from_v(
    const Eigen::ArrayBase<D1>& x_t, const Eigen::ArrayBase<D2>& v_hat, int t,
    const NoiseSchedule& s) {
  using S = typename D1::Scalar;
  check(x_t.size() == v_hat.size(), ErrorKind::kContract,
        "x0_eps_from_v: size mismatch");
  const double ab = s.abar(t);
  const S a = static_cast<S>(std::sqrt(ab));
  const S b = static_cast<S>(std::sqrt(std::max(1.0 - ab, 0.0)));
  typename D1::PlainObject x0 = a * x_t.derived() - b * v_hat.derived();
  typename D1::PlainObject eps = b * x_t.derived() + a * v_hat.derived();
  return {std::move(x0), std::move(eps)};
}

// DDIM noise scale for a (t -> t_prev) jump.
inline double ddim_sigma(int t, int t_prev, const NoiseSchedule& s, double eta) {
  const double at = s.abar(t);
  const double ap = s.abar(t_prev);
  const double r = (1.0 - ap) / std::max(1.0 - at, kScheduleFloor);
  return eta * std::sqrt(std::max(r, 0.0)) * std::sqrt(std::max(1.0 - at / ap, 0.0));
}

// One DDIM update from step t to t_prev (t_prev == -1 is the clean boundary,
// where the update returns the x0 estimate exactly). noise may be null when
// eta == 0.
template <typename S>
Tensor<S> ddim_step(const Tensor<S>& x_t, const Tensor<S>& eps_hat, int t,
                    int t_prev, const NoiseSchedule& s, double eta = 0.0,
                    const Tensor<S>* noise = nullptr) {
  check(t_prev < t, ErrorKind::kContract, "ddim_step: t_prev must be < t");
  check(x_t.same_shape(eps_hat), ErrorKind::kContract, "ddim_step: shape mismatch");
  const double ap = s.abar(t_prev);
  const double sigma = eta == 0.0 ? 0.0 : ddim_sigma(t, t_prev, s, eta);
  const double eps_coef_sq = std::max(1.0 - ap - sigma * sigma, 0.0);

  auto x0_hat = predict_x0_from_eps(x_t.array(), eps_hat.array(), t, s);
  typename Tensor<S>::Array out = static_cast<S>(std::sqrt(ap)) * x0_hat +
                                  static_cast<S>(std::sqrt(eps_coef_sq)) *
                                      eps_hat.array();
  if (sigma > 0.0) {
    check(noise != nullptr && noise->same_shape(x_t), ErrorKind::kContract,
          "ddim_step: eta > 0 requires noise of matching shape");
    out += static_cast<S>(sigma) * noise->array();
  }
  return Tensor<S>(x_t.shape(), std::move(out));
}

// Evenly spaced, strictly decreasing timestep subsequence starting at T-1.
// The sampler appends the t == -1 boundary itself, so N == 1 yields {T-1}.
inline std::vector<int> subsample_timesteps(int T, int N) {
  check(T >= 1 && N >= 1, ErrorKind::kParameter, "subsample: T, N must be >= 1");
  check(N <= T, ErrorKind::kParameter, "subsample: N must not exceed T");
  std::vector<int> ts(static_cast<size_t>(N));
  if (N == 1) {
    ts[0] = T - 1;
    return ts;
  }
  const double span = static_cast<double>(T - 1);
  for (int k = 0; k < N; ++k) {
    ts[static_cast<size_t>(k)] =
        static_cast<int>(std::llround(span * (1.0 - static_cast<double>(k) / (N - 1))));
  }
  for (int k = 1; k < N; ++k)
    check(ts[k] < ts[k - 1], ErrorKind::kParameter,
          "subsample produced a non-decreasing sequence");
  return ts;
}

}  // namespace rdc

#endif  // RDC_DIFFUSION_HPP_
