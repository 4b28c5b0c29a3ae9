// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rdc/diffusion.hpp"
#include "rdc/rng.hpp"

using namespace rdc;

namespace {

// Independent oracle: cumulative product in long double over an explicitly
// re-derived linear beta ramp.
long double brute_alpha_bar(int T, double b0, double b1, int t) {
  long double prod = 1.0L;
  for (int s = 0; s <= t; ++s) {
    const long double beta =
        static_cast<long double>(b0) +
        (static_cast<long double>(b1) - b0) * s / (T - 1);
    prod *= 1.0L - beta;
  }
  return prod;
}

}  // namespace

TEST_CASE("linear schedule matches brute-force products") {
  const auto s = make_linear_schedule(1000, 1e-4, 0.02);
  CHECK(s.alpha_bar[0] == doctest::Approx(0.9999).epsilon(1e-12));
  CHECK(s.alpha_bar[0] ==
        doctest::Approx(static_cast<double>(brute_alpha_bar(1000, 1e-4, 0.02, 0))));
  // Terminal alpha_bar from the oracle: ~4e-5, below the 5e-5 noise tolerance.
  const double terminal = static_cast<double>(brute_alpha_bar(1000, 1e-4, 0.02, 999));
  CHECK(terminal < 5e-5);
  CHECK(s.alpha_bar[999] == doctest::Approx(terminal).epsilon(1e-9));
  CHECK(s.terminal_is_noise());
  for (int t : {0, 1, 499, 998, 999})
    CHECK(s.alpha_bar[t] ==
          doctest::Approx(static_cast<double>(brute_alpha_bar(1000, 1e-4, 0.02, t)))
              .epsilon(1e-12));
}

TEST_CASE("two-step schedule product") {
  const auto s = make_linear_schedule(2, 0.5, 0.5);
  CHECK(s.beta[0] == doctest::Approx(0.5));
  CHECK(s.beta[1] == doctest::Approx(0.5));
  CHECK(s.alpha_bar[0] == doctest::Approx(0.5));
  CHECK(s.alpha_bar[1] == doctest::Approx(0.25));
}

TEST_CASE("schedule construction rejects invalid ranges") {
  CHECK_THROWS_AS(make_linear_schedule(1, 1e-4, 0.02), Error);
  CHECK_THROWS_AS(make_linear_schedule(10, 0.0, 0.02), Error);
  CHECK_THROWS_AS(make_linear_schedule(10, 0.02, 1e-4), Error);
  CHECK_THROWS_AS(make_linear_schedule(10, 1e-4, 1.0), Error);
}

TEST_CASE("monotonicity enforced at construction") {
  // The cosine schedule is also strictly decreasing; both constructors run
  // the same validation.
  CHECK_NOTHROW(make_cosine_schedule(100));
  const auto s = make_cosine_schedule(100);
  for (int t = 1; t < s.T; ++t) CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
}

TEST_CASE("forward_sample closed-form cases") {
  const auto s = make_linear_schedule(2, 0.5, 0.5);  // alpha_bar = {0.5, 0.25}
  Eigen::ArrayXd x0(3), eps(3);

  // Zero signal: pure scaled noise.
  x0.setZero();
  eps << 1.0, -2.0, 0.5;
  Eigen::ArrayXd out = forward_sample(x0, 1, eps, s);
  for (int i = 0; i < 3; ++i)
    CHECK(out[i] == doctest::Approx(std::sqrt(0.75) * eps[i]));

  // Noiseless: pure scaled signal.
  x0 << 1.0, -1.0, 2.0;
  eps.setZero();
  out = forward_sample(x0, 1, eps, s);
  for (int i = 0; i < 3; ++i)
    CHECK(out[i] == doctest::Approx(0.5 * x0[i]));

  // Hand evaluation at alpha_bar = 0.25: 0.5 + sqrt(0.75).
  x0.setOnes();
  eps.setOnes();
  out = forward_sample(x0, 1, eps, s);
  CHECK(out[0] == doctest::Approx(1.3660254037844386).epsilon(1e-12));
}

TEST_CASE("forward_sample rejects shape mismatch") {
  const auto s = make_linear_schedule(10, 1e-4, 0.02);
  Eigen::ArrayXf a(3), b(4);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(forward_sample(a, 0, b, s), Error);
}

TEST_CASE("predict_x0_from_eps inverts forward_sample") {
  const auto s = make_linear_schedule(1000, 1e-4, 0.02);
  Rng rng(7);
  Eigen::ArrayXf x0(64), eps(64);
  for (int i = 0; i < 64; ++i) {
    x0[i] = static_cast<float>(rng.normal());
    eps[i] = static_cast<float>(rng.normal());
  }
  for (int t : {0, 10, 250, 700, 999}) {
    Eigen::ArrayXf xt = forward_sample(x0, t, eps, s);
    Eigen::ArrayXf rec = predict_x0_from_eps(xt, eps, t, s);
    CHECK((rec - x0).abs().maxCoeff() < 1e-5f);
  }
  // Hand value: x_t = 1, eps = 0, alpha_bar = 0.25 -> 2.
  const auto s2 = make_linear_schedule(2, 0.5, 0.5);
  Eigen::ArrayXd xt(1), eh(1);
  xt << 1.0;
  eh << 0.0;
  CHECK(predict_x0_from_eps(xt, eh, 1, s2)[0] == doctest::Approx(2.0));
}

TEST_CASE("predict_x0_from_eps flags vanishing alpha_bar") {
  NoiseSchedule s;
  s.T = 2;
  s.beta.resize(2);
  s.beta << 0.5, 0.5;
  s.alpha_bar.resize(2);
  s.alpha_bar << 1e-13, 1e-14;  // below the numeric floor
  Eigen::ArrayXd x(1), e(1);
  x << 1.0;
  e << 0.0;
  CHECK_THROWS_AS(predict_x0_from_eps(x, e, 1, s), Error);
}

TEST_CASE("v conversion endpoints and round trip") {
  // Endpoints via a synthetic schedule holding the exact boundary values.
  NoiseSchedule s;
  s.T = 2;
  s.beta.resize(2);
  s.beta << 0.1, 0.1;
  s.alpha_bar.resize(2);
  s.alpha_bar << 1.0, 0.0;
  Eigen::ArrayXd x0(2), eps(2);
  x0 << 0.3, -1.5;
  eps << 1.25, 0.5;
  // alpha_bar = 1 -> v = eps.
  Eigen::ArrayXd v = v_from_x0_eps(x0, eps, 0, s);
  CHECK(v[0] == doctest::Approx(eps[0]));
  CHECK(v[1] == doctest::Approx(eps[1]));
  // alpha_bar = 0 -> v = -x0.
  v = v_from_x0_eps(x0, eps, 1, s);
  CHECK(v[0] == doctest::Approx(-x0[0]));
  CHECK(v[1] == doctest::Approx(-x0[1]));

  // Round trip on a real schedule in float32.
  const auto sl = make_linear_schedule(1000, 1e-4, 0.02);
  Rng rng(11);
  Eigen::ArrayXf a(128), b(128);
  for (int i = 0; i < 128; ++i) {
    a[i] = static_cast<float>(rng.normal());
    b[i] = static_cast<float>(rng.normal());
  }
  for (int t : {0, 123, 500, 999}) {
    Eigen::ArrayXf xt = forward_sample(a, t, b, sl);
    Eigen::ArrayXf v32 = v_from_x0_eps(a, b, t, sl);
    auto [x0r, epsr] = x0_eps_from_v(xt, v32, t, sl);
    CHECK((x0r - a).abs().maxCoeff() < 1e-5f);
    CHECK((epsr - b).abs().maxCoeff() < 1e-5f);
  }
}

TEST_CASE("ddim_step with oracle noise lands on the forward marginal") {
  const auto s = make_linear_schedule(1000, 1e-4, 0.02);
  Rng rng(3);
  auto x0 = rng.normal_tensor<float>({2, 4, 4});
  auto eps = rng.normal_tensor<float>({2, 4, 4});
  const int t = 800, t_prev = 300;
  TensorF xt(x0.shape(), forward_sample(x0.array(), t, eps.array(), s));
  TensorF stepped = ddim_step(xt, eps, t, t_prev, s, 0.0);
  TensorF expect(x0.shape(), forward_sample(x0.array(), t_prev, eps.array(), s));
  CHECK((stepped.array() - expect.array()).abs().maxCoeff() < 1e-5f);

  // t_prev = -1 is the clean boundary: returns x0_hat exactly.
  TensorF final = ddim_step(xt, eps, t, -1, s, 0.0);
  CHECK((final.array() - x0.array()).abs().maxCoeff() < 1e-5f);

  // Index order violation.
  CHECK_THROWS_AS(ddim_step(xt, eps, 300, 800, s, 0.0), Error);
}

TEST_CASE("single oracle step from T-1 recovers x0") {
  const auto s = make_linear_schedule(50, 1e-3, 0.05);
  Rng rng(5);
  auto x0 = rng.normal_tensor<float>({1, 8, 8});
  auto eps = rng.normal_tensor<float>({1, 8, 8});
  TensorF xt(x0.shape(), forward_sample(x0.array(), s.T - 1, eps.array(), s));
  TensorF rec = ddim_step(xt, eps, s.T - 1, -1, s, 0.0);
  CHECK((rec.array() - x0.array()).abs().maxCoeff() < 1e-5f);
}

TEST_CASE("ddim determinism") {
  const auto s = make_linear_schedule(100, 1e-4, 0.02);
  Rng rng(9);
  auto xt = rng.normal_tensor<float>({3, 8, 8});
  auto eps = rng.normal_tensor<float>({3, 8, 8});
  TensorF a = ddim_step(xt, eps, 60, 20, s, 0.0);
  TensorF b = ddim_step(xt, eps, 60, 20, s, 0.0);
  for (Eigen::Index i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("subsample_timesteps spacing and endpoints") {
  auto full = subsample_timesteps(1000, 1000);
  CHECK(full.size() == 1000);
  for (int k = 0; k < 1000; ++k) CHECK(full[static_cast<size_t>(k)] == 999 - k);

  auto two = subsample_timesteps(10, 2);
  CHECK(two == std::vector<int>({9, 0}));

  auto hundred = subsample_timesteps(1000, 100);
  CHECK(hundred.size() == 100);
  CHECK(hundred.front() == 999);
  CHECK(hundred.back() == 0);
  int gmin = 1 << 30, gmax = 0;
  for (size_t i = 1; i < hundred.size(); ++i) {
    const int g = hundred[i - 1] - hundred[i];
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  CHECK(gmax - gmin <= 1);

  CHECK(subsample_timesteps(10, 1) == std::vector<int>({9}));
  CHECK_THROWS_AS(subsample_timesteps(10, 11), Error);
}

namespace {

// Conditional expectation of eps for a two-point prior x0 in {-1, +1}:
// E[x0 | x_t] = tanh(sqrt(abar) x_t / (1 - abar)).
double oracle_eps_pm1(double xt, double abar) {
  const double ex0 = std::tanh(std::sqrt(abar) * xt / (1.0 - abar));
  return (xt - std::sqrt(abar) * ex0) / std::sqrt(1.0 - abar);
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ks = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    ks = std::max(ks, std::abs(fa - fb));
  }
  return ks;
}

}  // namespace

TEST_CASE("ddim eta=1 with N=T matches ancestral sampling marginals") {
  const int T = 50;
  const auto s = make_linear_schedule(T, 5e-3, 0.25);
  const int n = 4000;
  Rng rng_ddim(100), rng_ddpm(200);

  std::vector<double> ddim_samples, ddpm_samples;
  for (int k = 0; k < n; ++k) {
    // DDIM chain, eta = 1, all T steps.
    TensorD x = TensorD::scalar(rng_ddim.normal());
    for (int t = T - 1; t >= 0; --t) {
      const double eh = oracle_eps_pm1(x[0], s.alpha_bar[t]);
      TensorD eps_hat = TensorD::scalar(eh);
      TensorD noise = TensorD::scalar(t > 0 ? rng_ddim.normal() : 0.0);
      x = ddim_step(x, eps_hat, t, t - 1, s, t > 0 ? 1.0 : 0.0, &noise);
    }
    ddim_samples.push_back(x[0]);

    // Ancestral DDPM chain with the same oracle.
    double y = rng_ddpm.normal();
    for (int t = T - 1; t >= 0; --t) {
      const double ab = s.alpha_bar[t];
      const double ab_prev = t > 0 ? s.alpha_bar[t - 1] : 1.0;
      const double alpha = 1.0 - s.beta[t];
      const double eh = oracle_eps_pm1(y, ab);
      double mean = (y - s.beta[t] / std::sqrt(1.0 - ab) * eh) / std::sqrt(alpha);
      if (t > 0) {
        const double var = (1.0 - ab_prev) / (1.0 - ab) * s.beta[t];
        mean += std::sqrt(var) * rng_ddpm.normal();
      }
      y = mean;
    }
    ddpm_samples.push_back(y);
  }

  const double ks = two_sample_ks(ddim_samples, ddpm_samples);
  // Critical value at alpha = 0.001 for n = m = 4000 is about 0.0436.
  CHECK(ks < 0.05);
  // Both should concentrate near the two-point prior.
  double frac_near = 0.0;
  for (double v : ddim_samples)
    if (std::abs(std::abs(v) - 1.0) < 0.35) frac_near += 1.0;
  CHECK(frac_near / n > 0.9);
}
