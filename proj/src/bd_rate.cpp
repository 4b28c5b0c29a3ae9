// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rdc/metrics.hpp"

namespace rdc {

namespace {

struct Samples {
  std::vector<double> q;     // quality metric, ascending
  std::vector<double> logr;  // log10 bitrate
};

Samples extract(const RDCurve& c, const std::string& metric) {
  c.validate();
  Samples s;
  for (const auto& p : c.points) {
    auto it = p.metrics.find(metric);
    check(it != p.metrics.end(), ErrorKind::kParameter,
          "curve point missing metric " + metric);
    s.q.push_back(it->second);
    s.logr.push_back(std::log10(p.bpp));
  }
  std::vector<size_t> idx(s.q.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return s.q[a] < s.q[b]; });
  Samples out;
  for (size_t i : idx) {
    out.q.push_back(s.q[i]);
    out.logr.push_back(s.logr[i]);
  }
  for (size_t i = 1; i < out.q.size(); ++i)
    check(out.q[i] > out.q[i - 1], ErrorKind::kParameter,
          "bd_rate: duplicate quality values");
  return out;
}

// Least-squares polynomial fit, coefficients ascending.
Eigen::VectorXd polyfit(const std::vector<double>& x,
                        const std::vector<double>& y, int degree) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd vand(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      vand(i, d) = p;
      p *= x[static_cast<size_t>(i)];
    }
  }
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  return vand.colPivHouseholderQr().solve(yv);
}

double polyval(const Eigen::VectorXd& c, double x) {
  double v = 0.0;
  for (Eigen::Index d = c.size() - 1; d >= 0; --d) v = v * x + c[d];
  return v;
}

double poly_integral(const Eigen::VectorXd& c, double lo, double hi) {
  double vhi = 0.0, vlo = 0.0;
  for (Eigen::Index d = 0; d < c.size(); ++d) {
    vhi += c[d] * std::pow(hi, static_cast<double>(d + 1)) / (d + 1);
    vlo += c[d] * std::pow(lo, static_cast<double>(d + 1)) / (d + 1);
  }
  return vhi - vlo;
}

bool poly_monotone(const Eigen::VectorXd& c, double lo, double hi) {
  // Sample the derivative; a sign flip marks a non-monotone fit.
  int sign = 0;
  for (int i = 0; i <= 64; ++i) {
    const double x = lo + (hi - lo) * i / 64.0;
    double d = 0.0;
    for (Eigen::Index k = 1; k < c.size(); ++k)
      d += k * c[k] * std::pow(x, static_cast<double>(k - 1));
    if (std::abs(d) < 1e-12) continue;
    const int s = d > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

// Fritsch-Carlson monotone cubic hermite slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const size_t n = x.size();
  std::vector<double> d(n, 0.0), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i)
    delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
      const double w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return d;
}

// Integral of the hermite interpolant over [lo, hi] intersected with each
// segment, in closed form via the cubic's polynomial coefficients.
double pchip_integral(const std::vector<double>& x, const std::vector<double>& y,
                      double lo, double hi) {
  const auto d = pchip_slopes(x, y);
  double total = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = std::max(lo, x[i]);
    const double b = std::min(hi, x[i + 1]);
    if (a >= b) continue;
    const double h = x[i + 1] - x[i];
    // Hermite basis in t = (q - x_i) / h: y = c0 + c1 t + c2 t^2 + c3 t^3.
    const double c0 = y[i];
    const double c1 = h * d[i];
    const double c2 = 3.0 * (y[i + 1] - y[i]) - h * (2.0 * d[i] + d[i + 1]);
    const double c3 = -2.0 * (y[i + 1] - y[i]) + h * (d[i] + d[i + 1]);
    auto anti = [&](double q) {
      const double t = (q - x[i]) / h;
      return h * (c0 * t + c1 * t * t / 2.0 + c2 * t * t * t / 3.0 +
                  c3 * t * t * t * t / 4.0);
    };
    total += anti(b) - anti(a);
  }
  return total;
}

}  // namespace

BdRateResult bd_rate(const RDCurve& reference, const RDCurve& test,
                     const std::string& metric) {
  const Samples ref = extract(reference, metric);
  const Samples tst = extract(test, metric);
  check(ref.q.size() >= 2 && tst.q.size() >= 2, ErrorKind::kParameter,
        "bd_rate needs at least 2 points per curve");

  const double lo = std::max(ref.q.front(), tst.q.front());
  const double hi = std::min(ref.q.back(), tst.q.back());
  check(lo < hi, ErrorKind::kParameter,
        "bd_rate: curves have no overlapping quality range");

  BdRateResult res;
  const int deg_ref = std::min<int>(3, static_cast<int>(ref.q.size()) - 1);
  const int deg_tst = std::min<int>(3, static_cast<int>(tst.q.size()) - 1);
  res.reduced_degree = deg_ref < 3 || deg_tst < 3;

  const auto pref = polyfit(ref.q, ref.logr, deg_ref);
  const auto ptst = polyfit(tst.q, tst.logr, deg_tst);

  double int_ref = 0.0, int_tst = 0.0;
  if (poly_monotone(pref, lo, hi) && poly_monotone(ptst, lo, hi)) {
    int_ref = poly_integral(pref, lo, hi);
    int_tst = poly_integral(ptst, lo, hi);
  } else {
    res.used_pchip = true;
    int_ref = pchip_integral(ref.q, ref.logr, lo, hi);
    int_tst = pchip_integral(tst.q, tst.logr, lo, hi);
  }
  const double avg_diff = (int_tst - int_ref) / (hi - lo);
  res.percent = (std::pow(10.0, avg_diff) - 1.0) * 100.0;
  return res;
}

}  // namespace rdc
