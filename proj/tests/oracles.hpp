#pragma once

// Test-only reference implementations. Each one is written independently of
// the library code path it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Reward evaluated as an interval table rather than an if-chain.
inline double reward(double d, double alpha_deg) {
  struct Piece {
    double lo, hi;  // [lo, hi)
    std::function<double(double)> f;
  };
  static const std::vector<Piece> distance = {
      {0.0, 0.5, [](double) { return -1.0; }},
      {0.5, 1.0, [](double x) { return x - 1.0; }},
      {1.0, 1.5, [](double x) { return 0.5 * (x - 1.0); }},
      {1.5, 2.0, [](double x) { return 0.5 * (2.0 - x); }},
      {2.0, 5.0 + 1e-300, [](double x) { return 0.25 - 0.25 * x; }},
  };
  double rd = -1.0;
  for (const auto& p : distance) {
    if (d >= p.lo && d < p.hi) rd = p.f(d);
  }
  if (d == 5.0) rd = -1.0;
  const double a = alpha_deg < 0 ? -alpha_deg : alpha_deg;
  const double ro = a < 25.0 ? 0.5 - a / 50.0 : -a / 720.0;
  const double s = rd + ro;
  return s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
}

// Categorical projection by brute force: every source atom distributes its
// mass to the target atoms by the triangular kernel of width dz.
inline std::vector<double> project(double reward, bool done, const std::vector<double>& probs, double gamma_n,
                                   double v_min, double v_max) {
  const std::size_t n = probs.size();
  const double dz = (v_max - v_min) / static_cast<double>(n - 1);
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double zj = v_min + dz * static_cast<double>(j);
    double tz = reward + (done ? 0.0 : gamma_n * zj);
    tz = std::min(std::max(tz, v_min), v_max);
    for (std::size_t i = 0; i < n; ++i) {
      const double zi = v_min + dz * static_cast<double>(i);
      const double k = 1.0 - std::abs(tz - zi) / dz;
      if (k > 0.0) out[i] += probs[j] * k;
    }
  }
  return out;
}

// Central finite difference of f at x along coordinate i.
template <class F>
double central_diff(F&& f, std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

}  // namespace oracle
