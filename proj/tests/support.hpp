#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "qjm/rng.hpp"

namespace qjm::testing {

// One-sample Kolmogorov-Smirnov distance against a CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                  std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// CDF of an unnormalized log density tabulated on a fine grid over [lo, hi]
// (trapezoid rule, linear interpolation between nodes).
class GridDistribution {
 public:
  GridDistribution(const std::function<double(double)>& log_density, double lo, double hi,
                   std::size_t nodes = 40001)
      : lo_(lo), h_((hi - lo) / static_cast<double>(nodes - 1)), cdf_(nodes, 0.0) {
    std::vector<double> lp(nodes);
    double top = -INFINITY;
    for (std::size_t k = 0; k < nodes; ++k) {
      lp[k] = log_density(lo + h_ * static_cast<double>(k));
      top = std::max(top, lp[k]);
    }
    double prev = std::exp(lp[0] - top);
    for (std::size_t k = 1; k < nodes; ++k) {
      const double cur = std::exp(lp[k] - top);
      cdf_[k] = cdf_[k - 1] + 0.5 * h_ * (prev + cur);
      prev = cur;
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double cdf(double x) const {
    if (x <= lo_) return 0.0;
    const double pos = (x - lo_) / h_;
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= cdf_.size()) return 1.0;
    const double f = pos - static_cast<double>(k);
    return cdf_[k] + f * (cdf_[k + 1] - cdf_[k]);
  }

  // Inverse-CDF draw by bisection on the tabulated CDF.
  double sample(RngStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cdf_.begin()));
    const double c0 = cdf_[k - 1], c1 = cdf_[k];
    const double f = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    return lo_ + h_ * (static_cast<double>(k - 1) + f);
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 1; k < cdf_.size(); ++k) {
      m += (cdf_[k] - cdf_[k - 1]) * (lo_ + h_ * (static_cast<double>(k) - 0.5));
    }
    return m;
  }

 private:
  double lo_;
  double h_;
  std::vector<double> cdf_;
};

inline double sample_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace qjm::testing
