#include "qjm/ald.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qjm/distributions.hpp"
#include "qjm/error.hpp"

namespace qjm {

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("quantile level must lie in (0, 1), got " + std::to_string(tau));
  }
}

void require_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("ALD scale must be positive");
  }
}

}  // namespace

QuantileLevel::QuantileLevel(double tau) : tau_(tau) {
  require_tau(tau);
  const double v = tau * (1.0 - tau);
  xi_ = (1.0 - 2.0 * tau) / v;
  phi_ = 2.0 / v;
}

double check_loss(double u, double tau) noexcept {
  return u >= 0.0 ? u * tau : u * (tau - 1.0);
}

double ald_logpdf(double y, double location, double scale, double tau) {
  require_tau(tau);
  require_scale(scale);
  return std::log(tau * (1.0 - tau) / scale) - check_loss(y - location, tau) / scale;
}

double ald_cdf(double y, double location, double scale, double tau) {
  require_tau(tau);
  require_scale(scale);
  const double u = y - location;
  if (u < 0.0) return tau * std::exp((1.0 - tau) * u / scale);
  return 1.0 - (1.0 - tau) * std::exp(-tau * u / scale);
}

double ald_quantile(double p, double location, double scale, double tau) {
  require_tau(tau);
  require_scale(scale);
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ALD quantile needs p in (0, 1)");
  if (p < tau) return location + scale * std::log(p / tau) / (1.0 - tau);
  return location - scale * std::log((1.0 - p) / (1.0 - tau)) / tau;
}

MixtureDraw mixture_draw(double location, double scale, const QuantileLevel& q, RngStream& rng) {
  require_scale(scale);
  const double w = draw_exponential(1.0 / scale, rng);
  const double y = location + q.xi() * w + std::sqrt(scale * q.phi() * w) * rng.standard_normal();
  return {y, w};
}

}  // namespace qjm
