#pragma once

#include "qjm/rng.hpp"

namespace qjm {

/// Quantile level tau with the two constants of the normal-exponential
/// mixture representation of the asymmetric Laplace law:
///   xi  = (1 - 2 tau) / (tau (1 - tau))
///   phi = 2 / (tau (1 - tau))
class QuantileLevel {
 public:
  /// Throws ConfigError unless 0 < tau < 1.
  explicit QuantileLevel(double tau);

  double tau() const noexcept { return tau_; }
  double xi() const noexcept { return xi_; }
  double phi() const noexcept { return phi_; }

 private:
  double tau_;
  double xi_;
  double phi_;
};

/// Pinball loss: u*tau for u >= 0, u*(tau - 1) for u < 0. Always >= 0.
double check_loss(double u, double tau) noexcept;

// Asymmetric Laplace law ALD(location, scale, tau), density
//   tau (1 - tau) / scale * exp(-check_loss(y - location, tau) / scale).
// `scale` plays the role of the model variance sigma^2 in the mixture.

double ald_logpdf(double y, double location, double scale, double tau);
double ald_cdf(double y, double location, double scale, double tau);
double ald_quantile(double p, double location, double scale, double tau);

struct MixtureDraw {
  double y;
  double w;
};

/// w ~ Exponential(mean scale), y | w ~ N(location + xi w, scale phi w).
/// The marginal of y is ALD(location, scale, tau).
MixtureDraw mixture_draw(double location, double scale, const QuantileLevel& q, RngStream& rng);

}  // namespace qjm
