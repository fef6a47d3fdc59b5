#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "qjm/rng.hpp"

namespace qjm {

/// Unnormalized log-concave density on the open interval (lower, upper).
///
/// When `derivative` is set the upper hull is built from tangents; otherwise
/// from secants through adjacent abscissae (derivative-free variant, which
/// needs at least three starting points).
struct LogConcaveTarget {
  std::function<double(double)> log_density;
  std::function<double(double)> derivative;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool has_derivative() const noexcept { return static_cast<bool>(derivative); }
};

struct ArsOptions {
  /// Hull points beyond the initial ones before giving up.
  int max_refinements = 200;
  /// Relative slack for the concavity checks; smaller violations are round-off.
  double concavity_tolerance = 1e-8;
};

/// One exact draw from the normalized target by adaptive rejection sampling.
///
/// `init_abscissae` must be sorted, inside the support and, on unbounded
/// sides, reach past the mode (positive slope at the left end, negative at the
/// right end). Throws ArsError on a detected concavity violation, on a bad
/// starting set, or when `max_refinements` is exhausted.
double ars_sample(const LogConcaveTarget& target, std::span<const double> init_abscissae,
                  RngStream& rng, const ArsOptions& options = {});

/// Starting abscissae around a mode guess: steps out from `guess` by `step`,
/// doubling, until the log-density has dropped on both sides. Returns three
/// points (left, centre, right) with the centre at the highest value seen.
std::vector<double> bracket_mode(const LogConcaveTarget& target, double guess, double step);

/// Rough posterior scale 1/sqrt(-h''(x)) at `x` from a finite difference,
/// clamped to [1e-8, 1e4]. Useful as the `step` of bracket_mode.
double local_scale(const LogConcaveTarget& target, double x);

/// bracket_mode + local_scale + ars_sample.
double ars_draw_near(const LogConcaveTarget& target, double guess, RngStream& rng,
                     const ArsOptions& options = {});

}  // namespace qjm
