#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qjm/model.hpp"
#include "qjm/rng.hpp"
#include "qjm/survival.hpp"

namespace qjm {

enum class ErrorFamily { Gaussian, AsymmetricLaplace };

/// Generative settings for a synthetic joint cohort. Responses follow
///   y_ij = beta_0 + beta_1 t_ij + gamma_0i + gamma_1i t_ij + v_i eps_ij
/// and the hazard is lambda0(t) exp(alpha (gamma_0i + gamma_1i t) + x_i beta_s
/// + scale_hazard_effect * log v_i). The subject scale v_i = exp(N(0, s^2)) with
/// s = scale_log_sd, so v_i = 1 when s = 0.
struct SimScenario {
  std::size_t n = 300;
  int visits = 8;
  double spacing = 1.0;
  double jitter = 0.2;
  /// Entry times uniform on [0, entry_spread].
  double entry_spread = 0.0;

  double beta_intercept = 5.0;
  double beta_time = -0.5;
  Eigen::Matrix2d re_cov = (Eigen::Matrix2d() << 1.0, 0.05, 0.05, 0.09).finished();

  ErrorFamily family = ErrorFamily::AsymmetricLaplace;
  /// Gaussian variance, or the ALD scale.
  double sigma2 = 0.5;
  double tau = 0.5;

  double alpha = -0.5;
  HazardGrid hazard{{0.0, 10.0}, {0.1}};
  /// Coefficients of binary baseline covariates x1, x2, ... ~ Bernoulli(1/2).
  std::vector<double> beta_s;
  double horizon = 10.0;
  bool drop_after_exit = false;

  double scale_log_sd = 0.0;
  double scale_hazard_effect = 0.0;

  /// Throws ConfigError for invalid settings (visits < 2, bad covariance, a
  /// hazard grid not covering [0, entry_spread + horizon], ...).
  void validate() const;
};

/// n = 300, 8 annual visits, linear fixed time trend, shared random intercept
/// and slope, ALD errors at tau = 0.5, alpha = -0.5, no survival covariates.
SimScenario default_scenario();

/// Heteroscedastic subject scales that raise the hazard, together with a
/// positive location association. The fitted association comes out negative
/// at tau = 0.1 and positive at tau = 0.5.
SimScenario sign_pattern_scenario();

/// Looks up a named scenario ("default", "sign-pattern"); throws ConfigError.
SimScenario scenario_by_name(const std::string& name);

struct TrueValues {
  Eigen::Vector2d beta_l;
  std::vector<double> beta_s;
  double sigma2 = 0.0;
  double tau = 0.5;
  ErrorFamily family = ErrorFamily::AsymmetricLaplace;
  Eigen::Matrix2d re_cov;
  double alpha = 0.0;
  HazardGrid hazard;
  std::vector<std::string> subject_ids;
  Eigen::MatrixXd gamma;          // n x 2
  Eigen::VectorXd subject_scale;  // v_i
};

struct SimulatedData {
  JointDataset data;
  TrueValues truth;
  std::vector<std::string> warnings;
};

SimulatedData simulate(const SimScenario& scenario, RngStream& rng);

/// Smallest t >= entry with cumulative_hazard(entry, t) >= -log(u), solved
/// piece by piece in closed form. Returns +infinity when the hazard over the
/// rest of the grid cannot reach the target.
double invert_hazard(double u, double entry, const HazardGrid& grid, double alpha,
                     const Trajectory& traj, double eta_s);

/// JSON document with the generating values.
void write_truth_json(std::ostream& out, const TrueValues& truth);

}  // namespace qjm
