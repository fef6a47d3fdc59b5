#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qjm/longitudinal.hpp"
#include "qjm/model.hpp"
#include "qjm/rng.hpp"

namespace qjm {

/// Subject's shared predictor as a function of time: intercept + slope * u.
struct Trajectory {
  double intercept = 0.0;
  double slope = 0.0;

  double at(double u) const noexcept { return intercept + slope * u; }
};

Trajectory trajectory_of(const SharedEffects& shared, const Eigen::MatrixXd& gamma,
                         std::size_t subject);

struct SurvState {
  HazardGrid grid;
  Eigen::VectorXd beta_s;
  double alpha = 0.0;
};

/// Integral of exp(rate * u) over [a, b]; the limit b - a (times exp(rate a))
/// is used when |rate| < 1e-8.
double exp_linear_integral(double a, double b, double rate);

/// Integral of u * exp(rate * u) over [a, b].
double exp_linear_first_moment(double a, double b, double rate);

/// H = int_entry^exit lambda0(u) exp(alpha * traj(u) + eta_s) du, plus the
/// moment M = int lambda0(u) u exp(...) du that the derivatives need:
///   dH/dalpha = traj.intercept * H + traj.slope * M
///   dH/dintercept = alpha * H,  dH/dslope = alpha * M.
struct HazardIntegral {
  double value = 0.0;
  double first_moment = 0.0;
};

/// Throws std::out_of_range when [entry, exit] is not inside the grid.
HazardIntegral hazard_integral(double entry, double exit, const HazardGrid& grid, double alpha,
                               const Trajectory& traj, double eta_s);

double cumulative_hazard(double entry, double exit, const HazardGrid& grid, double alpha,
                         const Trajectory& traj, double eta_s);

/// Per-piece exposure: the k-th term of cumulative_hazard divided by lambda_k.
std::vector<double> interval_exposures(double entry, double exit, const HazardGrid& grid,
                                       double alpha, const Trajectory& traj, double eta_s);

/// d [log lambda0(s) + alpha traj(s) + eta_s] - H(entry, s).
double log_survival_likelihood(const SubjectDesign& subject, const HazardGrid& grid,
                               double alpha, const Trajectory& traj, double eta_s);

/// x_s * beta_s per subject (zeros when there are no survival covariates).
Eigen::VectorXd survival_predictor(const DesignBundle& d, const Eigen::VectorXd& beta_s);

struct GammaParams {
  double shape;
  double rate;
};

/// Gamma(a0 + events in piece k, b0 + summed exposure in piece k) for every k.
std::vector<GammaParams> lambda_conditionals(const SurvState& s, const DesignBundle& d,
                                             const Eigen::MatrixXd& gamma,
                                             const PriorSpec& prior);

/// New piece values; the cut points are unchanged.
std::vector<double> update_lambda(const SurvState& s, const DesignBundle& d,
                                  const Eigen::MatrixXd& gamma, const PriorSpec& prior,
                                  RngStream& rng);

/// Coordinate-wise ARS on the survival-only coefficients. Returns the input
/// unchanged when there are no survival covariates.
Eigen::VectorXd update_beta_s(const SurvState& s, const DesignBundle& d,
                              const Eigen::MatrixXd& gamma, const PriorSpec& prior,
                              RngStream& rng);

}  // namespace qjm
