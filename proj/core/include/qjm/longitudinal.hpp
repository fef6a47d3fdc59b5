#pragma once

#include <Eigen/Dense>

#include "qjm/ald.hpp"
#include "qjm/model.hpp"
#include "qjm/rng.hpp"

namespace qjm {

/// Error law of the longitudinal submodel. Gaussian for mean regression;
/// for quantile regression the ALD mixture y | w ~ N(eta + xi w, sigma2 phi w).
struct ErrorModel {
  bool quantile = false;
  double xi = 0.0;
  double phi = 1.0;
  double tau = 0.5;

  static ErrorModel gaussian() { return {}; }
  static ErrorModel asymmetric_laplace(const QuantileLevel& q) {
    return {true, q.xi(), q.phi(), q.tau()};
  }
};

struct LongState {
  Eigen::VectorXd beta_l;
  Eigen::MatrixXd gamma;  // n x q, columns per SharedEffects
  double sigma2 = 1.0;
  Eigen::VectorXd w;      // one per record in quantile mode, empty otherwise
  Eigen::MatrixXd re_cov; // q x q

  double weight(Eigen::Index r) const { return w.size() == 0 ? 1.0 : w(r); }
};

/// Shared predictor eta_ls per record.
Eigen::VectorXd shared_predictor(const DesignBundle& d, const Eigen::MatrixXd& gamma);

/// y - eta_l - eta_ls per record (no xi w offset).
Eigen::VectorXd location_residuals(const DesignBundle& d, const LongState& s);

/// Gaussian full conditional in canonical form: precision Q and b with mean Q^-1 b.
struct GaussianConditional {
  Eigen::MatrixXd precision;
  Eigen::VectorXd canonical;

  Eigen::VectorXd mean() const { return precision.llt().solve(canonical); }
  Eigen::MatrixXd covariance() const;
};

/// Full conditional of the fixed effects: covariance (X' D X + Sigma_b^-1)^-1,
/// mean cov (X' D (y - eta_ls - xi w) + Sigma_b^-1 mu_b), D = diag(1/(sigma2 phi w)).
GaussianConditional beta_l_conditional(const LongState& s, const DesignBundle& d,
                                       const ErrorModel& err, const PriorSpec& prior);

Eigen::VectorXd update_beta_l(const LongState& s, const DesignBundle& d, const ErrorModel& err,
                              const PriorSpec& prior, RngStream& rng);

/// Per-subject conjugate Gaussian draw of the random effects, prior
/// N(0, re_cov). Longitudinal-only mode; joint modes use update_shared_effects.
Eigen::MatrixXd update_random_effects_longonly(const LongState& s, const DesignBundle& d,
                                               const ErrorModel& err, RngStream& rng);

struct InverseGaussianParams {
  double mu;
  double lambda;
};

/// Law of 1/w_r given the location residual r:
/// mu = sqrt(xi^2 + 2 phi) / |r|, lambda = (xi^2 + 2 phi) / (sigma2 phi).
/// |r| is clamped at 1e-10.
InverseGaussianParams weight_conditional(double residual, double sigma2, const ErrorModel& err);

/// New weights; `residuals` are location residuals (see location_residuals).
Eigen::VectorXd update_weights(const LongState& s, const Eigen::VectorXd& residuals,
                               const ErrorModel& err, RngStream& rng);

struct InverseGammaParams {
  double shape;
  double rate;
};

/// Quantile mode: IG(a0 + 3N/2, b0 + sum (r - xi w)^2 / (2 phi w) + sum w).
/// Mean mode:     IG(a0 + N/2,  b0 + sum r^2 / 2).
InverseGammaParams sigma2_conditional(const LongState& s, const Eigen::VectorXd& residuals,
                                      const ErrorModel& err, const PriorSpec& prior);

double update_sigma2(const LongState& s, const Eigen::VectorXd& residuals, const ErrorModel& err,
                     const PriorSpec& prior, RngStream& rng);

/// IW(nu + n, S + sum gamma_i gamma_i').
Eigen::MatrixXd update_re_cov(const Eigen::MatrixXd& gamma, const PriorSpec& prior,
                              RngStream& rng);

}  // namespace qjm
