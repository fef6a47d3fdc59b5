#include "qjm/longitudinal.hpp"

#include <algorithm>
#include <cmath>

#include "qjm/distributions.hpp"

namespace qjm {

Eigen::VectorXd shared_predictor(const DesignBundle& d, const Eigen::MatrixXd& gamma) {
  const auto n_rec = static_cast<Eigen::Index>(d.records());
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n_rec);
  if (d.z.cols() == 0) return eta;
  for (Eigen::Index r = 0; r < n_rec; ++r) {
    eta(r) = d.z.row(r).dot(gamma.row(static_cast<Eigen::Index>(d.subject_of[r])));
  }
  return eta;
}

Eigen::VectorXd location_residuals(const DesignBundle& d, const LongState& s) {
  Eigen::VectorXd r = d.y - shared_predictor(d, s.gamma);
  if (d.x_l.cols() > 0) r -= d.x_l * s.beta_l;
  return r;
}

Eigen::MatrixXd GaussianConditional::covariance() const {
  const Eigen::Index p = precision.rows();
  return precision.llt().solve(Eigen::MatrixXd::Identity(p, p));
}

GaussianConditional beta_l_conditional(const LongState& s, const DesignBundle& d,
                                       const ErrorModel& err, const PriorSpec& prior) {
  const Eigen::Index p = d.x_l.cols();
  const auto n_rec = static_cast<Eigen::Index>(d.records());
  const Eigen::MatrixXd prior_cov = prior.resolved_beta_cov(p);
  const Eigen::MatrixXd prior_prec = prior_cov.llt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd eta_ls = shared_predictor(d, s.gamma);

  Eigen::VectorXd weight(n_rec);
  Eigen::VectorXd target(n_rec);
  for (Eigen::Index r = 0; r < n_rec; ++r) {
    const double w = s.weight(r);
    weight(r) = 1.0 / (s.sigma2 * err.phi * w);
    target(r) = d.y(r) - eta_ls(r) - err.xi * w;
  }
  GaussianConditional fc;
  fc.precision = d.x_l.transpose() * weight.asDiagonal() * d.x_l + prior_prec;
  fc.precision = 0.5 * (fc.precision + fc.precision.transpose());
  fc.canonical = d.x_l.transpose() * weight.cwiseProduct(target) +
                 prior_prec * prior.resolved_beta_mean(p);
  return fc;
}

Eigen::VectorXd update_beta_l(const LongState& s, const DesignBundle& d, const ErrorModel& err,
                              const PriorSpec& prior, RngStream& rng) {
  if (d.x_l.cols() == 0) return Eigen::VectorXd();
  const GaussianConditional fc = beta_l_conditional(s, d, err, prior);
  return draw_mvn_canonical(fc.canonical, fc.precision, rng);
}

Eigen::MatrixXd update_random_effects_longonly(const LongState& s, const DesignBundle& d,
                                               const ErrorModel& err, RngStream& rng) {
  const Eigen::Index q = d.z.cols();
  Eigen::MatrixXd gamma(static_cast<Eigen::Index>(d.n()), q);
  if (q == 0) return gamma;
  const Eigen::MatrixXd prior_prec = s.re_cov.llt().solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.records()));
  if (d.x_l.cols() > 0) fixed = d.x_l * s.beta_l;

  for (std::size_t i = 0; i < d.n(); ++i) {
    const SubjectDesign& sd = d.subjects[i];
    Eigen::MatrixXd prec = prior_prec;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
    for (std::size_t row = sd.begin; row < sd.end; ++row) {
      const auto r = static_cast<Eigen::Index>(row);
      const double w = s.weight(r);
      const double k = 1.0 / (s.sigma2 * err.phi * w);
      const auto zr = d.z.row(r).transpose();
      prec.noalias() += k * zr * zr.transpose();
      b += k * (d.y(r) - fixed(r) - err.xi * w) * zr;
    }
    gamma.row(static_cast<Eigen::Index>(i)) = draw_mvn_canonical(b, prec, rng).transpose();
  }
  return gamma;
}

InverseGaussianParams weight_conditional(double residual, double sigma2, const ErrorModel& err) {
  const double c = err.xi * err.xi + 2.0 * err.phi;
  const double r = std::max(std::abs(residual), 1e-10);
  return {std::sqrt(c) / r, c / (sigma2 * err.phi)};
}

Eigen::VectorXd update_weights(const LongState& s, const Eigen::VectorXd& residuals,
                               const ErrorModel& err, RngStream& rng) {
  Eigen::VectorXd w(residuals.size());
  for (Eigen::Index r = 0; r < residuals.size(); ++r) {
    const InverseGaussianParams p = weight_conditional(residuals(r), s.sigma2, err);
    w(r) = 1.0 / draw_inverse_gaussian(p.mu, p.lambda, rng);
  }
  return w;
}

InverseGammaParams sigma2_conditional(const LongState& s, const Eigen::VectorXd& residuals,
                                      const ErrorModel& err, const PriorSpec& prior) {
  const auto n = static_cast<double>(residuals.size());
  if (!err.quantile) {
    return {prior.sigma2_shape + 0.5 * n, prior.sigma2_rate + 0.5 * residuals.squaredNorm()};
  }
  double quad = 0.0;
  double wsum = 0.0;
  for (Eigen::Index r = 0; r < residuals.size(); ++r) {
    const double w = s.weight(r);
    const double e = residuals(r) - err.xi * w;
    quad += e * e / w;
    wsum += w;
  }
  return {prior.sigma2_shape + 1.5 * n, prior.sigma2_rate + quad / (2.0 * err.phi) + wsum};
}

double update_sigma2(const LongState& s, const Eigen::VectorXd& residuals, const ErrorModel& err,
                     const PriorSpec& prior, RngStream& rng) {
  const InverseGammaParams p = sigma2_conditional(s, residuals, err, prior);
  return draw_inverse_gamma(p.shape, p.rate, rng);
}

Eigen::MatrixXd update_re_cov(const Eigen::MatrixXd& gamma, const PriorSpec& prior,
                              RngStream& rng) {
  const Eigen::Index q = gamma.cols();
  if (q == 0) return Eigen::MatrixXd();
  const Eigen::MatrixXd scale = prior.resolved_re_scale(q) + gamma.transpose() * gamma;
  return draw_inverse_wishart(prior.re_dof + static_cast<double>(gamma.rows()), scale, rng);
}

}  // namespace qjm
