#include "qjm/distributions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qjm/error.hpp"

namespace qjm {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite, got " << value;
    throw std::invalid_argument(msg.str());
  }
}

// Marsaglia & Tsang (2000) for shape >= 1, unit rate.
double gamma_unit_rate(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double draw_normal(double mean, double sd, RngStream& rng) {
  require_positive(sd, "normal sd");
  if (!std::isfinite(mean)) throw std::invalid_argument("normal mean must be finite");
  return mean + sd * rng.standard_normal();
}

double draw_exponential(double rate, RngStream& rng) {
  require_positive(rate, "exponential rate");
  return -std::log(rng.uniform()) / rate;
}

double draw_gamma(double shape, double rate, RngStream& rng) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  if (shape < 1.0) {
    const double g = gamma_unit_rate(shape + 1.0, rng);
    // log-space boost keeps tiny shapes away from underflow to exactly 0
    const double log_u = std::log(rng.uniform()) / shape;
    return std::exp(std::log(g) + log_u) / rate;
  }
  return gamma_unit_rate(shape, rng) / rate;
}

double draw_inverse_gamma(double shape, double rate, RngStream& rng) {
  return 1.0 / draw_gamma(shape, rate, rng);
}

double draw_inverse_gaussian(double mu, double lambda, RngStream& rng) {
  require_positive(mu, "inverse Gaussian mu");
  require_positive(lambda, "inverse Gaussian lambda");
  const double z = rng.standard_normal();
  const double a = mu * z * z / (2.0 * lambda);
  // smaller root mu * (1 + a - sqrt(a^2 + 2a)), written without cancellation
  const double x = mu / (1.0 + a + std::sqrt(a * (a + 2.0)));
  if (rng.uniform() * (mu + x) <= mu) return x;
  return mu * mu / x;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix not square");
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      std::ostringstream msg;
      msg << "matrix is not positive definite: pivot " << j << " is " << diag;
      throw FactorizationError(msg.str(), static_cast<std::size_t>(j));
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                         RngStream& rng) {
  if (cov.rows() != mean.size()) throw std::invalid_argument("draw_mvn: dimension mismatch");
  const Eigen::MatrixXd l = cholesky_lower(cov);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.standard_normal();
  return mean + l * z;
}

Eigen::VectorXd draw_mvn_canonical(const Eigen::VectorXd& b, const Eigen::MatrixXd& precision,
                                   RngStream& rng) {
  if (precision.rows() != b.size()) {
    throw std::invalid_argument("draw_mvn_canonical: dimension mismatch");
  }
  const Eigen::MatrixXd l = cholesky_lower(precision);
  const auto lt = l.triangularView<Eigen::Lower>();
  const Eigen::VectorXd mean = lt.transpose().solve(lt.solve(b));
  Eigen::VectorXd z(b.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.standard_normal();
  return mean + lt.transpose().solve(z);
}

Eigen::MatrixXd draw_wishart(double dof, const Eigen::MatrixXd& scale, RngStream& rng) {
  const Eigen::Index p = scale.rows();
  if (!(dof > static_cast<double>(p) - 1.0)) {
    throw std::invalid_argument("wishart: degrees of freedom must exceed dimension - 1");
  }
  const Eigen::MatrixXd l = cholesky_lower(scale);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(2.0 * draw_gamma(0.5 * (dof - static_cast<double>(i)), 1.0, rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.standard_normal();
  }
  const Eigen::MatrixXd la = l * a;
  return la * la.transpose();
}

Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& scale, RngStream& rng) {
  const Eigen::MatrixXd inv_scale = scale.inverse();
  const Eigen::MatrixXd w = draw_wishart(dof, 0.5 * (inv_scale + inv_scale.transpose()), rng);
  const Eigen::MatrixXd sigma = w.inverse();
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace qjm
