#include "qjm/survival.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qjm/ars.hpp"
#include "qjm/distributions.hpp"

namespace qjm {

namespace {

constexpr double kLinearLimit = 1e-8;

void require_inside(double entry, double exit, const HazardGrid& grid) {
  if (!(entry >= grid.start() && exit <= grid.end() && entry <= exit)) {
    std::ostringstream msg;
    msg << "risk interval [" << entry << ", " << exit << "] is not inside the hazard grid ["
        << grid.start() << ", " << grid.end() << "]";
    throw std::out_of_range(msg.str());
  }
}

// Visits every grid piece overlapping [entry, exit] with its clipped bounds.
template <typename F>
void for_each_piece(double entry, double exit, const HazardGrid& grid, F&& f) {
  require_inside(entry, exit, grid);
  const std::size_t k_max = grid.size();
  for (std::size_t k = grid.interval_of(entry); k < k_max && grid.cuts[k] < exit; ++k) {
    const double a = std::max(grid.cuts[k], entry);
    const double b = std::min(grid.cuts[k + 1], exit);
    if (b > a) f(k, a, b);
  }
}

}  // namespace

Trajectory trajectory_of(const SharedEffects& shared, const Eigen::MatrixXd& gamma,
                         std::size_t subject) {
  Trajectory t;
  const auto i = static_cast<Eigen::Index>(subject);
  if (shared.intercept) t.intercept = gamma(i, shared.intercept_column());
  if (shared.slope) t.slope = gamma(i, shared.slope_column());
  return t;
}

double exp_linear_integral(double a, double b, double rate) {
  if (std::abs(rate) < kLinearLimit) return std::exp(rate * a) * (b - a);
  return std::exp(rate * a) * std::expm1(rate * (b - a)) / rate;
}

double exp_linear_first_moment(double a, double b, double rate) {
  // substitute u = a + v, v in [0, len]
  const double len = b - a;
  const double x = rate * len;
  const double e0 = std::abs(rate) < kLinearLimit ? len : std::expm1(x) / rate;
  double e1;
  if (std::abs(x) < 1e-3) {
    e1 = len * len * (0.5 + x * (1.0 / 3.0 + x * (1.0 / 8.0 + x * (1.0 / 30.0 + x / 144.0))));
  } else {
    e1 = (len * std::exp(x) - e0) / rate;
  }
  return std::exp(rate * a) * (a * e0 + e1);
}

HazardIntegral hazard_integral(double entry, double exit, const HazardGrid& grid, double alpha,
                               const Trajectory& traj, double eta_s) {
  HazardIntegral out;
  const double level = std::exp(alpha * traj.intercept + eta_s);
  const double rate = alpha * traj.slope;
  for_each_piece(entry, exit, grid, [&](std::size_t k, double a, double b) {
    out.value += grid.values[k] * exp_linear_integral(a, b, rate);
    out.first_moment += grid.values[k] * exp_linear_first_moment(a, b, rate);
  });
  out.value *= level;
  out.first_moment *= level;
  return out;
}

double cumulative_hazard(double entry, double exit, const HazardGrid& grid, double alpha,
                         const Trajectory& traj, double eta_s) {
  const double level = std::exp(alpha * traj.intercept + eta_s);
  const double rate = alpha * traj.slope;
  double h = 0.0;
  for_each_piece(entry, exit, grid, [&](std::size_t k, double a, double b) {
    h += grid.values[k] * exp_linear_integral(a, b, rate);
  });
  return level * h;
}

std::vector<double> interval_exposures(double entry, double exit, const HazardGrid& grid,
                                       double alpha, const Trajectory& traj, double eta_s) {
  std::vector<double> out(grid.size(), 0.0);
  const double level = std::exp(alpha * traj.intercept + eta_s);
  const double rate = alpha * traj.slope;
  for_each_piece(entry, exit, grid, [&](std::size_t k, double a, double b) {
    out[k] = level * exp_linear_integral(a, b, rate);
  });
  return out;
}

double log_survival_likelihood(const SubjectDesign& subject, const HazardGrid& grid,
                               double alpha, const Trajectory& traj, double eta_s) {
  double ll = -cumulative_hazard(subject.entry, subject.exit, grid, alpha, traj, eta_s);
  if (subject.event) {
    ll += std::log(grid.value_at(subject.exit)) + alpha * traj.at(subject.exit) + eta_s;
  }
  return ll;
}

Eigen::VectorXd survival_predictor(const DesignBundle& d, const Eigen::VectorXd& beta_s) {
  if (d.x_s.cols() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.n()));
  return d.x_s * beta_s;
}

std::vector<GammaParams> lambda_conditionals(const SurvState& s, const DesignBundle& d,
                                             const Eigen::MatrixXd& gamma,
                                             const PriorSpec& prior) {
  std::vector<GammaParams> out(s.grid.size(), {prior.lambda_shape, prior.lambda_rate});
  const Eigen::VectorXd eta_s = survival_predictor(d, s.beta_s);
  for (std::size_t i = 0; i < d.n(); ++i) {
    const SubjectDesign& sd = d.subjects[i];
    const Trajectory traj = trajectory_of(d.shared, gamma, i);
    const double level = std::exp(s.alpha * traj.intercept + eta_s(static_cast<Eigen::Index>(i)));
    const double rate = s.alpha * traj.slope;
    for_each_piece(sd.entry, sd.exit, s.grid, [&](std::size_t k, double a, double b) {
      out[k].rate += level * exp_linear_integral(a, b, rate);
    });
    if (sd.event) out[s.grid.interval_of(sd.exit)].shape += 1.0;
  }
  return out;
}

std::vector<double> update_lambda(const SurvState& s, const DesignBundle& d,
                                  const Eigen::MatrixXd& gamma, const PriorSpec& prior,
                                  RngStream& rng) {
  const std::vector<GammaParams> fc = lambda_conditionals(s, d, gamma, prior);
  std::vector<double> values(fc.size());
  for (std::size_t k = 0; k < fc.size(); ++k) values[k] = draw_gamma(fc[k].shape, fc[k].rate, rng);
  return values;
}

Eigen::VectorXd update_beta_s(const SurvState& s, const DesignBundle& d,
                              const Eigen::MatrixXd& gamma, const PriorSpec& prior,
                              RngStream& rng) {
  const Eigen::Index p = d.x_s.cols();
  Eigen::VectorXd beta = s.beta_s;
  if (p == 0) return beta;
  const auto n = static_cast<Eigen::Index>(d.n());

  // baseline cumulative hazard without the survival-only part
  Eigen::VectorXd base(n);
  Eigen::VectorXd events = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sd = d.subjects[static_cast<std::size_t>(i)];
    base(i) = cumulative_hazard(sd.entry, sd.exit, s.grid, s.alpha,
                                trajectory_of(d.shared, gamma, static_cast<std::size_t>(i)), 0.0);
    events(i) = sd.event ? 1.0 : 0.0;
  }
  Eigen::VectorXd eta = d.x_s * beta;

  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd xj = d.x_s.col(j);
    const Eigen::VectorXd rest = eta - xj * beta(j);
    const double event_sum = events.dot(xj);
    LogConcaveTarget target;
    target.log_density = [&](double b) {
      const double dev = b - prior.beta_s_mean;
      double v = -0.5 * dev * dev / prior.beta_s_variance + b * event_sum;
      for (Eigen::Index i = 0; i < n; ++i) v -= base(i) * std::exp(rest(i) + xj(i) * b);
      return v;
    };
    target.derivative = [&](double b) {
      double g = -(b - prior.beta_s_mean) / prior.beta_s_variance + event_sum;
      for (Eigen::Index i = 0; i < n; ++i) g -= base(i) * xj(i) * std::exp(rest(i) + xj(i) * b);
      return g;
    };
    beta(j) = ars_draw_near(target, beta(j), rng);
    eta = rest + xj * beta(j);
  }
  return beta;
}

}  // namespace qjm
