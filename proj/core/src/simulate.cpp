#include "qjm/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "qjm/ald.hpp"
#include "qjm/distributions.hpp"
#include "qjm/error.hpp"

namespace qjm {

namespace {

constexpr double kLinearLimit = 1e-8;

std::string subject_label(std::size_t i, std::size_t n) {
  int width = 1;
  for (std::size_t m = n; m >= 10; m /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, i + 1);
  return buf;
}

}  // namespace

void SimScenario::validate() const {
  if (n == 0) throw ConfigError("scenario needs at least one subject");
  if (visits < 2) throw ConfigError("scenario needs at least two visits per subject");
  if (!(spacing > 0.0)) throw ConfigError("visit spacing must be positive");
  if (!(jitter >= 0.0 && jitter < 0.5 * spacing))
    throw ConfigError("visit jitter must lie in [0, spacing/2)");
  if (!(entry_spread >= 0.0)) throw ConfigError("entry spread must be nonnegative");
  if (!(sigma2 > 0.0)) throw ConfigError("error scale must be positive");
  if (family == ErrorFamily::AsymmetricLaplace) QuantileLevel{tau};
  if (!(re_cov.isApprox(re_cov.transpose())) || re_cov.llt().info() != Eigen::Success)
    throw ConfigError("random-effects covariance must be symmetric positive definite");
  if (!(horizon > entry_spread)) throw ConfigError("censoring horizon must exceed the entry spread");
  if (!(scale_log_sd >= 0.0)) throw ConfigError("scale_log_sd must be nonnegative");
  try {
    hazard.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario hazard: ") + e.what());
  }
  if (hazard.start() > 0.0 || hazard.end() < horizon)
    throw ConfigError("scenario hazard grid must cover [0, horizon]");
}

SimScenario default_scenario() { return SimScenario{}; }

SimScenario sign_pattern_scenario() {
  SimScenario s;
  s.family = ErrorFamily::Gaussian;
  s.sigma2 = 1.0;
  s.re_cov << 0.25, 0.0, 0.0, 0.01;
  s.alpha = 1.5;
  s.hazard = HazardGrid{{0.0, 10.0}, {0.08}};
  s.scale_log_sd = 0.7;
  s.scale_hazard_effect = 2.5;
  return s;
}

SimScenario scenario_by_name(const std::string& name) {
  if (name == "default") return default_scenario();
  if (name == "sign-pattern") return sign_pattern_scenario();
  throw ConfigError("unknown scenario '" + name + "' (expected default or sign-pattern)");
}

double invert_hazard(double u, double entry, const HazardGrid& grid, double alpha,
                     const Trajectory& traj, double eta_s) {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("invert_hazard: u must lie in (0, 1]");
  double remaining = -std::log(u);
  if (remaining == 0.0) return entry;
  const double level = std::exp(alpha * traj.intercept + eta_s);
  const double rate = alpha * traj.slope;
  for (std::size_t k = grid.interval_of(entry); k < grid.size(); ++k) {
    const double a = std::max(grid.cuts[k], entry);
    const double b = grid.cuts[k + 1];
    if (!(b > a)) continue;
    const double start = grid.values[k] * level * std::exp(rate * a);  // hazard at a
    double mass;
    if (std::abs(rate) < kLinearLimit) {
      mass = start * (b - a);
      if (remaining <= mass) return std::min(b, a + remaining / start);
    } else {
      mass = start * std::expm1(rate * (b - a)) / rate;
      if (remaining <= mass) return std::min(b, a + std::log1p(rate * remaining / start) / rate);
    }
    remaining -= mass;
  }
  return std::numeric_limits<double>::infinity();
}

SimulatedData simulate(const SimScenario& sc, RngStream& rng) {
  sc.validate();
  SimulatedData out;
  TrueValues& truth = out.truth;
  truth.beta_l << sc.beta_intercept, sc.beta_time;
  truth.beta_s = sc.beta_s;
  truth.sigma2 = sc.sigma2;
  truth.tau = sc.tau;
  truth.family = sc.family;
  truth.re_cov = sc.re_cov;
  truth.alpha = sc.alpha;
  truth.hazard = sc.hazard;
  truth.gamma.resize(static_cast<Eigen::Index>(sc.n), 2);
  truth.subject_scale.resize(static_cast<Eigen::Index>(sc.n));

  JointDataset& data = out.data;
  for (std::size_t j = 0; j < sc.beta_s.size(); ++j)
    data.survival_covariate_names.push_back("x" + std::to_string(j + 1));

  const bool ald = sc.family == ErrorFamily::AsymmetricLaplace;
  const QuantileLevel level{ald ? sc.tau : 0.5};
  const double sd = std::sqrt(sc.sigma2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  std::size_t events = 0;

  for (std::size_t i = 0; i < sc.n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::string id = subject_label(i, sc.n);
    truth.subject_ids.push_back(id);

    const Eigen::VectorXd g = draw_mvn(zero, sc.re_cov, rng);
    truth.gamma.row(ii) = g.transpose();
    const double log_scale = sc.scale_log_sd > 0.0 ? sc.scale_log_sd * rng.standard_normal() : 0.0;
    const double v = std::exp(log_scale);
    truth.subject_scale(ii) = v;

    const double entry = sc.entry_spread > 0.0 ? sc.entry_spread * rng.uniform() : 0.0;
    SurvivalRecord surv;
    surv.subject_id = id;
    surv.entry = entry;
    double eta_s = sc.scale_hazard_effect * log_scale;
    for (double b : sc.beta_s) {
      const double x = rng.uniform() < 0.5 ? 1.0 : 0.0;
      surv.covariates.push_back(x);
      eta_s += b * x;
    }
    const Trajectory traj{g(0), g(1)};
    const double t_event = invert_hazard(rng.uniform(), entry, sc.hazard, sc.alpha, traj, eta_s);
    surv.event = t_event <= sc.horizon;
    surv.exit = surv.event ? t_event : sc.horizon;
    if (surv.event) ++events;

    for (int j = 0; j < sc.visits; ++j) {
      double t = entry + j * sc.spacing;
      if (j > 0 && sc.jitter > 0.0) t += sc.jitter * (2.0 * rng.uniform() - 1.0);
      const double eps = ald ? mixture_draw(0.0, sc.sigma2, level, rng).y
                             : draw_normal(0.0, sd, rng);
      if (sc.drop_after_exit && t > surv.exit) continue;
      LongitudinalRecord rec;
      rec.subject_id = id;
      rec.time = t;
      rec.response = sc.beta_intercept + sc.beta_time * t + traj.at(t) + v * eps;
      data.longitudinal.push_back(std::move(rec));
    }
    data.survival.push_back(std::move(surv));
  }
  if (events == 0) out.warnings.push_back("all subjects are censored; the hazard is too small");
  return out;
}

void write_truth_json(std::ostream& out, const TrueValues& t) {
  nlohmann::ordered_json j;
  j["beta_l"] = {t.beta_l(0), t.beta_l(1)};
  j["beta_s"] = t.beta_s;
  j["error_family"] = t.family == ErrorFamily::Gaussian ? "gaussian" : "ald";
  j["sigma2"] = t.sigma2;
  if (t.family == ErrorFamily::AsymmetricLaplace) j["tau"] = t.tau;
  j["re_cov"] = {{t.re_cov(0, 0), t.re_cov(0, 1)}, {t.re_cov(1, 0), t.re_cov(1, 1)}};
  j["alpha"] = t.alpha;
  j["hazard"] = {{"cuts", t.hazard.cuts}, {"values", t.hazard.values}};
  auto subjects = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < t.subject_ids.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    subjects.push_back({{"id", t.subject_ids[i]},
                        {"gamma0", t.gamma(ii, 0)},
                        {"gamma1", t.gamma(ii, 1)},
                        {"scale", t.subject_scale(ii)}});
  }
  j["subjects"] = std::move(subjects);
  out << j.dump(2) << '\n';
}

}  // namespace qjm
