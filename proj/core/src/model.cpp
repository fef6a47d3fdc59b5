#include "qjm/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qjm/distributions.hpp"
#include "qjm/error.hpp"

namespace qjm {

namespace {

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_spd(const Eigen::MatrixXd& m, const std::string& what) {
  if (m.rows() != m.cols()) throw ConfigError(what + " must be square");
  if (!m.isApprox(m.transpose(), 1e-10)) throw ConfigError(what + " must be symmetric");
  try {
    (void)cholesky_lower(m);
  } catch (const FactorizationError& e) {
    throw ConfigError(what + " must be positive definite (" + e.what() + ")");
  }
}

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}

}  // namespace

std::size_t JointDataset::n() const {
  std::set<std::string> ids;
  for (const auto& r : longitudinal) ids.insert(r.subject_id);
  for (const auto& s : survival) ids.insert(s.subject_id);
  return ids.size();
}

void JointDataset::canonicalize() {
  std::sort(survival.begin(), survival.end(),
            [](const SurvivalRecord& a, const SurvivalRecord& b) {
              return a.subject_id < b.subject_id;
            });
  std::sort(longitudinal.begin(), longitudinal.end(),
            [](const LongitudinalRecord& a, const LongitudinalRecord& b) {
              if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
              if (a.time != b.time) return a.time < b.time;
              if (a.response != b.response) return a.response < b.response;
              return a.covariates < b.covariates;
            });
}

void JointDataset::validate() const {
  for (const auto& r : longitudinal) {
    if (r.subject_id.empty()) throw DataError("longitudinal record with empty subject id");
    if (!std::isfinite(r.time) || !std::isfinite(r.response)) {
      throw DataError("non-finite time or response for subject " + r.subject_id);
    }
    if (r.covariates.size() != covariate_names.size()) {
      throw DataError("covariate count mismatch for subject " + r.subject_id);
    }
    if (!finite_all(r.covariates)) throw DataError("missing covariate value for subject " + r.subject_id);
  }
  std::set<std::string> surv_ids;
  for (const auto& s : survival) {
    if (s.subject_id.empty()) throw DataError("survival record with empty subject id");
    if (!surv_ids.insert(s.subject_id).second) {
      throw DataError("duplicate survival record for subject " + s.subject_id);
    }
    if (!std::isfinite(s.entry) || !std::isfinite(s.exit) || !(s.entry < s.exit)) {
      throw DataError("survival record for subject " + s.subject_id + " needs entry < exit");
    }
    if (s.covariates.size() != survival_covariate_names.size()) {
      throw DataError("survival covariate count mismatch for subject " + s.subject_id);
    }
    if (!finite_all(s.covariates)) {
      throw DataError("missing survival covariate value for subject " + s.subject_id);
    }
  }
  if (survival.empty()) return;
  std::set<std::string> long_ids;
  for (const auto& r : longitudinal) {
    long_ids.insert(r.subject_id);
    if (!surv_ids.count(r.subject_id)) {
      throw DataError("subject " + r.subject_id + " has no survival record");
    }
  }
  for (const auto& id : surv_ids) {
    if (!long_ids.count(id)) throw DataError("subject " + id + " has no longitudinal records");
  }
}

const char* to_string(FitMode mode) noexcept {
  switch (mode) {
    case FitMode::LongitudinalOnly:
      return "long-quantile";
    case FitMode::MeanJoint:
      return "mean-joint";
    case FitMode::QuantileJoint:
      return "quantile-joint";
  }
  return "unknown";
}

FitMode parse_fit_mode(const std::string& text) {
  if (text == "long-quantile" || text == "long-only" || text == "longitudinal") {
    return FitMode::LongitudinalOnly;
  }
  if (text == "mean-joint") return FitMode::MeanJoint;
  if (text == "quantile-joint") return FitMode::QuantileJoint;
  throw ConfigError("unknown fit mode '" + text + "'");
}

Eigen::VectorXd PriorSpec::resolved_beta_mean(Eigen::Index p) const {
  if (beta_mean.size() == 0) return Eigen::VectorXd::Zero(p);
  if (beta_mean.size() != p) throw ConfigError("beta prior mean has the wrong length");
  return beta_mean;
}

Eigen::MatrixXd PriorSpec::resolved_beta_cov(Eigen::Index p) const {
  if (beta_cov.size() == 0) return beta_variance * Eigen::MatrixXd::Identity(p, p);
  if (beta_cov.rows() != p) throw ConfigError("beta prior covariance has the wrong size");
  return beta_cov;
}

Eigen::MatrixXd PriorSpec::resolved_re_scale(Eigen::Index q) const {
  if (re_scale.size() == 0) return Eigen::MatrixXd::Identity(q, q);
  if (re_scale.rows() != q) throw ConfigError("random-effects prior scale has the wrong size");
  return re_scale;
}

void PriorSpec::validate(Eigen::Index p, Eigen::Index q) const {
  require_positive(beta_variance, "beta prior variance");
  require_positive(sigma2_shape, "sigma2 prior shape");
  require_positive(sigma2_rate, "sigma2 prior rate");
  require_positive(lambda_shape, "lambda prior shape");
  require_positive(lambda_rate, "lambda prior rate");
  require_positive(alpha_variance, "alpha prior variance");
  require_positive(beta_s_variance, "beta_s prior variance");
  if (!std::isfinite(alpha_mean) || !std::isfinite(beta_s_mean)) {
    throw ConfigError("prior means must be finite");
  }
  (void)resolved_beta_mean(p);
  if (p > 0) require_spd(resolved_beta_cov(p), "beta prior covariance");
  if (q > 0) {
    if (!(re_dof > static_cast<double>(q) - 1.0)) {
      throw ConfigError("random-effects prior degrees of freedom must exceed q - 1");
    }
    require_spd(resolved_re_scale(q), "random-effects prior scale");
  }
}

long McmcSettings::stored_draws() const noexcept {
  if (chain_length <= burn_in || thin <= 0) return 0;
  return (chain_length - burn_in) / thin;
}

void McmcSettings::validate() const {
  if (chain_length <= 0) throw ConfigError("chain length must be positive");
  if (burn_in < 0 || burn_in >= chain_length) {
    throw ConfigError("burn-in must lie in [0, chain length)");
  }
  if (thin <= 0) throw ConfigError("thinning must be positive");
}

void ModelSpec::validate() const {
  mcmc.validate();
  for (double tau : tau_levels) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("quantile levels must lie in (0, 1)");
  }
  if (mode == FitMode::QuantileJoint && tau_levels.empty()) {
    throw ConfigError("quantile-joint mode needs at least one quantile level");
  }
  if (mode == FitMode::MeanJoint && !tau_levels.empty()) {
    throw ConfigError("mean-joint mode takes no quantile levels");
  }
  if (is_joint(mode) && shared.dimension() == 0) {
    throw ConfigError("joint modes need at least one shared random effect");
  }
  if (is_joint(mode) && grid_k < 1) throw ConfigError("hazard grid size must be positive");
  if (!is_joint(mode) && !s_covariates.empty()) {
    throw ConfigError("survival covariates given in longitudinal-only mode");
  }
}

std::size_t HazardGrid::interval_of(double t) const {
  if (!(t >= cuts.front() && t <= cuts.back())) {
    std::ostringstream msg;
    msg << "time " << t << " outside the hazard grid [" << cuts.front() << ", " << cuts.back()
        << "]";
    throw std::out_of_range(msg.str());
  }
  auto it = std::lower_bound(cuts.begin() + 1, cuts.end(), t);
  return static_cast<std::size_t>(it - (cuts.begin() + 1));
}

void HazardGrid::validate() const {
  if (cuts.size() < 2 || values.size() + 1 != cuts.size()) {
    throw ConfigError("hazard grid needs K + 1 cuts for K values");
  }
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    if (!(cuts[k] > cuts[k - 1])) throw ConfigError("hazard grid cuts must increase strictly");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("hazard values must be positive");
  }
}

HazardGrid default_grid(const JointDataset& data, int k) {
  if (k < 1) throw ConfigError("hazard grid size must be positive");
  if (data.survival.empty()) throw DataError("hazard grid needs survival data");
  std::vector<double> events;
  double lo = data.survival.front().entry;
  double hi = data.survival.front().exit;
  double exposure = 0.0;
  for (const auto& s : data.survival) {
    lo = std::min(lo, s.entry);
    hi = std::max(hi, s.exit);
    exposure += s.exit - s.entry;
    if (s.event) events.push_back(s.exit);
  }
  if (events.empty()) {
    throw DataError("no observed events: the baseline hazard is not identifiable");
  }
  std::sort(events.begin(), events.end());
  std::vector<double> distinct;
  std::vector<std::size_t> cumulative;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (distinct.empty() || events[i] != distinct.back()) {
      distinct.push_back(events[i]);
      cumulative.push_back(0);
    }
    cumulative.back() = i + 1;
  }
  const auto kk = static_cast<std::size_t>(k);
  if (distinct.size() < kk) {
    throw DataError("hazard grid size " + std::to_string(k) + " exceeds the " +
                    std::to_string(distinct.size()) + " distinct event times");
  }

  HazardGrid grid;
  grid.cuts.push_back(lo);
  const double m = static_cast<double>(events.size());
  std::size_t prev = 0;
  bool first = true;
  for (std::size_t c = 1; c < kk; ++c) {
    const double target = static_cast<double>(c) * m / static_cast<double>(k);
    std::size_t j = first ? 0 : prev + 1;
    const std::size_t last_allowed = distinct.size() - 1 - (kk - c);
    while (j < last_allowed && static_cast<double>(cumulative[j]) < target) ++j;
    grid.cuts.push_back(0.5 * (distinct[j] + distinct[j + 1]));
    prev = j;
    first = false;
  }
  grid.cuts.push_back(hi);
  grid.values.assign(kk, m / exposure);
  return grid;
}

DesignBundle build_designs(const JointDataset& input, const ModelSpec& spec) {
  spec.validate();
  JointDataset data = input;
  data.validate();
  data.canonicalize();
  const bool joint = is_joint(spec.mode);
  if (joint && !data.has_survival()) throw DataError("joint modes need a survival table");

  auto column_of = [](const std::vector<std::string>& names, const std::string& name) -> int {
    auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  };

  DesignBundle d;
  d.shared = spec.shared;
  d.has_survival = data.has_survival();
  if (spec.l_intercept) d.beta_l_names.push_back("intercept");
  if (spec.l_time) d.beta_l_names.push_back("time");
  std::vector<int> l_cols;
  for (const auto& name : spec.l_covariates) {
    const int c = column_of(data.covariate_names, name);
    if (c < 0) throw DataError("unknown longitudinal covariate '" + name + "'");
    l_cols.push_back(c);
    d.beta_l_names.push_back(name);
  }

  const auto n_rec = static_cast<Eigen::Index>(data.longitudinal.size());
  const auto p = static_cast<Eigen::Index>(d.beta_l_names.size());
  const Eigen::Index q = spec.shared.dimension();
  d.y.resize(n_rec);
  d.time.resize(n_rec);
  d.x_l.resize(n_rec, p);
  d.z.resize(n_rec, q);
  d.subject_of.resize(data.longitudinal.size());

  // Subjects: survival table when present, otherwise longitudinal ids.
  std::map<std::string, std::size_t> index;
  if (data.has_survival()) {
    for (const auto& s : data.survival) {
      index.emplace(s.subject_id, d.subjects.size());
      d.subjects.push_back({s.subject_id, 0, 0, s.entry, s.exit, s.event});
    }
  } else {
    for (const auto& r : data.longitudinal) {
      if (index.emplace(r.subject_id, d.subjects.size()).second) {
        d.subjects.push_back({r.subject_id, 0, 0, 0.0, 0.0, false});
      }
    }
  }

  std::vector<bool> seen(d.subjects.size(), false);
  for (Eigen::Index r = 0; r < n_rec; ++r) {
    const auto& rec = data.longitudinal[static_cast<std::size_t>(r)];
    const std::size_t i = index.at(rec.subject_id);
    SubjectDesign& sd = d.subjects[i];
    if (!seen[i]) {
      sd.begin = static_cast<std::size_t>(r);
      seen[i] = true;
    }
    sd.end = static_cast<std::size_t>(r) + 1;
    d.subject_of[static_cast<std::size_t>(r)] = i;
    d.y(r) = rec.response;
    d.time(r) = rec.time;
    Eigen::Index c = 0;
    if (spec.l_intercept) d.x_l(r, c++) = 1.0;
    if (spec.l_time) d.x_l(r, c++) = rec.time;
    for (int col : l_cols) d.x_l(r, c++) = rec.covariates[static_cast<std::size_t>(col)];
    if (spec.shared.intercept) d.z(r, spec.shared.intercept_column()) = 1.0;
    if (spec.shared.slope) d.z(r, spec.shared.slope_column()) = rec.time;
    if (data.has_survival() && rec.time > sd.exit) ++d.records_after_exit;
  }
  for (std::size_t i = 0; i < d.subjects.size(); ++i) {
    if (!seen[i]) {
      d.subjects[i].begin = d.subjects[i].end = static_cast<std::size_t>(n_rec);
    }
  }

  d.x_s.resize(static_cast<Eigen::Index>(d.subjects.size()),
               static_cast<Eigen::Index>(spec.s_covariates.size()));
  for (std::size_t j = 0; j < spec.s_covariates.size(); ++j) {
    const std::string& name = spec.s_covariates[j];
    d.beta_s_names.push_back(name);
    const int sc = column_of(data.survival_covariate_names, name);
    const int lc = column_of(data.covariate_names, name);
    if (sc < 0 && lc < 0) throw DataError("unknown survival covariate '" + name + "'");
    for (std::size_t i = 0; i < d.subjects.size(); ++i) {
      double value;
      if (sc >= 0) {
        value = data.survival[i].covariates[static_cast<std::size_t>(sc)];
      } else {
        if (d.subjects[i].size() == 0) {
          throw DataError("no baseline record for survival covariate '" + name +
                          "' of subject " + d.subjects[i].id);
        }
        value = data.longitudinal[d.subjects[i].begin].covariates[static_cast<std::size_t>(lc)];
      }
      d.x_s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    }
  }
  if (joint) d.initial_grid = default_grid(data, spec.grid_k);
  return d;
}

}  // namespace qjm
