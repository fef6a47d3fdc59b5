#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qjm {

struct LongitudinalRecord {
  std::string subject_id;
  double time = 0.0;
  double response = 0.0;
  /// Values aligned with JointDataset::covariate_names.
  std::vector<double> covariates;
};

struct SurvivalRecord {
  std::string subject_id;
  double entry = 0.0;
  double exit = 0.0;
  bool event = false;
  /// Optional baseline covariates aligned with
  /// JointDataset::survival_covariate_names.
  std::vector<double> covariates;
};

struct JointDataset {
  std::vector<std::string> covariate_names;
  std::vector<std::string> survival_covariate_names;
  std::vector<LongitudinalRecord> longitudinal;
  std::vector<SurvivalRecord> survival;

  /// Number of distinct subjects over both tables.
  std::size_t n() const;

  bool has_survival() const noexcept { return !survival.empty(); }

  /// Sorts survival rows by subject id and longitudinal rows by
  /// (subject id, time, response, covariates).
  void canonicalize();

  /// Throws DataError on non-finite values, entry >= exit, duplicated
  /// survival rows, ragged covariate vectors, or (when survival data is
  /// present) subjects missing from either table.
  void validate() const;
};

enum class FitMode { LongitudinalOnly, MeanJoint, QuantileJoint };

const char* to_string(FitMode mode) noexcept;
/// Accepts "long-quantile", "long-only", "mean-joint", "quantile-joint".
FitMode parse_fit_mode(const std::string& text);

inline bool is_joint(FitMode mode) noexcept { return mode != FitMode::LongitudinalOnly; }

/// Which subject-level random effects enter the shared predictor
/// gamma_0i + gamma_1i * t.
struct SharedEffects {
  bool intercept = true;
  bool slope = true;

  int dimension() const noexcept { return (intercept ? 1 : 0) + (slope ? 1 : 0); }
  int intercept_column() const noexcept { return intercept ? 0 : -1; }
  int slope_column() const noexcept { return slope ? (intercept ? 1 : 0) : -1; }
};

struct PriorSpec {
  /// Longitudinal fixed effects N(beta_mean, beta_cov). Empty means zero mean
  /// and beta_variance * I.
  Eigen::VectorXd beta_mean;
  Eigen::MatrixXd beta_cov;
  double beta_variance = 1e4;

  /// sigma^2 ~ IG(a, b).
  double sigma2_shape = 0.01;
  double sigma2_rate = 0.01;

  /// lambda_k ~ Gamma(a, b), independently for every hazard piece.
  double lambda_shape = 0.01;
  double lambda_rate = 0.01;

  double alpha_mean = 0.0;
  double alpha_variance = 10.0;

  /// Survival-only coefficients, independent N(beta_s_mean, beta_s_variance).
  double beta_s_mean = 0.0;
  double beta_s_variance = 100.0;

  /// Random-effects covariance ~ IW(re_dof, re_scale); empty scale means I.
  double re_dof = 4.0;
  Eigen::MatrixXd re_scale;

  Eigen::VectorXd resolved_beta_mean(Eigen::Index p) const;
  Eigen::MatrixXd resolved_beta_cov(Eigen::Index p) const;
  Eigen::MatrixXd resolved_re_scale(Eigen::Index q) const;

  /// Throws ConfigError on non-positive scale parameters or matrices that
  /// are not symmetric positive definite.
  void validate(Eigen::Index p, Eigen::Index q) const;
};

struct McmcSettings {
  long chain_length = 10000;
  long burn_in = 1000;
  long thin = 9;
  std::uint64_t seed = 1;
  bool store_random_effects = false;

  /// (chain_length - burn_in) / thin, rounded down.
  long stored_draws() const noexcept;
  /// Whether the 1-based iteration `it` is kept.
  bool keeps(long it) const noexcept { return it > burn_in && (it - burn_in) % thin == 0; }
  void validate() const;
};

struct ModelSpec {
  FitMode mode = FitMode::QuantileJoint;
  /// Empty means mean regression for the longitudinal submodel.
  std::vector<double> tau_levels;
  bool l_intercept = true;
  bool l_time = true;
  std::vector<std::string> l_covariates;
  std::vector<std::string> s_covariates;
  SharedEffects shared;
  PriorSpec priors;
  int grid_k = 10;
  McmcSettings mcmc;

  void validate() const;
};

/// Cut points t_0 < ... < t_K and piece values lambda_1..lambda_K.
/// Piece k covers (t_{k-1}, t_k]; the first piece also contains t_0.
struct HazardGrid {
  std::vector<double> cuts;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double start() const { return cuts.front(); }
  double end() const { return cuts.back(); }
  /// Index of the piece containing t; throws std::out_of_range outside
  /// [t_0, t_K].
  std::size_t interval_of(double t) const;
  double value_at(double t) const { return values[interval_of(t)]; }
  void validate() const;
};

/// Cuts at event-time quantiles, t_0 = min entry, t_K = max exit. Every piece
/// holds at least one event. Values start at the overall occurrence/exposure
/// rate. Throws DataError with no events or fewer distinct event times than K.
HazardGrid default_grid(const JointDataset& data, int k);

struct SubjectDesign {
  std::string id;
  std::size_t begin = 0;  // longitudinal rows [begin, end)
  std::size_t end = 0;
  double entry = 0.0;
  double exit = 0.0;
  bool event = false;

  std::size_t size() const noexcept { return end - begin; }
};

/// Design matrices for one fit. Row order is the canonical record order.
struct DesignBundle {
  std::vector<std::string> beta_l_names;
  std::vector<std::string> beta_s_names;
  SharedEffects shared;
  bool has_survival = false;

  Eigen::VectorXd y;
  Eigen::VectorXd time;
  Eigen::MatrixXd x_l;  // N x p_l
  Eigen::MatrixXd z;    // N x q, columns [1, t] per shared flags
  std::vector<std::size_t> subject_of;

  std::vector<SubjectDesign> subjects;
  Eigen::MatrixXd x_s;  // n x p_s, baseline constants

  /// Longitudinal rows measured after the subject's exit time.
  std::size_t records_after_exit = 0;

  /// default_grid(data, grid_k) in joint modes, empty otherwise.
  HazardGrid initial_grid;

  std::size_t n() const noexcept { return subjects.size(); }
  std::size_t records() const noexcept { return static_cast<std::size_t>(y.size()); }
};

/// Builds the designs on a canonicalized copy of `data`, so the result does
/// not depend on input row order. Survival covariates are looked up among the
/// survival-table columns first, then taken from the subject's first
/// longitudinal record.
DesignBundle build_designs(const JointDataset& data, const ModelSpec& spec);

}  // namespace qjm
