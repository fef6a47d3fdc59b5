#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qjm/sample.hpp"

namespace qjm {

struct ParameterSummary {
  std::string name;
  std::size_t draws = 0;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q975 = 0.0;
  /// Share of draws on the majority side of zero; zeros count half to each side.
  double sign_fraction = 0.5;
  bool significant = false;
  double ess = 0.0;
  double geweke_z = 0.0;
};

struct Summary {
  SampleMetadata metadata;
  std::size_t draws = 0;
  std::vector<ParameterSummary> parameters;

  /// Throws std::out_of_range for an unknown name.
  const ParameterSummary& at(const std::string& name) const;
};

/// Share of draws at or above which a parameter is flagged significant.
inline constexpr double kSignificanceLevel = 0.95;

/// Sample quantile, linear interpolation between order statistics (type 7).
/// `sorted` must be ascending and nonempty.
double sorted_quantile(std::span<const double> sorted, double p);

double sign_fraction(std::span<const double> x);

/// Geyer's initial positive sequence estimate, clamped to [1, N]. A constant
/// chain has ESS 1.
double effective_sample_size(std::span<const double> x);

/// Mean of the first `first` fraction against the mean of the last `last`
/// fraction, standardized with ESS-based standard errors. 0 when both windows
/// are constant and equal.
double geweke_z(std::span<const double> x, double first = 0.1, double last = 0.5);

ParameterSummary summarize_draws(const std::string& name, std::span<const double> x);

Summary summarize(const PosteriorSample& sample);

/// key=value lines: run metadata, then <parameter>.<statistic> per parameter.
void write_summary(std::ostream& out, const Summary& summary);

struct FigureRow {
  std::optional<double> tau;
  long iteration = 0;
  double value = 0.0;
  bool significant = false;
};

/// Long-format draws of one parameter across a battery of chains, with the
/// significance flag of each chain. Throws std::out_of_range when a sample
/// lacks the parameter.
std::vector<FigureRow> emit_figure_data(const std::vector<PosteriorSample>& battery,
                                        const std::string& parameter);

/// Header `tau,iteration,<parameter>,significant`; tau is `mean` for
/// mean-regression chains.
void write_figure_csv(std::ostream& out, const std::string& parameter,
                      const std::vector<FigureRow>& rows);

}  // namespace qjm
