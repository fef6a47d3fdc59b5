#include "qjm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "qjm/io.hpp"

namespace qjm {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Biased (divide by N) autocovariance at lag k.
double autocov(std::span<const double> x, double m, std::size_t k) {
  double s = 0.0;
  for (std::size_t t = 0; t + k < x.size(); ++t) s += (x[t] - m) * (x[t + k] - m);
  return s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double m) {
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

const ParameterSummary& Summary::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw std::out_of_range("no summary for parameter '" + name + "'");
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double sign_fraction(std::span<const double> x) {
  if (x.empty()) return 0.5;
  double pos = 0.0, neg = 0.0;
  for (double v : x) {
    if (v > 0.0) pos += 1.0;
    else if (v < 0.0) neg += 1.0;
    else { pos += 0.5; neg += 0.5; }
  }
  return std::max(pos, neg) / static_cast<double>(x.size());
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return static_cast<double>(n);
  const double m = mean_of(x);
  const double g0 = autocov(x, m, 0);
  if (!(g0 > 0.0)) return 1.0;
  // tau = -1 + 2 * sum of positive pair sums Gamma_k = rho_2k + rho_2k+1
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (autocov(x, m, 2 * k) + autocov(x, m, 2 * k + 1)) / g0;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) / std::max(tau, 1e-12);
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

double geweke_z(std::span<const double> x, double first, double last) {
  const std::size_t n = x.size();
  const auto na = static_cast<std::size_t>(std::floor(first * static_cast<double>(n)));
  const auto nb = static_cast<std::size_t>(std::floor(last * static_cast<double>(n)));
  if (na < 2 || nb < 2) return 0.0;
  const auto a = x.subspan(0, na);
  const auto b = x.subspan(n - nb);
  const double ma = mean_of(a), mb = mean_of(b);
  const double se2 = variance_of(a, ma) / effective_sample_size(a) +
                     variance_of(b, mb) / effective_sample_size(b);
  if (!(se2 > 0.0)) return ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
  return (ma - mb) / std::sqrt(se2);
}

ParameterSummary summarize_draws(const std::string& name, std::span<const double> x) {
  ParameterSummary s;
  s.name = name;
  s.draws = x.size();
  if (x.empty()) return s;
  s.mean = mean_of(x);
  s.sd = std::sqrt(variance_of(x, s.mean));
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  s.q025 = sorted_quantile(sorted, 0.025);
  s.q25 = sorted_quantile(sorted, 0.25);
  s.q50 = sorted_quantile(sorted, 0.5);
  s.q75 = sorted_quantile(sorted, 0.75);
  s.q975 = sorted_quantile(sorted, 0.975);
  s.sign_fraction = sign_fraction(x);
  s.significant = s.sign_fraction >= kSignificanceLevel;
  s.ess = effective_sample_size(x);
  s.geweke_z = geweke_z(x);
  return s;
}

Summary summarize(const PosteriorSample& sample) {
  Summary out;
  out.metadata = sample.metadata;
  out.draws = sample.draws();
  out.parameters.reserve(sample.parameters());
  for (std::size_t j = 0; j < sample.parameters(); ++j)
    out.parameters.push_back(summarize_draws(sample.names()[j], sample.column(j)));
  return out;
}

void write_summary(std::ostream& out, const Summary& s) {
  out << "mode=" << s.metadata.mode << '\n';
  out << "tau=" << (s.metadata.tau ? format_double(*s.metadata.tau) : "none") << '\n';
  out << "seed=" << s.metadata.seed << '\n';
  out << "spec_hash=" << s.metadata.spec_hash << '\n';
  out << "draws=" << s.draws << '\n';
  for (const auto& p : s.parameters) {
    const auto line = [&](const char* key, double v) {
      out << p.name << '.' << key << '=' << format_double(v) << '\n';
    };
    line("mean", p.mean);
    line("sd", p.sd);
    line("q2.5", p.q025);
    line("q25", p.q25);
    line("q50", p.q50);
    line("q75", p.q75);
    line("q97.5", p.q975);
    line("sign_fraction", p.sign_fraction);
    out << p.name << ".significant=" << (p.significant ? 1 : 0) << '\n';
    line("ess", p.ess);
    line("geweke_z", p.geweke_z);
  }
}

std::vector<FigureRow> emit_figure_data(const std::vector<PosteriorSample>& battery,
                                        const std::string& parameter) {
  std::vector<FigureRow> rows;
  for (const auto& sample : battery) {
    const auto& col = sample.column(parameter);
    const bool sig = sign_fraction(col) >= kSignificanceLevel;
    for (std::size_t r = 0; r < col.size(); ++r)
      rows.push_back({sample.metadata.tau, sample.iterations()[r], col[r], sig});
  }
  return rows;
}

void write_figure_csv(std::ostream& out, const std::string& parameter,
                      const std::vector<FigureRow>& rows) {
  out << "tau,iteration," << parameter << ",significant\n";
  for (const auto& r : rows) {
    out << (r.tau ? format_double(*r.tau) : "mean") << ',' << r.iteration << ','
        << format_double(r.value) << ',' << (r.significant ? 1 : 0) << '\n';
  }
}

}  // namespace qjm
