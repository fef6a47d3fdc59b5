// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cli.hpp"
#include "qjm/ald.hpp"
#include "qjm/ars.hpp"
#include "qjm/diagnostics.hpp"
#include "qjm/distributions.hpp"
#include "qjm/joint.hpp"
#include "qjm/simulate.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace qjm;
using namespace qjm::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

void note(const char* fmt, double v) {
  std::fprintf(stderr, fmt, v);
  std::fflush(stderr);
}

// Runs f(0..n-1) on all available cores.
void parallel_for(int n, const std::function<void(int)>& f) {
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(n)));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) f(k);
    });
  }
  for (auto& t : pool) t.join();
}

template <typename Dist>
std::function<double(double)> cdf_of(const Dist& d) {
  return [d](double x) { return boost::math::cdf(d, x); };
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

// Small simulated longitudinal-only design with random intercept and slope.
DesignBundle small_longitudinal(std::uint64_t seed) {
  RngStream r(seed);
  SimScenario sc = default_scenario();
  sc.n = 20;
  ModelSpec spec;
  spec.mode = FitMode::LongitudinalOnly;
  return build_designs(simulate(sc, r).data, spec);
}

// ---------------------------------------------------------------------------

Outcome full_conditionals() {
  Outcome o;
  constexpr int kDraws = 100000;
  double worst = 0.0;
  auto record = [&](double ks, const std::string& what) {
    worst = std::max(worst, ks);
    o.require(ks < 0.02, what);
  };

  const DesignBundle d = small_longitudinal(1);
  const auto n_rec = static_cast<Eigen::Index>(d.records());
  RngStream rng(2);
  PriorSpec prior;
  prior.beta_variance = 25.0;
  prior.beta_mean = Eigen::Vector2d(1.0, 0.0);
  LongState s;
  s.beta_l = Eigen::Vector2d(5.0, -0.5);
  s.gamma = Eigen::MatrixXd(static_cast<Eigen::Index>(d.n()), 2);
  for (Eigen::Index i = 0; i < s.gamma.rows(); ++i) {
    s.gamma(i, 0) = rng.standard_normal();
    s.gamma(i, 1) = 0.3 * rng.standard_normal();
  }
  s.sigma2 = 0.7;
  s.re_cov = Eigen::Matrix2d::Identity();
  s.w = Eigen::VectorXd(n_rec);
  for (Eigen::Index k = 0; k < n_rec; ++k) s.w(k) = draw_exponential(1.0 / s.sigma2, rng);

  for (bool quantile : {false, true}) {
    const QuantileLevel q(0.3);
    const ErrorModel err = quantile ? ErrorModel::asymmetric_laplace(q) : ErrorModel::gaussian();
    LongState st = s;
    if (!quantile) st.w.resize(0);

    // beta_l: precision X' D X + prior^-1, canonical X' D (y - z gamma - xi w) + prior^-1 mu
    Eigen::Matrix2d prec = Eigen::Matrix2d::Identity() / prior.beta_variance;
    Eigen::Vector2d canon = prec * prior.beta_mean;
    for (Eigen::Index k = 0; k < n_rec; ++k) {
      const std::size_t i = d.subject_of[static_cast<std::size_t>(k)];
      const double w = quantile ? st.w(k) : 1.0;
      const double dk = 1.0 / (st.sigma2 * (quantile ? err.phi * w : 1.0));
      const double shared = st.gamma(static_cast<Eigen::Index>(i), 0) +
                            st.gamma(static_cast<Eigen::Index>(i), 1) * d.time(k);
      const Eigen::Vector2d x(1.0, d.time(k));
      prec += dk * x * x.transpose();
      canon += dk * x * (d.y(k) - shared - (quantile ? err.xi * w : 0.0));
    }
    const Eigen::Matrix2d cov = prec.inverse();
    const Eigen::Vector2d mean = cov * canon;
    std::vector<double> b0(kDraws), b1(kDraws);
    for (int k = 0; k < kDraws; ++k) {
      const Eigen::VectorXd b = update_beta_l(st, d, err, prior, rng);
      b0[static_cast<std::size_t>(k)] = b(0);
      b1[static_cast<std::size_t>(k)] = b(1);
    }
    record(ks_statistic(b0, cdf_of(boost::math::normal_distribution<>(mean(0), std::sqrt(cov(0, 0))))),
           "beta_l[0]");
    record(ks_statistic(b1, cdf_of(boost::math::normal_distribution<>(mean(1), std::sqrt(cov(1, 1))))),
           "beta_l[1]");

    // sigma2: shape a0 + 3N/2 (quantile) or a0 + N/2 (mean)
    const Eigen::VectorXd res = location_residuals(d, st);
    double shape = prior.sigma2_shape, rate = prior.sigma2_rate;
    for (Eigen::Index k = 0; k < n_rec; ++k) {
      if (quantile) {
        const double w = st.w(k), e = res(k) - err.xi * w;
        shape += 1.5;
        rate += e * e / (2.0 * err.phi * w) + w;
      } else {
        shape += 0.5;
        rate += 0.5 * res(k) * res(k);
      }
    }
    std::vector<double> sig(kDraws);
    for (auto& v : sig) v = update_sigma2(st, res, err, prior, rng);
    record(ks_statistic(sig, cdf_of(boost::math::inverse_gamma_distribution<>(shape, rate))), "sigma2");
  }

  // weights: 1/w ~ IG(sqrt(xi^2 + 2 phi) / |r|, (xi^2 + 2 phi) / (sigma2 phi)), and w
  // against the grid-normalized kernel w^-1/2 exp(-(r - xi w)^2 / (2 sigma2 phi w) - w / sigma2)
  for (const auto& [tau, r, sigma2] : {std::tuple{0.3, 0.8, 0.7}, std::tuple{0.5, -0.2, 1.0},
                                      std::tuple{0.9, 1.5, 0.4}}) {
    const QuantileLevel q(tau);
    const ErrorModel err = ErrorModel::asymmetric_laplace(q);
    LongState st;
    st.sigma2 = sigma2;
    st.w = Eigen::VectorXd::Ones(kDraws);
    const Eigen::VectorXd w = update_weights(st, Eigen::VectorXd::Constant(kDraws, r), err, rng);
    const double c = q.xi() * q.xi() + 2.0 * q.phi();
    std::vector<double> inv(kDraws), direct(kDraws);
    for (int k = 0; k < kDraws; ++k) {
      inv[static_cast<std::size_t>(k)] = 1.0 / w(k);
      direct[static_cast<std::size_t>(k)] = w(k);
    }
    record(ks_statistic(inv, cdf_of(boost::math::inverse_gaussian_distribution<>(std::sqrt(c) / std::abs(r),
                                                                                 c / (sigma2 * q.phi())))),
           "inverse weight");
    const GridDistribution grid(
        [&](double v) {
          const double e = r - q.xi() * v;
          return -0.5 * std::log(v) - e * e / (2.0 * sigma2 * q.phi() * v) - v / sigma2;
        },
        1e-9, 60.0 * sigma2, 400001);
    record(ks_statistic(direct, [&](double v) { return grid.cdf(v); }), "weight grid");
  }

  // lambda_k: Gamma(a0 + events_k, b0 + exposure_k), exposure by quadrature
  {
    JointDataset data;
    const std::vector<std::tuple<double, double, bool>> rows{
        {0.0, 3.0, true}, {1.0, 2.0, true}, {0.0, 5.0, false}, {2.5, 4.0, true}, {0.5, 4.5, true}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& [e, x, ev] = rows[i];
      const std::string id = "s" + std::to_string(i);
      data.longitudinal.push_back({id, e, 1.0, {}});
      data.survival.push_back({id, e, x, ev, {}});
    }
    ModelSpec spec;
    spec.mode = FitMode::MeanJoint;
    spec.grid_k = 2;
    const DesignBundle sd = build_designs(data, spec);
    SurvState ss;
    ss.grid = sd.initial_grid;
    ss.alpha = 0.6;
    ss.beta_s = Eigen::VectorXd(0);
    Eigen::MatrixXd gamma(5, 2);
    gamma << 0.3, 0.1, -0.5, 0.2, 0.0, -0.1, 0.8, 0.05, -0.2, -0.3;
    PriorSpec lp;
    std::vector<double> shape(ss.grid.size(), lp.lambda_shape), rate(ss.grid.size(), lp.lambda_rate);
    for (std::size_t i = 0; i < sd.n(); ++i) {
      const auto& sub = sd.subjects[i];
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t k = 0; k < ss.grid.size(); ++k) {
        const double a = std::max(ss.grid.cuts[k], sub.entry), b = std::min(ss.grid.cuts[k + 1], sub.exit);
        if (b > a) {
          rate[k] += integrate(
              [&](double u) { return std::exp(ss.alpha * (gamma(ii, 0) + gamma(ii, 1) * u)); }, a, b);
        }
      }
      if (sub.event) {
        for (std::size_t k = 0; k < ss.grid.size(); ++k) {
          if ((sub.exit > ss.grid.cuts[k] || k == 0) && sub.exit <= ss.grid.cuts[k + 1]) {
            shape[k] += 1.0;
            break;
          }
        }
      }
    }
    std::vector<std::vector<double>> draws(ss.grid.size(), std::vector<double>(kDraws));
    for (int k = 0; k < kDraws; ++k) {
      const auto v = update_lambda(ss, sd, gamma, lp, rng);
      for (std::size_t j = 0; j < v.size(); ++j) draws[j][static_cast<std::size_t>(k)] = v[j];
    }
    for (std::size_t j = 0; j < ss.grid.size(); ++j) {
      record(ks_statistic(draws[j], cdf_of(boost::math::gamma_distribution<>(shape[j], 1.0 / rate[j]))),
             "lambda");
    }
  }
  o.detail << "max KS " << worst;
  return o;
}

Outcome ars_exactness() {
  Outcome o;
  constexpr int kDraws = 100000;
  double worst = 0.0;
  auto record = [&](double ks, const std::string& what) {
    worst = std::max(worst, ks);
    o.require(ks < 0.015, what);
  };
  RngStream rng(3);

  LogConcaveTarget normal;
  normal.log_density = [](double x) { return -0.5 * (x - 1.0) * (x - 1.0) / 4.0; };
  normal.derivative = [](double x) { return -(x - 1.0) / 4.0; };
  std::vector<double> x(kDraws);
  const std::vector<double> init_n{-2.0, 3.0};
  for (auto& v : x) v = ars_sample(normal, init_n, rng);
  record(ks_statistic(x, cdf_of(boost::math::normal_distribution<>(1.0, 2.0))), "normal");

  LogConcaveTarget gamma;
  gamma.log_density = [](double v) { return 1.5 * std::log(v) - 0.8 * v; };
  gamma.derivative = [](double v) { return 1.5 / v - 0.8; };
  gamma.lower = 0.0;
  const std::vector<double> init_g{1.0, 5.0};
  for (auto& v : x) v = ars_sample(gamma, init_g, rng);
  record(ks_statistic(x, cdf_of(boost::math::gamma_distribution<>(2.5, 1.0 / 0.8))), "gamma");

  // one-subject toy: random intercept shared with the hazard
  JointDataset data;
  data.longitudinal = {{"a", 0.0, 1.2, {}}, {"a", 1.0, 0.4, {}}, {"a", 2.0, 0.9, {}}};
  data.survival = {{"a", 0.0, 2.5, true, {}}};
  ModelSpec spec;
  spec.mode = FitMode::QuantileJoint;
  spec.tau_levels = {0.3};
  spec.shared = {true, true};
  spec.grid_k = 1;
  const DesignBundle d = build_designs(data, spec);
  const QuantileLevel q(0.3);
  const ErrorModel err = ErrorModel::asymmetric_laplace(q);
  ChainState s;
  s.longitudinal.beta_l = Eigen::Vector2d(0.5, 0.1);
  s.longitudinal.sigma2 = 0.4;
  s.longitudinal.w = Eigen::Vector3d(0.3, 0.8, 0.5);
  s.longitudinal.re_cov = (Eigen::Matrix2d() << 0.5, 0.0, 0.0, 0.1).finished();
  s.longitudinal.gamma = Eigen::MatrixXd::Zero(1, 2);
  s.survival.grid = {d.initial_grid.cuts, {0.3}};
  s.survival.alpha = 0.8;
  s.survival.beta_s = Eigen::VectorXd(0);
  const double lam = 0.3, alpha = 0.8, exit = 2.5;

  // gamma_0 with gamma_1 = 0; the update draws gamma_0 first
  const Eigen::VectorXd r = d.y - d.x_l * s.longitudinal.beta_l;
  const GridDistribution g0(
      [&](double g) {
        double v = -0.5 * g * g / 0.5;
        for (int j = 0; j < 3; ++j) {
          const double w = s.longitudinal.w(j), e = r(j) - g - q.xi() * w;
          v -= e * e / (2.0 * 0.4 * q.phi() * w);
        }
        return v + alpha * g - lam * std::exp(alpha * g) * exit;
      },
      -8.0, 8.0);
  for (auto& v : x) v = update_shared_effects(s, d, err, rng)(0, 0);
  record(ks_statistic(x, [&](double v) { return g0.cdf(v); }), "gamma conditional");

  // alpha with both shared effects fixed
  s.longitudinal.gamma << 0.4, -0.3;
  const double g_int = 0.4, g_slope = -0.3;
  const GridDistribution a_dist(
      [&](double a) {
        const double rate = a * g_slope;
        const double h = lam * std::exp(a * g_int) *
                         (std::abs(rate) < 1e-12 ? exit : std::expm1(rate * exit) / rate);
        return -0.5 * a * a / 10.0 + a * (g_int + g_slope * exit) - h;
      },
      -12.0, 12.0);
  PriorSpec prior;
  for (auto& v : x) v = update_alpha(s, d, prior, rng);
  record(ks_statistic(x, [&](double v) { return a_dist.cdf(v); }), "alpha conditional");
  o.detail << "max KS " << worst;
  return o;
}

Outcome ald_mixture() {
  Outcome o;
  RngStream rng(4);
  double worst = 0.0;
  const double location = 2.0, scale = 1.5;
  std::vector<double> y(1000000);
  for (int k = 1; k <= 9; ++k) {
    const double tau = 0.1 * k;
    const QuantileLevel q(tau);
    for (auto& v : y) v = mixture_draw(location, scale, q, rng).y;
    const auto at = y.begin() + static_cast<std::ptrdiff_t>(tau * static_cast<double>(y.size()));
    std::nth_element(y.begin(), at, y.end());
    const double off = std::abs(*at - location) / scale;
    worst = std::max(worst, off);
    o.require(off < 0.01, "tau " + std::to_string(tau));
  }
  o.detail << "max |q_tau - location| / sigma " << worst;
  return o;
}

Outcome hazard_consistency() {
  Outcome o;
  RngStream rng(5);
  double worst_q = 0.0, worst_inv = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const int pieces = 1 + static_cast<int>(rng.uniform() * 8);
    HazardGrid g;
    g.cuts.push_back(0.0);
    for (int k = 1; k < pieces; ++k) g.cuts.push_back(12.0 * (k + 0.6 * (rng.uniform() - 0.5)) / pieces);
    g.cuts.push_back(12.0);
    for (int k = 0; k < pieces; ++k) g.values.push_back(0.01 + 0.5 * rng.uniform());
    const double entry = 6.0 * rng.uniform(), exit = entry + (12.0 - entry) * rng.uniform();
    const double alpha = 4.0 * (rng.uniform() - 0.5), eta = rng.uniform() - 0.5;
    const Trajectory tr{2.0 * (rng.uniform() - 0.5), 0.6 * (rng.uniform() - 0.5)};

    double q = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double a = std::max(g.cuts[k], entry), b = std::min(g.cuts[k + 1], exit);
      if (b > a) {
        q += integrate([&](double u) { return g.values[k] * std::exp(alpha * tr.at(u) + eta); }, a, b);
      }
    }
    const double h = cumulative_hazard(entry, exit, g, alpha, tr, eta);
    worst_q = std::max(worst_q, std::abs(h - q) / q);

    for (int k = 0; k < 10; ++k) {
      const double u = rng.uniform();
      const double t = invert_hazard(u, entry, g, alpha, tr, eta);
      if (std::isinf(t)) {
        o.require(cumulative_hazard(entry, 12.0, g, alpha, tr, eta) < -std::log(u), "inversion past grid");
        continue;
      }
      const double back = cumulative_hazard(entry, t, g, alpha, tr, eta);
      worst_inv = std::max(worst_inv, std::abs(back + std::log(u)) / -std::log(u));
    }
  }
  o.require(worst_q < 1e-6, "quadrature");
  o.require(worst_inv < 1e-9, "round trip");
  o.detail << "max quadrature rel err " << worst_q << ", max round-trip rel err " << worst_inv;
  return o;
}

bool covers(const ParameterSummary& p, double truth) { return p.q025 <= truth && truth <= p.q975; }

Outcome parameter_recovery() {
  Outcome o;
  constexpr int kReps = 20;
  const SimScenario sc = default_scenario();
  std::vector<std::array<int, 4>> hits(kReps);
  std::vector<double> alpha_mean(kReps);
  parallel_for(kReps, [&](int rep) {
    RngStream data_rng(derive_seed(500, static_cast<std::uint64_t>(rep)));
    const SimulatedData sim = simulate(sc, data_rng);
    ModelSpec spec;
    spec.mode = FitMode::QuantileJoint;
    spec.tau_levels = {0.5};
    spec.mcmc.seed = derive_seed(600, static_cast<std::uint64_t>(rep));
    const DesignBundle d = build_designs(sim.data, spec);
    RngStream rng(spec.mcmc.seed);
    const Summary s = summarize(run_chain(d, spec, 0.5, rng));
    hits[static_cast<std::size_t>(rep)] = {covers(s.at("beta_l.intercept"), sc.beta_intercept),
                                           covers(s.at("beta_l.time"), sc.beta_time),
                                           covers(s.at("sigma2"), sc.sigma2), covers(s.at("alpha"), sc.alpha)};
    alpha_mean[static_cast<std::size_t>(rep)] = s.at("alpha").mean;
    note("  recovery replicate done, alpha mean %.3f\n", s.at("alpha").mean);
  });
  const char* names[] = {"beta_l.intercept", "beta_l.time", "sigma2", "alpha"};
  for (int j = 0; j < 4; ++j) {
    int n = 0;
    for (const auto& h : hits) n += h[static_cast<std::size_t>(j)];
    o.require(n >= 16, names[j]);
    o.detail << names[j] << " " << n << "/20, ";
  }
  const double avg = sample_mean(alpha_mean);
  o.require(std::abs(avg - sc.alpha) <= 0.15, "mean alpha");
  o.detail << "mean alpha " << avg;
  return o;
}

Outcome sign_pattern() {
  Outcome o;
  constexpr int kReps = 20;
  const SimScenario sc = sign_pattern_scenario();
  std::vector<int> ok(kReps);
  std::vector<std::array<double, 2>> means(kReps);
  parallel_for(kReps, [&](int rep) {
    RngStream data_rng(derive_seed(700, static_cast<std::uint64_t>(rep)));
    const SimulatedData sim = simulate(sc, data_rng);
    ModelSpec spec;
    spec.mode = FitMode::QuantileJoint;
    spec.tau_levels = {0.1, 0.5};
    spec.mcmc.seed = derive_seed(800, static_cast<std::uint64_t>(rep));
    const DesignBundle d = build_designs(sim.data, spec);
    const auto battery = run_quantile_battery(d, spec, 1);
    const ParameterSummary low = summarize(battery[0]).at("alpha");
    const ParameterSummary mid = summarize(battery[1]).at("alpha");
    ok[static_cast<std::size_t>(rep)] = low.significant && low.mean < 0 && mid.significant && mid.mean > 0;
    means[static_cast<std::size_t>(rep)] = {low.mean, mid.mean};
    std::fprintf(stderr, "  sign replicate: alpha(0.1) %.3f [%.3f], alpha(0.5) %.3f [%.3f]\n", low.mean,
                 low.sign_fraction, mid.mean, mid.sign_fraction);
  });
  int n = 0;
  for (int v : ok) n += v;
  o.require(n >= 16, "replicates");
  o.detail << n << "/20 replicates with significant negative alpha at 0.1 and positive at 0.5";
  return o;
}

Outcome mode_consistency() {
  Outcome o;
  constexpr int kReps = 3;
  SimScenario sc = default_scenario();
  sc.family = ErrorFamily::Gaussian;
  std::vector<double> diffs(kReps * 2);
  parallel_for(kReps, [&](int rep) {
    RngStream data_rng(derive_seed(900, static_cast<std::uint64_t>(rep)));
    const SimulatedData sim = simulate(sc, data_rng);
    ModelSpec mean_spec;
    mean_spec.mode = FitMode::MeanJoint;
    mean_spec.mcmc.seed = derive_seed(1000, static_cast<std::uint64_t>(rep));
    ModelSpec q_spec = mean_spec;
    q_spec.mode = FitMode::QuantileJoint;
    q_spec.tau_levels = {0.5};
    const DesignBundle d = build_designs(sim.data, mean_spec);
    RngStream a(mean_spec.mcmc.seed), b(q_spec.mcmc.seed);
    const Summary m = summarize(run_chain(d, mean_spec, std::nullopt, a));
    const Summary q = summarize(run_chain(d, q_spec, 0.5, b));
    for (const auto& name : d.beta_l_names) {
      const double diff = std::abs(m.at("beta_l." + name).mean - q.at("beta_l." + name).mean);
      diffs[static_cast<std::size_t>(rep * 2) + (name == "time" ? 1 : 0)] = diff;
    }
  });
  const double worst = *std::max_element(diffs.begin(), diffs.end());
  o.require(worst < 0.05, "fixed effects");
  o.detail << "max |mean-joint - quantile-joint(0.5)| over fixed effects " << worst;
  return o;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qjm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "qjm-acceptance-determinism";
  fs::remove_all(root);
  o.require(cli({"simulate", "--seed", "7", "--n", "100", "-o", (root / "data").string()}) == 0, "simulate");
  const auto fit = [&](const std::string& out, const std::string& jobs, std::vector<std::string> extra) {
    std::vector<std::string> a{"fit", "--long", (root / "data/longitudinal.csv").string(), "--surv",
                               (root / "data/survival.csv").string(), "--chain-length", "2000", "--burn-in",
                               "200", "--thin", "9", "--seed", "99", "--jobs", jobs, "-o", (root / out).string()};
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  o.require(fit("q1", "1", {"--tau", "0.1,0.5,0.9"}) == 0, "fit");
  o.require(fit("q2", "3", {"--tau", "0.1,0.5,0.9"}) == 0, "fit");
  o.require(fit("m1", "1", {"--mode", "mean-joint"}) == 0, "fit");
  o.require(fit("m2", "1", {"--mode", "mean-joint"}) == 0, "fit");
  int compared = 0;
  for (const char* dir : {"tau-0.1", "tau-0.5", "tau-0.9"}) {
    const std::string a = slurp(root / "q1" / dir / "samples.csv");
    o.require(!a.empty() && a == slurp(root / "q2" / dir / "samples.csv"), dir);
    ++compared;
  }
  const std::string m = slurp(root / "m1/mean/samples.csv");
  o.require(!m.empty() && m == slurp(root / "m2/mean/samples.csv"), "mean");
  ++compared;
  o.require(slurp(root / "q1/alpha_figure.csv") == slurp(root / "q2/alpha_figure.csv"), "figure");
  fs::remove_all(root);
  o.detail << compared << " posterior CSV pairs byte-identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"full-conditional oracles", full_conditionals},
      {"ARS exactness", ars_exactness},
      {"ALD mixture quantiles", ald_mixture},
      {"hazard self-consistency", hazard_consistency},
      {"parameter recovery", parameter_recovery},
      {"quantile sign pattern", sign_pattern},
      {"mode consistency", mode_consistency},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    std::fprintf(stderr, "criterion %d: %s\n", id, criteria[k].first);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
