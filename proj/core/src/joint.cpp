#include "qjm/joint.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "qjm/ald.hpp"
#include "qjm/ars.hpp"
#include "qjm/error.hpp"
#include "qjm/io.hpp"

namespace qjm {

namespace {

// Memoizes the last (value, derivative) pair: ARS asks for both at the same x.
template <typename Eval>
class CachedTarget {
 public:
  explicit CachedTarget(Eval eval) : eval_(std::move(eval)) {}

  LogConcaveTarget target() {
    LogConcaveTarget t;
    t.log_density = [this](double x) { return at(x).first; };
    t.derivative = [this](double x) { return at(x).second; };
    return t;
  }

 private:
  const std::pair<double, double>& at(double x) {
    if (!valid_ || x != x_) {
      cached_ = eval_(x);
      x_ = x;
      valid_ = true;
    }
    return cached_;
  }

  Eval eval_;
  double x_ = 0.0;
  bool valid_ = false;
  std::pair<double, double> cached_{0.0, 0.0};
};

template <typename Eval>
CachedTarget<Eval> make_cached(Eval eval) {
  return CachedTarget<Eval>(std::move(eval));
}

std::string now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

Eigen::MatrixXd update_shared_effects(const ChainState& s, const DesignBundle& d,
                                      const ErrorModel& err, RngStream& rng) {
  const LongState& ls = s.longitudinal;
  const SurvState& ss = s.survival;
  const Eigen::Index q = d.z.cols();
  Eigen::MatrixXd gamma = ls.gamma;
  if (q == 0) return gamma;

  const Eigen::MatrixXd prior_prec = ls.re_cov.llt().solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.records()));
  if (d.x_l.cols() > 0) fixed = d.x_l * ls.beta_l;
  const Eigen::VectorXd eta_s = survival_predictor(d, ss.beta_s);
  const int icol = d.shared.intercept_column();
  const int scol = d.shared.slope_column();
  const double alpha = ss.alpha;

  for (std::size_t i = 0; i < d.n(); ++i) {
    const SubjectDesign& sd = d.subjects[i];
    const auto row_i = static_cast<Eigen::Index>(i);
    Eigen::VectorXd g = gamma.row(row_i).transpose();

    for (Eigen::Index c = 0; c < q; ++c) {
      double a = prior_prec(c, c);
      double b = 0.0;
      for (Eigen::Index o = 0; o < q; ++o) {
        if (o != c) b -= prior_prec(c, o) * g(o);
      }
      for (std::size_t row = sd.begin; row < sd.end; ++row) {
        const auto r = static_cast<Eigen::Index>(row);
        const double w = ls.weight(r);
        const double k = 1.0 / (ls.sigma2 * err.phi * w);
        double target = d.y(r) - fixed(r) - err.xi * w;
        for (Eigen::Index o = 0; o < q; ++o) {
          if (o != c) target -= d.z(r, o) * g(o);
        }
        const double zc = d.z(r, c);
        a += k * zc * zc;
        b += k * zc * target;
      }
      const bool is_intercept = static_cast<int>(c) == icol;
      const double event_coef =
          sd.event ? alpha * (is_intercept ? 1.0 : sd.exit) : 0.0;
      const double lin = b + event_coef;
      const double es = eta_s(row_i);

      double drawn;
      if (is_intercept) {
        Trajectory rest;
        if (scol >= 0) rest.slope = g(scol);
        const double h0 = alpha == 0.0
                              ? 0.0
                              : cumulative_hazard(sd.entry, sd.exit, ss.grid, alpha, rest, es);
        auto cached = make_cached([&](double x) {
          const double h = h0 * std::exp(alpha * x);
          return std::pair{-0.5 * a * x * x + lin * x - h, -a * x + lin - alpha * h};
        });
        drawn = ars_draw_near(cached.target(), g(c), rng);
      } else {
        Trajectory traj;
        if (icol >= 0) traj.intercept = g(icol);
        auto cached = make_cached([&](double x) {
          double h = 0.0;
          double m = 0.0;
          if (alpha != 0.0) {
            Trajectory t = traj;
            t.slope = x;
            const HazardIntegral hi = hazard_integral(sd.entry, sd.exit, ss.grid, alpha, t, es);
            h = hi.value;
            m = hi.first_moment;
          }
          return std::pair{-0.5 * a * x * x + lin * x - h, -a * x + lin - alpha * m};
        });
        drawn = ars_draw_near(cached.target(), g(c), rng);
      }
      g(c) = drawn;
    }
    gamma.row(row_i) = g.transpose();
  }
  return gamma;
}

double update_alpha(const ChainState& s, const DesignBundle& d, const PriorSpec& prior,
                    RngStream& rng) {
  const SurvState& ss = s.survival;
  const Eigen::VectorXd eta_s = survival_predictor(d, ss.beta_s);
  std::vector<Trajectory> traj(d.n());
  double event_sum = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    traj[i] = trajectory_of(d.shared, s.longitudinal.gamma, i);
    if (d.subjects[i].event) event_sum += traj[i].at(d.subjects[i].exit);
  }
  auto cached = make_cached([&](double a) {
    const double dev = a - prior.alpha_mean;
    double value = -0.5 * dev * dev / prior.alpha_variance + a * event_sum;
    double grad = -dev / prior.alpha_variance + event_sum;
    for (std::size_t i = 0; i < d.n(); ++i) {
      const SubjectDesign& sd = d.subjects[i];
      const HazardIntegral hi = hazard_integral(sd.entry, sd.exit, ss.grid, a, traj[i],
                                                eta_s(static_cast<Eigen::Index>(i)));
      value -= hi.value;
      grad -= traj[i].intercept * hi.value + traj[i].slope * hi.first_moment;
    }
    return std::pair{value, grad};
  });
  return ars_draw_near(cached.target(), ss.alpha, rng);
}

std::vector<std::string> parameter_names(const DesignBundle& d, const ModelSpec& spec) {
  std::vector<std::string> names;
  for (const auto& n : d.beta_l_names) names.push_back("beta_l." + n);
  if (is_joint(spec.mode)) {
    for (const auto& n : d.beta_s_names) names.push_back("beta_s." + n);
  }
  names.push_back("sigma2");
  if (is_joint(spec.mode)) {
    names.push_back("alpha");
    for (std::size_t k = 0; k < d.initial_grid.size(); ++k) {
      names.push_back("lambda." + std::to_string(k + 1));
    }
  }
  const int q = d.shared.dimension();
  for (int r = 0; r < q; ++r) {
    for (int c = r; c < q; ++c) {
      names.push_back("re_cov." + std::to_string(r + 1) + std::to_string(c + 1));
    }
  }
  if (spec.mcmc.store_random_effects) {
    for (const auto& sd : d.subjects) {
      if (d.shared.intercept) names.push_back("gamma." + sd.id + ".intercept");
      if (d.shared.slope) names.push_back("gamma." + sd.id + ".slope");
    }
  }
  return names;
}

ErrorModel error_model_for(FitMode mode, std::optional<double> tau) {
  if (mode == FitMode::MeanJoint) {
    if (tau) throw ConfigError("mean-joint mode takes no quantile level");
    return ErrorModel::gaussian();
  }
  if (mode == FitMode::QuantileJoint && !tau) {
    throw ConfigError("quantile-joint mode needs a quantile level");
  }
  if (!tau) return ErrorModel::gaussian();
  return ErrorModel::asymmetric_laplace(QuantileLevel(*tau));
}

ChainState initial_state(const DesignBundle& d, const ModelSpec& spec, const ErrorModel& err) {
  ChainState s;
  LongState& ls = s.longitudinal;
  const Eigen::Index p = d.x_l.cols();
  const Eigen::Index q = d.shared.dimension();
  const auto n_rec = static_cast<Eigen::Index>(d.records());

  ls.beta_l = Eigen::VectorXd::Zero(p);
  if (p > 0 && n_rec > 0) {
    const Eigen::MatrixXd gram =
        d.x_l.transpose() * d.x_l + 1e-8 * Eigen::MatrixXd::Identity(p, p);
    ls.beta_l = gram.ldlt().solve(d.x_l.transpose() * d.y);
  }
  Eigen::VectorXd r = d.y;
  if (p > 0) r -= d.x_l * ls.beta_l;

  double scale = 0.0;
  if (err.quantile && n_rec > 0) {
    const double level = err.tau;
    std::vector<double> sorted(r.data(), r.data() + n_rec);
    std::sort(sorted.begin(), sorted.end());
    const double shift =
        sorted[static_cast<std::size_t>(level * static_cast<double>(n_rec - 1))];
    if (spec.l_intercept && p > 0) {
      ls.beta_l(0) += shift;
      r.array() -= shift;
    }
    for (Eigen::Index i = 0; i < n_rec; ++i) scale += check_loss(r(i), level);
    scale /= static_cast<double>(n_rec);
  } else if (n_rec > 0) {
    scale = r.squaredNorm() / static_cast<double>(n_rec);
  }
  ls.sigma2 = std::max(scale, 1e-8);
  ls.gamma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.n()), q);
  if (err.quantile) ls.w = Eigen::VectorXd::Constant(n_rec, ls.sigma2);
  if (q > 0) ls.re_cov = spec.priors.resolved_re_scale(q);

  s.survival.grid = d.initial_grid;
  s.survival.alpha = spec.priors.alpha_mean;
  s.survival.beta_s = Eigen::VectorXd::Constant(d.x_s.cols(), spec.priors.beta_s_mean);
  return s;
}

std::string spec_fingerprint(const ModelSpec& spec) {
  std::ostringstream s;
  const PriorSpec& pr = spec.priors;
  s << "mode=" << to_string(spec.mode) << ";tau=";
  for (double t : spec.tau_levels) s << format_double(t) << ',';
  s << ";l=" << spec.l_intercept << spec.l_time;
  for (const auto& c : spec.l_covariates) s << ',' << c;
  s << ";s=";
  for (const auto& c : spec.s_covariates) s << ',' << c;
  s << ";shared=" << spec.shared.intercept << spec.shared.slope << ";k=" << spec.grid_k;
  s << ";mcmc=" << spec.mcmc.chain_length << ',' << spec.mcmc.burn_in << ',' << spec.mcmc.thin
    << ',' << spec.mcmc.seed << ',' << spec.mcmc.store_random_effects;
  s << ";priors=";
  for (Eigen::Index i = 0; i < pr.beta_mean.size(); ++i) s << format_double(pr.beta_mean(i)) << ',';
  for (Eigen::Index i = 0; i < pr.beta_cov.size(); ++i) {
    s << format_double(pr.beta_cov.data()[i]) << ',';
  }
  for (double v : {pr.beta_variance, pr.sigma2_shape, pr.sigma2_rate, pr.lambda_shape,
                   pr.lambda_rate, pr.alpha_mean, pr.alpha_variance, pr.beta_s_mean,
                   pr.beta_s_variance, pr.re_dof}) {
    s << format_double(v) << ',';
  }
  for (Eigen::Index i = 0; i < pr.re_scale.size(); ++i) {
    s << format_double(pr.re_scale.data()[i]) << ',';
  }
  return fingerprint(s.str());
}

PosteriorSample run_chain(const DesignBundle& d, const ModelSpec& spec, std::optional<double> tau,
                          RngStream& rng, const ChainOptions& options) {
  spec.validate();
  const ErrorModel err = error_model_for(spec.mode, tau);
  const bool joint = is_joint(spec.mode);
  const Eigen::Index q = d.shared.dimension();
  spec.priors.validate(d.x_l.cols(), q);
  if (joint) {
    if (!d.has_survival) throw DataError("joint modes need survival data");
    d.initial_grid.validate();
  }

  ChainState state = initial_state(d, spec, err);
  PosteriorSample sample(parameter_names(d, spec));
  sample.reserve(static_cast<std::size_t>(spec.mcmc.stored_draws()));
  sample.metadata.mode = to_string(spec.mode);
  sample.metadata.tau = tau;
  sample.metadata.seed = rng.seed();
  sample.metadata.spec_hash = spec_fingerprint(spec);
  sample.metadata.started_at = now_iso8601();

  static const char* kBlocks[] = {"beta_l", "random_effects", "weights", "sigma2",
                                  "re_cov", "lambda",         "beta_s",  "alpha"};
  std::vector<double> seconds(std::size(kBlocks), 0.0);
  long iteration = 0;
  auto block = [&](int index, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const SamplerError&) {
      throw;
    } catch (const std::exception& e) {
      throw SamplerError(kBlocks[index], iteration, e.what());
    }
    seconds[static_cast<std::size_t>(index)] +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  LongState& ls = state.longitudinal;
  SurvState& ss = state.survival;
  std::vector<double> row(sample.parameters());
  Eigen::VectorXd residuals;

  for (iteration = 1; iteration <= spec.mcmc.chain_length; ++iteration) {
    state.iteration = iteration;
    block(0, [&] { ls.beta_l = update_beta_l(ls, d, err, spec.priors, rng); });
    if (q > 0) {
      block(1, [&] {
        ls.gamma = joint ? update_shared_effects(state, d, err, rng)
                         : update_random_effects_longonly(ls, d, err, rng);
      });
    }
    residuals = location_residuals(d, ls);
    if (err.quantile) block(2, [&] { ls.w = update_weights(ls, residuals, err, rng); });
    block(3, [&] { ls.sigma2 = update_sigma2(ls, residuals, err, spec.priors, rng); });
    if (q > 0) block(4, [&] { ls.re_cov = update_re_cov(ls.gamma, spec.priors, rng); });
    if (joint) {
      block(5, [&] { ss.grid.values = update_lambda(ss, d, ls.gamma, spec.priors, rng); });
      if (d.x_s.cols() > 0) {
        block(6, [&] { ss.beta_s = update_beta_s(ss, d, ls.gamma, spec.priors, rng); });
      }
      block(7, [&] { ss.alpha = update_alpha(state, d, spec.priors, rng); });
    }

    if (spec.mcmc.keeps(iteration)) {
      std::size_t j = 0;
      for (Eigen::Index k = 0; k < ls.beta_l.size(); ++k) row[j++] = ls.beta_l(k);
      if (joint) {
        for (Eigen::Index k = 0; k < ss.beta_s.size(); ++k) row[j++] = ss.beta_s(k);
      }
      row[j++] = ls.sigma2;
      if (joint) {
        row[j++] = ss.alpha;
        for (double v : ss.grid.values) row[j++] = v;
      }
      for (Eigen::Index r = 0; r < q; ++r) {
        for (Eigen::Index c = r; c < q; ++c) row[j++] = ls.re_cov(r, c);
      }
      if (spec.mcmc.store_random_effects) {
        for (Eigen::Index i = 0; i < ls.gamma.rows(); ++i) {
          for (Eigen::Index c = 0; c < q; ++c) row[j++] = ls.gamma(i, c);
        }
      }
      sample.append(iteration, row);
    }

    if (options.progress && options.progress_every > 0 &&
        (iteration % options.progress_every == 0 || iteration == spec.mcmc.chain_length)) {
      ProgressEvent ev;
      ev.tau = tau;
      ev.iteration = iteration;
      ev.chain_length = spec.mcmc.chain_length;
      for (std::size_t b = 0; b < seconds.size(); ++b) ev.block_seconds.emplace_back(kBlocks[b], seconds[b]);
      options.progress(ev);
    }
  }
  sample.metadata.finished_at = now_iso8601();
  return sample;
}

std::vector<PosteriorSample> run_quantile_battery(const DesignBundle& d, const ModelSpec& spec,
                                                  unsigned jobs, const ChainOptions& options) {
  if (spec.tau_levels.empty()) throw ConfigError("quantile battery needs quantile levels");
  const std::size_t n = spec.tau_levels.size();
  std::vector<PosteriorSample> out(n);
  std::vector<std::exception_ptr> errors(n);

  std::mutex sink_mutex;
  ChainOptions local = options;
  if (options.progress) {
    local.progress = [&](const ProgressEvent& ev) {
      std::lock_guard lock(sink_mutex);
      options.progress(ev);
    };
  }
  auto run_one = [&](std::size_t k) {
    try {
      RngStream rng(derive_seed(spec.mcmc.seed, k));
      out[k] = run_chain(d, spec, spec.tau_levels[k], rng, local);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) run_one(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace qjm
