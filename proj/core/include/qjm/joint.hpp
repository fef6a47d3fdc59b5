#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qjm/longitudinal.hpp"
#include "qjm/model.hpp"
#include "qjm/rng.hpp"
#include "qjm/sample.hpp"
#include "qjm/survival.hpp"

namespace qjm {

struct ChainState {
  LongState longitudinal;
  SurvState survival;
  long iteration = 0;
};

/// Joint-mode random-effect update: per subject, ARS on gamma_0i then
/// gamma_1i. Each coordinate's log full conditional is the Gaussian prior and
/// longitudinal terms plus d_i alpha eta_ls(s_i) - H_i.
Eigen::MatrixXd update_shared_effects(const ChainState& s, const DesignBundle& d,
                                      const ErrorModel& err, RngStream& rng);

/// ARS draw of the association parameter from its prior plus
/// sum_i [d_i alpha eta_ls,i(s_i) - H_i(alpha)].
double update_alpha(const ChainState& s, const DesignBundle& d, const PriorSpec& prior,
                    RngStream& rng);

/// Timing and position of a running chain.
struct ProgressEvent {
  std::optional<double> tau;
  long iteration = 0;
  long chain_length = 0;
  std::vector<std::pair<std::string, double>> block_seconds;
};

using ProgressSink = std::function<void(const ProgressEvent&)>;

struct ChainOptions {
  ProgressSink progress;
  long progress_every = 1000;
};

/// Names of the stored parameters, in column order.
std::vector<std::string> parameter_names(const DesignBundle& d, const ModelSpec& spec);

/// Starting values: least-squares fixed effects, zero random effects, scale
/// from the residuals, occurrence/exposure hazard, alpha at its prior mean.
ChainState initial_state(const DesignBundle& d, const ModelSpec& spec, const ErrorModel& err);

ErrorModel error_model_for(FitMode mode, std::optional<double> tau);

/// Stable 64-bit fingerprint of the model specification, as 16 hex digits.
std::string spec_fingerprint(const ModelSpec& spec);

/// One Gibbs chain. Block order per iteration: beta_l, random effects,
/// weights, sigma2, re_cov, lambda, beta_s, alpha; blocks that do not apply to
/// the mode are skipped. `tau` selects quantile regression (required for
/// quantile-joint, optional for longitudinal-only). Failures are rethrown as
/// SamplerError carrying the block and iteration.
PosteriorSample run_chain(const DesignBundle& d, const ModelSpec& spec, std::optional<double> tau,
                          RngStream& rng, const ChainOptions& options = {});

/// Independent chains, one per spec.tau_levels entry, chain k seeded with
/// derive_seed(spec.mcmc.seed, k). Runs on up to `jobs` threads; results are
/// in tau order and do not depend on `jobs`.
std::vector<PosteriorSample> run_quantile_battery(const DesignBundle& d, const ModelSpec& spec,
                                                  unsigned jobs = 1,
                                                  const ChainOptions& options = {});

}  // namespace qjm
