#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qjm/diagnostics.hpp"
#include "qjm/error.hpp"
#include "qjm/io.hpp"
#include "qjm/joint.hpp"
#include "qjm/rng.hpp"
#include "qjm/simulate.hpp"
#include "run_config.hpp"

#ifndef QJM_VERSION
#define QJM_VERSION "0.0.0"
#endif

namespace qjm::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return fingerprint(s.str());
}

std::string tau_label(std::optional<double> tau) {
  return tau ? "tau-" + format_double(*tau) : std::string("mean");
}

std::optional<double> tau_from_dirname(const fs::path& file) {
  const std::string dir = file.parent_path().filename().string();
  if (dir.rfind("tau-", 0) != 0) return std::nullopt;
  try {
    return std::stod(dir.substr(4));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct FitOptions {
  std::string config;
  std::string mode;
  std::string tau;
  std::optional<std::uint64_t> seed;
  std::optional<long> chain_length;
  std::optional<long> burn_in;
  std::optional<long> thin;
  std::optional<int> grid_k;
  std::optional<unsigned> jobs;
  std::string longitudinal;
  std::string survival;
  std::string out;
  bool progress = false;
  bool store_random_effects = false;
};

RunConfig resolve_config(const FitOptions& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config_file(o.config);
  ModelSpec& spec = cfg.spec;
  if (!o.mode.empty()) spec.mode = parse_fit_mode(o.mode);
  if (!o.tau.empty()) spec.tau_levels = parse_tau_list(o.tau);
  if (o.seed) spec.mcmc.seed = *o.seed;
  if (o.chain_length) spec.mcmc.chain_length = *o.chain_length;
  if (o.burn_in) spec.mcmc.burn_in = *o.burn_in;
  if (o.thin) spec.mcmc.thin = *o.thin;
  if (o.grid_k) spec.grid_k = *o.grid_k;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.longitudinal.empty()) cfg.longitudinal = o.longitudinal;
  if (!o.survival.empty()) cfg.survival = o.survival;
  if (!o.out.empty()) cfg.out = o.out;
  if (o.progress) cfg.progress = true;
  if (o.store_random_effects) spec.mcmc.store_random_effects = true;

  if (spec.mode == FitMode::QuantileJoint && spec.tau_levels.empty())
    throw ConfigError("mode quantile-joint needs quantile levels (--tau)");
  if (spec.mode == FitMode::MeanJoint && !spec.tau_levels.empty())
    throw ConfigError("mode mean-joint takes no quantile levels; use quantile-joint");
  spec.validate();
  return cfg;
}

void write_manifest(std::ostream& out, const RunConfig& cfg, const DesignBundle& d,
                    const std::string& config_hash, const PosteriorSample* sample,
                    std::optional<std::size_t> chain_index) {
  const ModelSpec& spec = cfg.spec;
  out << "tool=qjm\n";
  out << "version=" << QJM_VERSION << '\n';
  out << "mode=" << to_string(spec.mode) << '\n';
  if (sample) {
    out << "tau=" << (sample->metadata.tau ? format_double(*sample->metadata.tau) : "none") << '\n';
    out << "chain_index=" << *chain_index << '\n';
    out << "chain_seed=" << sample->metadata.seed << '\n';
    out << "draws=" << sample->draws() << '\n';
  } else {
    out << "tau=";
    for (std::size_t k = 0; k < spec.tau_levels.size(); ++k)
      out << (k ? "," : "") << format_double(spec.tau_levels[k]);
    out << '\n';
  }
  out << "master_seed=" << spec.mcmc.seed << '\n';
  out << "config_hash=" << config_hash << '\n';
  out << "spec_hash=" << spec_fingerprint(spec) << '\n';
  out << "chain_length=" << spec.mcmc.chain_length << '\n';
  out << "burn_in=" << spec.mcmc.burn_in << '\n';
  out << "thin=" << spec.mcmc.thin << '\n';
  out << "longitudinal_input=" << cfg.longitudinal->generic_string() << '\n';
  out << "longitudinal_hash=" << file_hash(*cfg.longitudinal) << '\n';
  if (cfg.survival && is_joint(spec.mode)) {
    out << "survival_input=" << cfg.survival->generic_string() << '\n';
    out << "survival_hash=" << file_hash(*cfg.survival) << '\n';
  }
  out << "subjects=" << d.n() << '\n';
  out << "records=" << d.records() << '\n';
  if (is_joint(spec.mode)) {
    out << "hazard_cuts=";
    for (std::size_t k = 0; k < d.initial_grid.cuts.size(); ++k)
      out << (k ? "," : "") << format_double(d.initial_grid.cuts[k]);
    out << '\n';
  }
  out << "records_after_exit=" << d.records_after_exit << '\n';
  out << "post_exit_records=kept as given; measurements after the exit time enter the "
         "longitudinal likelihood unchanged\n";
}

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = resolve_config(o);
  const ModelSpec& spec = cfg.spec;
  if (!cfg.longitudinal)
    throw DataError("missing input: longitudinal CSV (--long or data.longitudinal)");
  if (is_joint(spec.mode) && !cfg.survival) {
    throw DataError(std::string("missing input: survival CSV (--surv or data.survival) is "
                                "required for mode ") + to_string(spec.mode));
  }
  const std::optional<fs::path> surv =
      is_joint(spec.mode) ? cfg.survival : std::optional<fs::path>{};
  const JointDataset data = read_dataset(*cfg.longitudinal, surv);
  const DesignBundle d = build_designs(data, spec);

  ChainOptions options;
  std::mutex err_mutex;
  if (cfg.progress) {
    options.progress = [&](const ProgressEvent& ev) {
      nlohmann::ordered_json j;
      j["event"] = "progress";
      if (ev.tau) j["tau"] = *ev.tau;
      j["iteration"] = ev.iteration;
      j["chain_length"] = ev.chain_length;
      nlohmann::ordered_json blocks = nlohmann::ordered_json::object();
      for (const auto& [name, secs] : ev.block_seconds) blocks[name] = secs;
      j["block_seconds"] = blocks;
      std::lock_guard lock(err_mutex);
      err << j.dump() << std::endl;
    };
  }

  std::vector<PosteriorSample> samples;
  if (!spec.tau_levels.empty()) {
    unsigned jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    samples = run_quantile_battery(d, spec, jobs, options);
  } else {
    RngStream rng(derive_seed(spec.mcmc.seed, 0));
    samples.push_back(run_chain(d, spec, std::nullopt, rng, options));
  }

  const std::string config_hash = fingerprint(effective_config(cfg).dump());
  fs::create_directories(cfg.out);
  {
    auto f = open_out(cfg.out / "config.json");
    f << effective_config(cfg).dump(2) << '\n';
  }
  {
    auto f = open_out(cfg.out / "manifest.txt");
    write_manifest(f, cfg, d, config_hash, nullptr, std::nullopt);
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const PosteriorSample& s = samples[k];
    const fs::path dir = cfg.out / tau_label(s.metadata.tau);
    fs::create_directories(dir);
    {
      auto f = open_out(dir / "samples.csv");
      write_posterior_csv(f, s);
    }
    {
      auto f = open_out(dir / "summary.txt");
      write_summary(f, summarize(s));
    }
    {
      auto f = open_out(dir / "manifest.txt");
      write_manifest(f, cfg, d, config_hash, &s, k);
    }
  }
  if (is_joint(spec.mode)) {
    auto f = open_out(cfg.out / "alpha_figure.csv");
    write_figure_csv(f, "alpha", emit_figure_data(samples, "alpha"));
  }
  out << "wrote " << samples.size() << " posterior sample(s) to " << cfg.out.generic_string()
      << '\n';
  return kExitOk;
}

struct SimulateOptions {
  std::string scenario = "default";
  std::uint64_t seed = 1;
  std::string out = "qjm-sim";
  std::optional<std::size_t> n;
  bool drop_after_exit = false;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  SimScenario sc = scenario_by_name(o.scenario);
  if (o.n) sc.n = *o.n;
  if (o.drop_after_exit) sc.drop_after_exit = true;
  RngStream rng(o.seed);
  const SimulatedData sim = simulate(sc, rng);
  for (const auto& w : sim.warnings) err << "warning: " << w << '\n';

  const fs::path dir(o.out);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "longitudinal.csv");
    write_longitudinal_csv(f, sim.data);
  }
  {
    auto f = open_out(dir / "survival.csv");
    write_survival_csv(f, sim.data);
  }
  {
    auto f = open_out(dir / "truth.json");
    write_truth_json(f, sim.truth);
  }
  {
    auto f = open_out(dir / "manifest.txt");
    f << "tool=qjm\nversion=" << QJM_VERSION << "\nscenario=" << o.scenario
      << "\nseed=" << o.seed << "\nsubjects=" << sc.n
      << "\nrecords=" << sim.data.longitudinal.size()
      << "\ndrop_after_exit=" << (sc.drop_after_exit ? 1 : 0) << '\n';
  }
  std::size_t events = 0;
  for (const auto& s : sim.data.survival) events += s.event ? 1 : 0;
  out << "simulated " << sc.n << " subjects (" << events << " events) into "
      << dir.generic_string() << '\n';
  return kExitOk;
}

struct SummarizeOptions {
  std::vector<std::string> files;
  std::string out;
  std::string parameter = "alpha";
  std::string figure;
};

int cmd_summarize(const SummarizeOptions& o, std::ostream& out) {
  std::vector<PosteriorSample> samples;
  for (const auto& path : o.files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open posterior CSV " + path);
    PosteriorSample s = read_posterior_csv(in);
    s.metadata.tau = tau_from_dirname(path);
    samples.push_back(std::move(s));
  }
  std::ofstream file;
  std::ostream* sink = &out;
  if (!o.out.empty()) {
    file = open_out(o.out);
    sink = &file;
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples.size() > 1) *sink << "# " << o.files[k] << '\n';
    write_summary(*sink, summarize(samples[k]));
  }
  if (!o.figure.empty()) {
    auto f = open_out(o.figure);
    try {
      write_figure_csv(f, o.parameter, emit_figure_data(samples, o.parameter));
    } catch (const std::out_of_range&) {
      throw ConfigError("parameter '" + o.parameter + "' is not in every sample");
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian quantile joint models for longitudinal and time-to-event data", "qjm"};
  app.set_version_flag("--version", QJM_VERSION);
  app.require_subcommand(1);

  FitOptions fo;
  auto* fit = app.add_subcommand("fit", "Run MCMC for one or more quantile levels");
  fit->add_option("-c,--config", fo.config, "JSON run configuration")->check(CLI::ExistingFile);
  fit->add_option("--mode", fo.mode, "long-quantile | mean-joint | quantile-joint");
  fit->add_option("--tau", fo.tau, "Quantile levels: 0.1,0.5,0.9 or 0.1..0.9[:step]");
  fit->add_option("--seed", fo.seed, "Master seed");
  fit->add_option("--chain-length", fo.chain_length, "Iterations per chain");
  fit->add_option("--burn-in", fo.burn_in, "Discarded leading iterations");
  fit->add_option("--thin", fo.thin, "Keep every thin-th iteration after burn-in");
  fit->add_option("--grid-k", fo.grid_k, "Number of baseline hazard pieces");
  fit->add_option("--jobs", fo.jobs, "Parallel chains (default: available cores)");
  fit->add_option("--long", fo.longitudinal, "Longitudinal CSV");
  fit->add_option("--surv", fo.survival, "Survival CSV");
  fit->add_option("-o,--out", fo.out, "Output directory");
  fit->add_flag("--progress", fo.progress, "JSON progress lines on stderr");
  fit->add_flag("--store-random-effects", fo.store_random_effects, "Keep gamma draws");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Write a synthetic joint data set");
  sim->add_option("--scenario", so.scenario, "default | sign-pattern")->capture_default_str();
  sim->add_option("--seed", so.seed, "Seed")->capture_default_str();
  sim->add_option("-o,--out", so.out, "Output directory")->capture_default_str();
  sim->add_option("--n", so.n, "Number of subjects");
  sim->add_flag("--drop-after-exit", so.drop_after_exit, "Drop visits after the exit time");

  SummarizeOptions mo;
  auto* summ = app.add_subcommand("summarize", "Summaries and figure data from posterior CSVs");
  summ->add_option("samples", mo.files, "Posterior CSV files")->required()->check(CLI::ExistingFile);
  summ->add_option("-o,--out", mo.out, "Summary file (default: stdout)");
  summ->add_option("--parameter", mo.parameter, "Parameter for figure data")->capture_default_str();
  summ->add_option("--figure", mo.figure, "Write long-format figure data here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(fo, out, err);
    if (*sim) return cmd_simulate(so, out, err);
    return cmd_summarize(mo, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SamplerError& e) {
    err << "sampler error: " << e.what() << '\n';
    return kExitSampler;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSampler;
  }
}

}  // namespace qjm::cli
