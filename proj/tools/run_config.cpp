#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qjm/error.hpp"

namespace qjm::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
void maybe(const json& obj, const char* key, const std::string& where, T& dst) {
  if (obj.contains(key)) dst = get<T>(obj, key, where);
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(what + " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw ConfigError(what + " entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto out = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

void shape_rate(const json& obj, const char* key, double& shape, double& rate) {
  if (!obj.contains(key)) return;
  const std::string where = std::string("priors.") + key;
  const json& v = obj.at(key);
  reject_unknown(v, where, {"shape", "rate"});
  maybe(v, "shape", where, shape);
  maybe(v, "rate", where, rate);
}

void mean_variance(const json& obj, const char* key, double& mean, double& variance) {
  if (!obj.contains(key)) return;
  const std::string where = std::string("priors.") + key;
  const json& v = obj.at(key);
  reject_unknown(v, where, {"mean", "variance"});
  maybe(v, "mean", where, mean);
  maybe(v, "variance", where, variance);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::vector<double> parse_tau_list(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad quantile level '" + s + "' in '" + text + "'");
    }
    if (used != s.size()) throw ConfigError("bad quantile level '" + s + "' in '" + text + "'");
    return v;
  };
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const double lo = number(text.substr(0, dots));
    std::string rest = text.substr(dots + 2);
    double step = 0.1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = number(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const double hi = number(rest);
    if (!(step > 0.0) || hi < lo) throw ConfigError("bad quantile range '" + text + "'");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) {
      // round away the accumulated binary error: 0.1 + 2 * 0.1 -> 0.3
      out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e10) / 1e10);
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(number(item));
    }
  }
  if (out.empty()) throw ConfigError("empty quantile list '" + text + "'");
  for (double t : out) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("quantile level outside (0, 1) in '" + text + "'");
  }
  return out;
}

void apply_config_json(const json& doc, const std::filesystem::path& base, RunConfig& cfg) {
  reject_unknown(doc, "config", {"mode", "tau", "data", "out", "jobs", "progress", "model",
                                 "priors", "mcmc"});
  ModelSpec& spec = cfg.spec;
  if (doc.contains("mode")) spec.mode = parse_fit_mode(get<std::string>(doc, "mode", "config"));
  if (doc.contains("tau")) {
    const json& t = doc.at("tau");
    if (t.is_string()) {
      spec.tau_levels = parse_tau_list(t.get<std::string>());
    } else if (t.is_number()) {
      spec.tau_levels = {t.get<double>()};
    } else if (t.is_array()) {
      spec.tau_levels = get<std::vector<double>>(doc, "tau", "config");
    } else if (t.is_null()) {
      spec.tau_levels.clear();
    } else {
      throw ConfigError("tau must be a number, a list or a range string");
    }
  }
  if (doc.contains("data")) {
    const json& data = doc.at("data");
    reject_unknown(data, "data", {"longitudinal", "survival"});
    if (data.contains("longitudinal"))
      cfg.longitudinal = resolve(base, get<std::string>(data, "longitudinal", "data"));
    if (data.contains("survival"))
      cfg.survival = resolve(base, get<std::string>(data, "survival", "data"));
  }
  if (doc.contains("out")) cfg.out = resolve(base, get<std::string>(doc, "out", "config"));
  maybe(doc, "jobs", "config", cfg.jobs);
  maybe(doc, "progress", "config", cfg.progress);

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    reject_unknown(m, "model", {"intercept", "time", "longitudinal_covariates",
                                "survival_covariates", "shared_intercept", "shared_slope",
                                "grid_k"});
    maybe(m, "intercept", "model", spec.l_intercept);
    maybe(m, "time", "model", spec.l_time);
    maybe(m, "longitudinal_covariates", "model", spec.l_covariates);
    maybe(m, "survival_covariates", "model", spec.s_covariates);
    maybe(m, "shared_intercept", "model", spec.shared.intercept);
    maybe(m, "shared_slope", "model", spec.shared.slope);
    maybe(m, "grid_k", "model", spec.grid_k);
  }

  if (doc.contains("priors")) {
    const json& p = doc.at("priors");
    reject_unknown(p, "priors", {"beta_mean", "beta_cov", "beta_variance", "sigma2", "lambda",
                                 "alpha", "beta_s", "re_cov"});
    PriorSpec& pr = spec.priors;
    if (p.contains("beta_mean")) {
      const auto v = get<std::vector<double>>(p, "beta_mean", "priors");
      pr.beta_mean = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (p.contains("beta_cov")) pr.beta_cov = matrix_of(p.at("beta_cov"), "priors.beta_cov");
    maybe(p, "beta_variance", "priors", pr.beta_variance);
    shape_rate(p, "sigma2", pr.sigma2_shape, pr.sigma2_rate);
    shape_rate(p, "lambda", pr.lambda_shape, pr.lambda_rate);
    mean_variance(p, "alpha", pr.alpha_mean, pr.alpha_variance);
    mean_variance(p, "beta_s", pr.beta_s_mean, pr.beta_s_variance);
    if (p.contains("re_cov")) {
      const json& r = p.at("re_cov");
      reject_unknown(r, "priors.re_cov", {"dof", "scale"});
      maybe(r, "dof", "priors.re_cov", pr.re_dof);
      if (r.contains("scale")) pr.re_scale = matrix_of(r.at("scale"), "priors.re_cov.scale");
    }
  }

  if (doc.contains("mcmc")) {
    const json& m = doc.at("mcmc");
    reject_unknown(m, "mcmc", {"chain_length", "burn_in", "thin", "seed", "store_random_effects"});
    maybe(m, "chain_length", "mcmc", spec.mcmc.chain_length);
    maybe(m, "burn_in", "mcmc", spec.mcmc.burn_in);
    maybe(m, "thin", "mcmc", spec.mcmc.thin);
    maybe(m, "seed", "mcmc", spec.mcmc.seed);
    maybe(m, "store_random_effects", "mcmc", spec.mcmc.store_random_effects);
  }
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  apply_config_json(doc, path.parent_path(), cfg);
  return cfg;
}

nlohmann::ordered_json effective_config(const RunConfig& cfg) {
  const ModelSpec& s = cfg.spec;
  const PriorSpec& p = s.priors;
  nlohmann::ordered_json j;
  j["mode"] = to_string(s.mode);
  j["tau"] = s.tau_levels;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  if (cfg.longitudinal) data["longitudinal"] = cfg.longitudinal->generic_string();
  if (cfg.survival) data["survival"] = cfg.survival->generic_string();
  j["data"] = data;
  j["model"] = {{"intercept", s.l_intercept},
                {"time", s.l_time},
                {"longitudinal_covariates", s.l_covariates},
                {"survival_covariates", s.s_covariates},
                {"shared_intercept", s.shared.intercept},
                {"shared_slope", s.shared.slope},
                {"grid_k", s.grid_k}};
  nlohmann::ordered_json pr;
  if (p.beta_mean.size() > 0)
    pr["beta_mean"] = std::vector<double>(p.beta_mean.data(), p.beta_mean.data() + p.beta_mean.size());
  if (p.beta_cov.size() > 0) pr["beta_cov"] = matrix_json(p.beta_cov);
  pr["beta_variance"] = p.beta_variance;
  pr["sigma2"] = {{"shape", p.sigma2_shape}, {"rate", p.sigma2_rate}};
  pr["lambda"] = {{"shape", p.lambda_shape}, {"rate", p.lambda_rate}};
  pr["alpha"] = {{"mean", p.alpha_mean}, {"variance", p.alpha_variance}};
  pr["beta_s"] = {{"mean", p.beta_s_mean}, {"variance", p.beta_s_variance}};
  pr["re_cov"] = {{"dof", p.re_dof}};
  if (p.re_scale.size() > 0) pr["re_cov"]["scale"] = matrix_json(p.re_scale);
  j["priors"] = pr;
  j["mcmc"] = {{"chain_length", s.mcmc.chain_length},
               {"burn_in", s.mcmc.burn_in},
               {"thin", s.mcmc.thin},
               {"seed", s.mcmc.seed},
               {"store_random_effects", s.mcmc.store_random_effects}};
  return j;
}

}  // namespace qjm::cli
