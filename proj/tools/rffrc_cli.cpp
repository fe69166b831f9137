/// Command line driver for the rffrc library.
///
/// Subcommands: generate, train, forecast, sweep, gridsearch,
/// reproduce, denoise-eval.  Every run resolves its configuration from
/// three layers (command line flags > --config JSON file > built-in
/// defaults), persists the resolved configuration next to its outputs,
/// and writes all artifacts atomically.  Exit codes: 0 success,
/// 2 configuration error, 3 numeric failure, 4 I/O failure.
#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "rffrc/errors.hpp"
#include "rffrc/forecaster.hpp"
#include "rffrc/grid_search.hpp"
#include "rffrc/metrics.hpp"
#include "rffrc/recipes.hpp"
#include "rffrc/systems.hpp"
#include "rffrc/time_series.hpp"
#include "rffrc/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// ------------------------------------------------------------------ config

/// Flat experiment configuration shared by all subcommands.  JSON key
/// names match the struct fields; unknown keys in a config file are
/// rejected.  `defaulted` lists the keys that fell back to built-in
/// defaults (neither flag nor config file set them).
struct ExperimentConfig {
  std::string system = "lorenz63";
  int n_samples = 4000;
  double dt = 0.025;        // sampling interval (system-dependent default)
  int transient_steps = 1000;
  double lorenz_sigma = 10.0;
  double lorenz_rho = 28.0;
  double lorenz_beta = 8.0 / 3.0;
  double tau = 17.0;
  double mg_a = 0.2;
  double mg_b = 0.1;
  double mg_p = 10.0;
  int substeps = 10;
  double history_value = 1.2;
  int grid_points = 128;
  double domain_multiple = 32.0;
  std::string input_csv;
  std::string target_csv;
  double train_frac = 0.6;
  double val_frac = 0.2;
  bool swap_validation_test = false;
  int k = 5;
  int m = 3000;
  double lambda_reg = 1e-6;
  double sigma_rff = 2.0;
  std::string scaling = "minmax01";
  std::uint64_t seed = 1;
  std::optional<double> noise_snr_db;
  std::uint64_t noise_seed = 7;
  bool clean_targets = false;
  std::vector<int> observed;
  std::vector<int> target;
  int horizon = -1;  // -1: all rows after the warm-up window
  double theta = 0.4;
  std::string forecast_mode = "rollout";
  std::string segment = "test";
  std::string model_path;
  std::string out_dir;
  std::string axis = "m";
  std::vector<double> axis_values;
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3, 4, 5};
  std::vector<int> k_grid = {3, 5};
  std::vector<int> m_grid = {1000, 3000};
  std::vector<double> lambda_grid;
  std::vector<double> sigma_grid;
  std::string seed_mode = "shared";

  std::vector<std::string> defaulted;
};

const std::set<std::string>& schema_keys() {
  static const std::set<std::string> kKeys = {
      "system",         "n_samples",      "dt",
      "transient_steps", "lorenz_sigma",  "lorenz_rho",
      "lorenz_beta",    "tau",            "mg_a",
      "mg_b",           "mg_p",           "substeps",
      "history_value",  "grid_points",    "domain_multiple",
      "input_csv",      "target_csv",     "train_frac",
      "val_frac",       "swap_validation_test", "k",
      "m",              "lambda_reg",     "sigma_rff",
      "scaling",        "seed",           "noise_snr_db",
      "noise_seed",     "clean_targets",  "observed",
      "target",         "horizon",        "theta",
      "forecast_mode",  "segment",        "model_path",
      "out_dir",        "axis",           "axis_values",
      "sweep_seeds",    "k_grid",         "m_grid",
      "lambda_grid",    "sigma_grid",     "seed_mode"};
  return kKeys;
}

/// Load and validate a --config file.  Accepts either a flat
/// configuration object or a previously written config_resolved.json
/// ({"config": {...}, "defaulted": {...}}), so resolved configurations
/// round-trip unchanged.
json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw rffrc::io_error("cannot read config file: " + path);
  json parsed;
  try {
    parsed = json::parse(stream);
  } catch (const json::parse_error& e) {
    throw rffrc::config_error("config file " + path + ": " +
                              std::string(e.what()));
  }
  if (!parsed.is_object()) {
    throw rffrc::config_error("config file " + path +
                              ": top level must be a JSON object");
  }
  if (parsed.contains("config") && parsed.at("config").is_object()) {
    for (const auto& [key, value] : parsed.items()) {
      if (key != "config" && key != "defaulted") {
        throw rffrc::config_error("config file " + path +
                                  ": unknown wrapper key '" + key + "'");
      }
    }
    parsed = parsed.at("config");
  }
  for (const auto& [key, value] : parsed.items()) {
    if (schema_keys().count(key) == 0) {
      throw rffrc::config_error("config file " + path +
                                ": unknown config key '" + key + "'");
    }
  }
  return parsed;
}

/// Three-layer resolution for one key: flag beats config file beats
/// built-in default; untouched keys are recorded as defaulted.
class Resolver {
 public:
  Resolver(json file_config, ExperimentConfig& config)
      : file_(std::move(file_config)), config_(config) {}

  template <typename T>
  void take(const std::string& key, const CLI::Option* opt,
            const T& flag_value, T& field) {
    if (opt != nullptr && opt->count() > 0) {
      field = flag_value;
      return;
    }
    if (file_.contains(key) && !file_.at(key).is_null()) {
      try {
        field = file_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw rffrc::config_error("config key '" + key +
                                  "': " + std::string(e.what()));
      }
      return;
    }
    config_.defaulted.push_back(key);
  }

  void take_optional(const std::string& key, const CLI::Option* opt,
                     double flag_value, std::optional<double>& field) {
    if (opt != nullptr && opt->count() > 0) {
      field = flag_value;
      return;
    }
    if (file_.contains(key) && !file_.at(key).is_null()) {
      try {
        field = file_.at(key).get<double>();
      } catch (const json::exception& e) {
        throw rffrc::config_error("config key '" + key +
                                  "': " + std::string(e.what()));
      }
      return;
    }
    config_.defaulted.push_back(key);
  }

 private:
  json file_;
  ExperimentConfig& config_;
};

/// Serialize the fully resolved configuration.  Every schema key is
/// present, so the object can be fed back via --config verbatim.
json config_to_json(const ExperimentConfig& c) {
  json out;
  out["system"] = c.system;
  out["n_samples"] = c.n_samples;
  out["dt"] = c.dt;
  out["transient_steps"] = c.transient_steps;
  out["lorenz_sigma"] = c.lorenz_sigma;
  out["lorenz_rho"] = c.lorenz_rho;
  out["lorenz_beta"] = c.lorenz_beta;
  out["tau"] = c.tau;
  out["mg_a"] = c.mg_a;
  out["mg_b"] = c.mg_b;
  out["mg_p"] = c.mg_p;
  out["substeps"] = c.substeps;
  out["history_value"] = c.history_value;
  out["grid_points"] = c.grid_points;
  out["domain_multiple"] = c.domain_multiple;
  out["input_csv"] = c.input_csv;
  out["target_csv"] = c.target_csv;
  out["train_frac"] = c.train_frac;
  out["val_frac"] = c.val_frac;
  out["swap_validation_test"] = c.swap_validation_test;
  out["k"] = c.k;
  out["m"] = c.m;
  out["lambda_reg"] = c.lambda_reg;
  out["sigma_rff"] = c.sigma_rff;
  out["scaling"] = c.scaling;
  out["seed"] = c.seed;
  if (c.noise_snr_db) {
    out["noise_snr_db"] = *c.noise_snr_db;
  } else {
    out["noise_snr_db"] = nullptr;
  }
  out["noise_seed"] = c.noise_seed;
  out["clean_targets"] = c.clean_targets;
  out["observed"] = c.observed;
  out["target"] = c.target;
  out["horizon"] = c.horizon;
  out["theta"] = c.theta;
  out["forecast_mode"] = c.forecast_mode;
  out["segment"] = c.segment;
  out["model_path"] = c.model_path;
  out["out_dir"] = c.out_dir;
  out["axis"] = c.axis;
  out["axis_values"] = c.axis_values;
  out["sweep_seeds"] = c.sweep_seeds;
  out["k_grid"] = c.k_grid;
  out["m_grid"] = c.m_grid;
  out["lambda_grid"] = c.lambda_grid;
  out["sigma_grid"] = c.sigma_grid;
  out["seed_mode"] = c.seed_mode;
  return out;
}

void write_json_file(const fs::path& path, const json& value) {
  rffrc::write_text_file(path, value.dump(2) + "\n");
}

void write_resolved_config(const ExperimentConfig& config) {
  json defaulted = json::object();
  for (const auto& key : config.defaulted) defaulted[key] = true;
  json out;
  out["config"] = config_to_json(config);
  out["defaulted"] = defaulted;
  write_json_file(fs::path(config.out_dir) / "config_resolved.json", out);
}

// ----------------------------------------------------------- CLI plumbing

/// Storage + registered option pointers for every flag.  Each
/// subcommand registers only the flags that make sense for it; option
/// pointers stay null for the rest, and the Resolver then falls back
/// to the config file / defaults.
struct Flags {
  std::string system, scaling, input_csv, target_csv, forecast_mode, segment;
  std::string model_path, out_dir, config_path, axis, seed_mode;
  int n_samples = 0, transient_steps = 0, substeps = 0, grid_points = 0;
  int k = 0, m = 0, horizon = 0;
  double dt = 0, tau = 0, domain_multiple = 0, train_frac = 0, val_frac = 0;
  double lambda_reg = 0, sigma_rff = 0, noise_snr_db = 0, theta = 0;
  std::uint64_t seed = 0, noise_seed = 0;
  bool swap_split = false, clean_targets = false, quiet = false;
  bool full_scale = false;
  std::vector<int> observed, target, k_grid, m_grid;
  std::vector<double> axis_values, lambda_grid, sigma_grid;
  std::vector<std::uint64_t> sweep_seeds;

  CLI::Option* o_system = nullptr;
  CLI::Option* o_n_samples = nullptr;
  CLI::Option* o_dt = nullptr;
  CLI::Option* o_transient = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_substeps = nullptr;
  CLI::Option* o_grid_points = nullptr;
  CLI::Option* o_domain_multiple = nullptr;
  CLI::Option* o_input_csv = nullptr;
  CLI::Option* o_target_csv = nullptr;
  CLI::Option* o_train_frac = nullptr;
  CLI::Option* o_val_frac = nullptr;
  CLI::Option* o_swap_split = nullptr;
  CLI::Option* o_k = nullptr;
  CLI::Option* o_m = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_scaling = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_noise_snr_db = nullptr;
  CLI::Option* o_noise_seed = nullptr;
  CLI::Option* o_clean_targets = nullptr;
  CLI::Option* o_observed = nullptr;
  CLI::Option* o_target = nullptr;
  CLI::Option* o_horizon = nullptr;
  CLI::Option* o_theta = nullptr;
  CLI::Option* o_mode = nullptr;
  CLI::Option* o_segment = nullptr;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_axis = nullptr;
  CLI::Option* o_axis_values = nullptr;
  CLI::Option* o_sweep_seeds = nullptr;
  CLI::Option* o_k_grid = nullptr;
  CLI::Option* o_m_grid = nullptr;
  CLI::Option* o_lambda_grid = nullptr;
  CLI::Option* o_sigma_grid = nullptr;
  CLI::Option* o_seed_mode = nullptr;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path,
                  "JSON config file (flags override file values)");
  f.o_seed = cmd->add_option("--seed", f.seed, "random feature seed");
  f.o_out = cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_flag("--quiet", f.quiet, "suppress informational output");
}

void add_data_flags(CLI::App* cmd, Flags& f) {
  f.o_system = cmd->add_option(
      "--system", f.system, "lorenz63 | mackey_glass | ks | external_csv");
  f.o_n_samples = cmd->add_option("--steps,--samples", f.n_samples,
                                  "number of samples to generate");
  f.o_dt = cmd->add_option("--dt", f.dt, "sampling interval");
  f.o_transient =
      cmd->add_option("--transient-steps", f.transient_steps,
                      "integrator steps discarded before sampling");
  f.o_tau = cmd->add_option("--tau", f.tau, "Mackey-Glass delay");
  f.o_substeps = cmd->add_option("--substeps", f.substeps,
                                 "Mackey-Glass integrator substeps");
  f.o_grid_points =
      cmd->add_option("--grid", f.grid_points, "KS spatial grid points");
  f.o_domain_multiple = cmd->add_option(
      "--domain-multiple", f.domain_multiple, "KS domain length over pi");
  f.o_input_csv = cmd->add_option("--input-csv", f.input_csv,
                                  "input series for --system external_csv");
  f.o_target_csv = cmd->add_option(
      "--target-csv", f.target_csv,
      "optional target series (e.g. clean signal) of identical shape");
  f.o_noise_snr_db = cmd->add_option(
      "--noise-snr-db", f.noise_snr_db,
      "add white Gaussian noise to the inputs at this SNR");
  f.o_noise_seed =
      cmd->add_option("--noise-seed", f.noise_seed, "noise RNG seed");
}

void add_split_flags(CLI::App* cmd, Flags& f) {
  f.o_train_frac =
      cmd->add_option("--train-frac", f.train_frac, "training fraction");
  f.o_val_frac =
      cmd->add_option("--val-frac", f.val_frac, "validation fraction");
  f.o_swap_split = cmd->add_flag("--swap-split", f.swap_split,
                                 "swap the validation and test segments");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  f.o_k = cmd->add_option("--k", f.k, "delay embedding length");
  f.o_m = cmd->add_option("--m", f.m, "number of random features");
  f.o_lambda = cmd->add_option("--lambda,--lambda-reg", f.lambda_reg,
                               "ridge regularization strength");
  f.o_sigma = cmd->add_option("--sigma,--sigma-rff", f.sigma_rff,
                              "random feature kernel width");
  f.o_scaling =
      cmd->add_option("--scaling", f.scaling, "minmax01 | zscore | none");
  f.o_observed = cmd->add_option("--observed", f.observed,
                                 "observed channel indices (default all)")
                     ->delimiter(',');
  f.o_target = cmd->add_option("--target", f.target,
                               "target channel indices (default all)")
                   ->delimiter(',');
  f.o_clean_targets = cmd->add_flag(
      "--clean-targets", f.clean_targets,
      "train against the clean series when noise is configured");
}

/// Resolve the configuration for one subcommand.  `command` selects
/// the per-command defaults (output directory, scoring segment, ...).
ExperimentConfig resolve_config(const std::string& command, const Flags& f) {
  ExperimentConfig c;
  const json file = load_config_file(f.config_path);
  Resolver r(file, c);

  r.take("system", f.o_system, f.system, c.system);
  const std::set<std::string> known_systems = {"lorenz63", "mackey_glass",
                                               "ks", "external_csv"};
  if (known_systems.count(c.system) == 0) {
    throw rffrc::config_error(
        "unknown system '" + c.system +
        "' (valid: lorenz63, mackey_glass, ks, external_csv)");
  }

  // System-dependent defaults for the sampling interval and transient.
  if (c.system == "mackey_glass") {
    c.dt = 1.0;
    c.transient_steps = 0;
  } else if (c.system == "ks") {
    c.dt = 0.25;
    c.transient_steps = 400;
  }

  r.take("n_samples", f.o_n_samples, f.n_samples, c.n_samples);
  r.take("dt", f.o_dt, f.dt, c.dt);
  r.take("transient_steps", f.o_transient, f.transient_steps,
         c.transient_steps);
  r.take("lorenz_sigma", nullptr, 0.0, c.lorenz_sigma);
  r.take("lorenz_rho", nullptr, 0.0, c.lorenz_rho);
  r.take("lorenz_beta", nullptr, 0.0, c.lorenz_beta);
  r.take("tau", f.o_tau, f.tau, c.tau);
  r.take("mg_a", nullptr, 0.0, c.mg_a);
  r.take("mg_b", nullptr, 0.0, c.mg_b);
  r.take("mg_p", nullptr, 0.0, c.mg_p);
  r.take("substeps", f.o_substeps, f.substeps, c.substeps);
  r.take("history_value", nullptr, 0.0, c.history_value);
  r.take("grid_points", f.o_grid_points, f.grid_points, c.grid_points);
  r.take("domain_multiple", f.o_domain_multiple, f.domain_multiple,
         c.domain_multiple);
  r.take("input_csv", f.o_input_csv, f.input_csv, c.input_csv);
  r.take("target_csv", f.o_target_csv, f.target_csv, c.target_csv);
  r.take("train_frac", f.o_train_frac, f.train_frac, c.train_frac);
  r.take("val_frac", f.o_val_frac, f.val_frac, c.val_frac);
  r.take("swap_validation_test", f.o_swap_split, f.swap_split,
         c.swap_validation_test);
  r.take("k", f.o_k, f.k, c.k);
  r.take("m", f.o_m, f.m, c.m);
  r.take("lambda_reg", f.o_lambda, f.lambda_reg, c.lambda_reg);
  r.take("sigma_rff", f.o_sigma, f.sigma_rff, c.sigma_rff);
  r.take("scaling", f.o_scaling, f.scaling, c.scaling);
  r.take("seed", f.o_seed, f.seed, c.seed);
  if (command == "denoise-eval") c.noise_snr_db = 20.0;
  r.take_optional("noise_snr_db", f.o_noise_snr_db, f.noise_snr_db,
                  c.noise_snr_db);
  r.take("noise_seed", f.o_noise_seed, f.noise_seed, c.noise_seed);
  if (command == "denoise-eval") c.clean_targets = true;
  r.take("clean_targets", f.o_clean_targets, f.clean_targets,
         c.clean_targets);
  r.take("observed", f.o_observed, f.observed, c.observed);
  r.take("target", f.o_target, f.target, c.target);
  r.take("horizon", f.o_horizon, f.horizon, c.horizon);
  r.take("theta", f.o_theta, f.theta, c.theta);
  r.take("forecast_mode", f.o_mode, f.forecast_mode, c.forecast_mode);
  if (command == "sweep" || command == "gridsearch") c.segment = "validation";
  r.take("segment", f.o_segment, f.segment, c.segment);
  r.take("model_path", f.o_model, f.model_path, c.model_path);
  r.take("out_dir", f.o_out, f.out_dir, c.out_dir);
  r.take("axis", f.o_axis, f.axis, c.axis);
  if (c.axis == "m") {
    c.axis_values = {200, 500, 1000, 2000, 3000, 4000};
  } else if (c.axis == "k") {
    c.axis_values = {1, 2, 3, 4, 5, 6, 7, 8};
  } else if (c.axis == "sigma") {
    c.axis_values = {0.5, 1, 2, 4, 8};
  } else if (c.axis == "lambda") {
    c.axis_values = {1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
  } else {
    throw rffrc::config_error("unknown sweep axis '" + c.axis +
                              "' (valid: m, k, sigma, lambda)");
  }
  r.take("axis_values", f.o_axis_values, f.axis_values, c.axis_values);
  r.take("sweep_seeds", f.o_sweep_seeds, f.sweep_seeds, c.sweep_seeds);
  r.take("k_grid", f.o_k_grid, f.k_grid, c.k_grid);
  r.take("m_grid", f.o_m_grid, f.m_grid, c.m_grid);
  c.lambda_grid = {c.lambda_reg};
  r.take("lambda_grid", f.o_lambda_grid, f.lambda_grid, c.lambda_grid);
  c.sigma_grid = {c.sigma_rff};
  r.take("sigma_grid", f.o_sigma_grid, f.sigma_grid, c.sigma_grid);
  r.take("seed_mode", f.o_seed_mode, f.seed_mode, c.seed_mode);

  if (c.out_dir.empty()) c.out_dir = "out_" + command;
  if (c.n_samples < 1) throw rffrc::config_error("n_samples must be >= 1");
  if (c.horizon < -1) throw rffrc::config_error("horizon must be >= -1");
  rffrc::scaling_mode_from_string(c.scaling);  // validates the name
  const std::set<std::string> modes = {"onestep", "rollout", "teacher"};
  if (modes.count(c.forecast_mode) == 0) {
    throw rffrc::config_error("unknown forecast_mode '" + c.forecast_mode +
                              "' (valid: onestep, rollout, teacher)");
  }
  const std::set<std::string> segments = {"train", "validation", "test"};
  if (segments.count(c.segment) == 0) {
    throw rffrc::config_error("unknown segment '" + c.segment +
                              "' (valid: train, validation, test)");
  }
  if (c.seed_mode != "shared" && c.seed_mode != "per_candidate") {
    throw rffrc::config_error("unknown seed_mode '" + c.seed_mode +
                              "' (valid: shared, per_candidate)");
  }
  return c;
}

// ------------------------------------------------------------------- data

/// Input (possibly noisy) and optional target series for a run.
struct Dataset {
  rffrc::TimeSeries inputs;
  std::optional<rffrc::TimeSeries> targets;
};

rffrc::TimeSeries generate_series(const ExperimentConfig& c) {
  if (c.system == "lorenz63") {
    rffrc::Lorenz63Params params;
    params.sigma = c.lorenz_sigma;
    params.rho = c.lorenz_rho;
    params.beta = c.lorenz_beta;
    params.dt = c.dt;
    params.transient_steps = c.transient_steps;
    return rffrc::generate_lorenz63(c.n_samples, params);
  }
  if (c.system == "mackey_glass") {
    rffrc::MackeyGlassParams params;
    params.tau = c.tau;
    params.a = c.mg_a;
    params.b = c.mg_b;
    params.p = static_cast<int>(c.mg_p);
    params.sample_dt = c.dt;
    params.substeps = c.substeps;
    params.history = c.history_value;
    return rffrc::generate_mackey_glass(c.n_samples, params);
  }
  if (c.system == "ks") {
    rffrc::KsParams params;
    params.grid_points = c.grid_points;
    params.domain = c.domain_multiple * std::numbers::pi;
    params.dt = c.dt;
    params.transient_steps = c.transient_steps;
    return rffrc::generate_ks(c.n_samples, params);
  }
  throw rffrc::config_error("cannot generate system '" + c.system + "'");
}

Dataset load_dataset(const ExperimentConfig& c) {
  Dataset data;
  if (c.system == "external_csv") {
    if (c.input_csv.empty()) {
      throw rffrc::config_error("system external_csv requires input_csv");
    }
    data.inputs = rffrc::read_csv(c.input_csv);
    if (!c.target_csv.empty()) {
      data.targets = rffrc::read_csv(c.target_csv);
    }
  } else {
    data.inputs = generate_series(c);
  }
  if (c.noise_snr_db) {
    const rffrc::TimeSeries clean = data.inputs;
    data.inputs = rffrc::add_awgn(clean, *c.noise_snr_db, c.noise_seed);
    if (!data.targets) data.targets = clean;
  }
  if (data.targets) {
    if (data.targets->values.rows() != data.inputs.values.rows() ||
        data.targets->values.cols() != data.inputs.values.cols()) {
      throw rffrc::config_error(
          "target series shape does not match the input series");
    }
  }
  return data;
}

rffrc::ForecasterConfig forecaster_config(const ExperimentConfig& c) {
  rffrc::ForecasterConfig fc;
  fc.k = c.k;
  fc.n_features = c.m;
  fc.lambda = c.lambda_reg;
  fc.sigma = c.sigma_rff;
  fc.observed = c.observed;
  fc.target = c.target;
  fc.scaling = rffrc::scaling_mode_from_string(c.scaling);
  fc.seed = c.seed;
  return fc;
}

struct SegmentView {
  Eigen::MatrixXd inputs;   // observed (possibly noisy) series segment
  Eigen::MatrixXd truth;    // target series segment (clean when distinct)
  Eigen::Index offset = 0;  // row index of the segment in the full series
};

SegmentView select_segment(const Dataset& data, const ExperimentConfig& c) {
  const rffrc::ChronologicalSplit in_split = rffrc::chronological_split(
      data.inputs.values, c.train_frac, c.val_frac, c.swap_validation_test);
  SegmentView view;
  if (c.segment == "train") {
    view.inputs = in_split.train;
    view.offset = in_split.train_offset;
  } else if (c.segment == "validation") {
    view.inputs = in_split.validation;
    view.offset = in_split.validation_offset;
  } else {
    view.inputs = in_split.test;
    view.offset = in_split.test_offset;
  }
  const Eigen::MatrixXd& truth_source =
      data.targets ? data.targets->values : data.inputs.values;
  view.truth = truth_source.middleRows(view.offset, view.inputs.rows());
  return view;
}

std::vector<std::string> names_for(const std::vector<std::string>& all,
                                   const std::vector<int>& channels) {
  std::vector<std::string> out;
  out.reserve(channels.size());
  for (int ch : channels) out.push_back(all.at(static_cast<std::size_t>(ch)));
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

/// Append a number in shortest round-trip form (matches the CSV style
/// of the core library).
void append_num(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

// --------------------------------------------------------------- commands

int cmd_generate(const Flags& f) {
  const auto t0 = Clock::now();
  ExperimentConfig c = resolve_config("generate", f);
  if (c.system == "external_csv") {
    throw rffrc::config_error("generate requires a synthetic system");
  }
  fs::create_directories(c.out_dir);
  const rffrc::TimeSeries clean = generate_series(c);
  const fs::path base = fs::path(c.out_dir) / c.system;
  rffrc::write_csv(clean, base.string() + ".csv");
  if (c.noise_snr_db) {
    const rffrc::TimeSeries noisy =
        rffrc::add_awgn(clean, *c.noise_snr_db, c.noise_seed);
    rffrc::write_csv(noisy, base.string() + "_noisy.csv");
  }
  json meta;
  meta["command"] = "generate";
  meta["config"] = config_to_json(c);
  meta["rows"] = clean.rows();
  meta["channels"] = clean.channels();
  meta["channel_names"] = clean.channel_names;
  meta["wall_ms"] = ms_since(t0);
  write_json_file(base.string() + ".meta.json", meta);
  write_resolved_config(c);
  if (!f.quiet) {
    std::printf("wrote %s.csv (%ld rows, %ld channels)\n",
                base.string().c_str(), static_cast<long>(clean.rows()),
                static_cast<long>(clean.channels()));
  }
  return 0;
}

int cmd_train(const Flags& f) {
  const auto t0 = Clock::now();
  ExperimentConfig c = resolve_config("train", f);
  fs::create_directories(c.out_dir);
  const Dataset data = load_dataset(c);
  const rffrc::ChronologicalSplit in_split = rffrc::chronological_split(
      data.inputs.values, c.train_frac, c.val_frac, c.swap_validation_test);

  rffrc::TimeSeries train_inputs;
  train_inputs.dt = data.inputs.dt;
  train_inputs.channel_names = data.inputs.channel_names;
  train_inputs.values = in_split.train;

  const rffrc::ForecasterConfig fc = forecaster_config(c);
  rffrc::Forecaster model = [&] {
    if (data.targets && c.clean_targets) {
      rffrc::TimeSeries train_targets;
      train_targets.dt = data.targets->dt;
      train_targets.channel_names = data.targets->channel_names;
      train_targets.values =
          data.targets->values.middleRows(in_split.train_offset,
                                          in_split.train.rows());
      return rffrc::Forecaster::train(train_inputs, train_targets, fc);
    }
    return rffrc::Forecaster::train(train_inputs, fc);
  }();
  const fs::path model_file = fs::path(c.out_dir) / "model.rfrc";
  model.save(model_file);

  json metrics;
  metrics["command"] = "train";
  metrics["config"] = config_to_json(c);
  metrics["model_file"] = model_file.string();
  metrics["training_nrmse"] =
      vector_to_json(model.training_nrmse_per_channel());
  metrics["training_nrmse_mean"] = model.training_nrmse();
  metrics["lambda_effective"] = model.readout().lambda_effective;
  metrics["jitter_escalations"] = model.readout().jitter_escalations;

  // One-step accuracy on the held-out segments, judged against the
  // target series when one is configured (e.g. the clean signal).
  const Eigen::MatrixXd& truth_source =
      data.targets ? data.targets->values : data.inputs.values;
  const auto segment_eval = [&](const Eigen::MatrixXd& seg,
                                Eigen::Index offset) -> json {
    if (seg.rows() <= c.k) return nullptr;
    const Eigen::MatrixXd pred = model.predict_one_step(seg);
    const Eigen::MatrixXd truth_seg =
        truth_source.middleRows(offset, seg.rows());
    const rffrc::TrainingPairs pairs = rffrc::make_training_pairs(
        truth_seg, c.k, model.observed_channels(), model.target_channels());
    return vector_to_json(rffrc::nrmse(pred, pairs.targets));
  };
  metrics["validation_nrmse"] =
      segment_eval(in_split.validation, in_split.validation_offset);
  metrics["test_nrmse"] = segment_eval(in_split.test, in_split.test_offset);

  // Closed-loop valid prediction time on the test segment, when the
  // model can run closed loop (observed channels fed back).
  metrics["theta"] = c.theta;
  metrics["valid_prediction_time"] = nullptr;
  if (in_split.test.rows() > c.k) {
    const Eigen::Index remaining = in_split.test.rows() - c.k;
    const Eigen::Index horizon =
        c.horizon < 0 ? remaining
                      : std::min<Eigen::Index>(c.horizon, remaining);
    if (horizon > 0) {
      try {
        const Eigen::MatrixXd roll =
            model.rollout(in_split.test.topRows(c.k), horizon);
        const Eigen::MatrixXd truth_seg = truth_source.middleRows(
            in_split.test_offset + c.k, horizon);
        rffrc::TrainingPairs dummy;  // restrict truth to target channels
        Eigen::MatrixXd truth_cols(horizon,
                                   static_cast<Eigen::Index>(
                                       model.target_channels().size()));
        for (std::size_t i = 0; i < model.target_channels().size(); ++i) {
          truth_cols.col(static_cast<Eigen::Index>(i)) =
              truth_seg.col(model.target_channels()[i]);
        }
        metrics["valid_prediction_time"] =
            rffrc::valid_prediction_time(roll, truth_cols, c.theta);
        metrics["rollout_horizon"] = horizon;
      } catch (const rffrc::config_error&) {
        // Open-loop model (observed not a subset of target): skip.
      }
    }
  }
  metrics["wall_ms"] = ms_since(t0);
  write_json_file(fs::path(c.out_dir) / "metrics.json", metrics);
  write_resolved_config(c);
  if (!f.quiet) {
    std::printf("trained %s model: training NRMSE %.3e, saved to %s\n",
                c.system.c_str(), model.training_nrmse(),
                model_file.string().c_str());
  }
  return 0;
}

int cmd_forecast(const Flags& f) {
  const auto t0 = Clock::now();
  ExperimentConfig c = resolve_config("forecast", f);
  if (c.model_path.empty()) {
    throw rffrc::config_error("forecast requires --model (or model_path)");
  }
  fs::create_directories(c.out_dir);
  const rffrc::Forecaster model = rffrc::Forecaster::load(c.model_path);
  const Dataset data = load_dataset(c);
  const SegmentView view = select_segment(data, c);
  const int k = model.config().k;
  if (view.inputs.rows() <= k) {
    throw rffrc::config_error("segment '" + c.segment +
                              "' is too short for the model window");
  }
  const std::vector<std::string> target_names =
      names_for(model.channel_names(), model.target_channels());

  Eigen::MatrixXd pred;
  Eigen::MatrixXd truth;
  Eigen::Index horizon = 0;
  const Eigen::Index remaining = view.inputs.rows() - k;
  if (c.forecast_mode == "rollout") {
    horizon = c.horizon < 0 ? remaining : c.horizon;
    if (horizon > remaining) {
      throw rffrc::config_error(
          "horizon exceeds the truth available in segment '" + c.segment +
          "'");
    }
    pred = model.rollout(view.inputs.topRows(k), horizon);
  } else {
    // onestep and teacher produce identical outputs by construction.
    pred = c.forecast_mode == "onestep"
               ? model.predict_one_step(view.inputs)
               : model.rollout_teacher_forced(view.inputs);
    horizon = c.horizon < 0 ? remaining
                            : std::min<Eigen::Index>(c.horizon, remaining);
    pred.conservativeResize(horizon, pred.cols());
  }
  truth.resize(horizon, pred.cols());
  for (std::size_t i = 0; i < model.target_channels().size(); ++i) {
    truth.col(static_cast<Eigen::Index>(i)) =
        view.truth.col(model.target_channels()[i]).segment(k, horizon);
  }

  const Eigen::Index first = view.offset + k;
  rffrc::write_matrix_csv(pred, target_names, model.dt(), first,
                          fs::path(c.out_dir) / "forecast.csv");
  rffrc::write_matrix_csv(truth, target_names, model.dt(), first,
                          fs::path(c.out_dir) / "truth.csv");

  json metrics;
  metrics["command"] = "forecast";
  metrics["config"] = config_to_json(c);
  metrics["forecast_mode"] = c.forecast_mode;
  metrics["horizon"] = horizon;
  metrics["theta"] = c.theta;
  if (horizon > 0) {
    metrics["nrmse"] = vector_to_json(rffrc::nrmse(pred, truth));
    metrics["mean_nrmse"] = rffrc::mean_nrmse(pred, truth);
    if (c.forecast_mode == "rollout") {
      metrics["valid_prediction_time"] =
          rffrc::valid_prediction_time(pred, truth, c.theta);
    }
  } else {
    metrics["nrmse"] = nullptr;
    metrics["mean_nrmse"] = nullptr;
  }
  metrics["wall_ms"] = ms_since(t0);
  write_json_file(fs::path(c.out_dir) / "metrics.json", metrics);
  write_resolved_config(c);
  if (!f.quiet) {
    std::printf("forecast (%s, %ld steps) written to %s\n",
                c.forecast_mode.c_str(), static_cast<long>(horizon),
                c.out_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const Flags& f) {
  const auto t0 = Clock::now();
  ExperimentConfig c = resolve_config("sweep", f);
  fs::create_directories(c.out_dir);
  const Dataset data = load_dataset(c);
  const SegmentView view = select_segment(data, c);
  const rffrc::ChronologicalSplit in_split = rffrc::chronological_split(
      data.inputs.values, c.train_frac, c.val_frac, c.swap_validation_test);
  if (view.inputs.rows() <= c.k) {
    throw rffrc::config_error("segment '" + c.segment +
                              "' is too short to score a sweep");
  }

  rffrc::TimeSeries train_inputs;
  train_inputs.dt = data.inputs.dt;
  train_inputs.channel_names = data.inputs.channel_names;
  train_inputs.values = in_split.train;

  const auto apply_axis = [&](rffrc::ForecasterConfig& fc, double value) {
    if (c.axis == "m") {
      fc.n_features = static_cast<int>(value);
    } else if (c.axis == "k") {
      fc.k = static_cast<int>(value);
    } else if (c.axis == "sigma") {
      fc.sigma = value;
    } else {
      fc.lambda = value;
    }
  };
  const auto score = [&](double value, std::uint64_t seed) {
    rffrc::ForecasterConfig fc = forecaster_config(c);
    fc.seed = seed;
    apply_axis(fc, value);
    const rffrc::Forecaster model =
        rffrc::Forecaster::train(train_inputs, fc);
    const Eigen::MatrixXd pred = model.predict_one_step(view.inputs);
    const rffrc::TrainingPairs pairs = rffrc::make_training_pairs(
        view.truth, fc.k, model.observed_channels(), model.target_channels());
    return rffrc::mean_nrmse(pred, pairs.targets);
  };
  const std::vector<rffrc::SweepPoint> curve =
      rffrc::sweep(c.axis_values, c.sweep_seeds, score);

  std::string csv = "axis_value,median_nrmse,q25,q75\n";
  json curve_json = json::array();
  for (const auto& point : curve) {
    append_num(csv, point.axis_value);
    csv += ',';
    append_num(csv, point.median_nrmse);
    csv += ',';
    append_num(csv, point.q25);
    csv += ',';
    append_num(csv, point.q75);
    csv += '\n';
    curve_json.push_back(json{{"axis_value", point.axis_value},
                              {"median_nrmse", point.median_nrmse},
                              {"q25", point.q25},
                              {"q75", point.q75}});
  }
  rffrc::write_text_file(fs::path(c.out_dir) / "sweep.csv", csv);

  json metrics;
  metrics["command"] = "sweep";
  metrics["config"] = config_to_json(c);
  metrics["axis"] = c.axis;
  metrics["curve"] = curve_json;
  metrics["wall_ms"] = ms_since(t0);
  write_json_file(fs::path(c.out_dir) / "metrics.json", metrics);
  write_resolved_config(c);
  if (!f.quiet) {
    std::printf("sweep over %s (%zu values, %zu seeds) written to %s\n",
                c.axis.c_str(), c.axis_values.size(), c.sweep_seeds.size(),
                c.out_dir.c_str());
  }
  return 0;
}

int cmd_gridsearch(const Flags& f) {
  const auto t0 = Clock::now();
  ExperimentConfig c = resolve_config("gridsearch", f);
  fs::create_directories(c.out_dir);
  const Dataset data = load_dataset(c);

  rffrc::GridSearchOptions options;
  options.train_frac = c.train_frac;
  options.val_frac = c.val_frac;
  options.swap_validation_test = c.swap_validation_test;
  options.observed = c.observed;
  options.target = c.target;
  options.scaling = rffrc::scaling_mode_from_string(c.scaling);
  options.seed = c.seed;
  options.seed_mode = c.seed_mode == "shared"
                          ? rffrc::GridSeedMode::shared
                          : rffrc::GridSeedMode::per_candidate;
  std::vector<double> sigmas = c.sigma_grid;
  std::vector<double> lambdas = c.lambda_grid;
  const rffrc::GridSearchResult result = rffrc::grid_search(
      data.inputs, c.k_grid, c.m_grid, lambdas, sigmas, options);

  std::string csv =
      "k,m,lambda,sigma,seed,train_nrmse,validation_nrmse,test_nrmse,"
      "wall_ms\n";
  json rows = json::array();
  for (const auto& row : result.rows) {
    csv += std::to_string(row.candidate.k) + ',' + std::to_string(row.candidate.m) + ',';
    append_num(csv, row.candidate.lambda);
    csv += ',';
    append_num(csv, row.candidate.sigma);
    csv += ',' + std::to_string(row.seed) + ',';
    append_num(csv, row.train_nrmse);
    csv += ',';
    append_num(csv, row.validation_nrmse);
    csv += ',';
    append_num(csv, row.test_nrmse);
    csv += ',';
    append_num(csv, row.wall_ms);
    csv += '\n';
    rows.push_back(json{{"k", row.candidate.k},
                        {"m", row.candidate.m},
                        {"lambda", row.candidate.lambda},
                        {"sigma", row.candidate.sigma},
                        {"seed", row.seed},
                        {"train_nrmse", row.train_nrmse},
                        {"validation_nrmse", row.validation_nrmse},
                        {"test_nrmse", row.test_nrmse},
                        {"wall_ms", row.wall_ms}});
  }
  rffrc::write_text_file(fs::path(c.out_dir) / "gridsearch.csv", csv);

  // Retrain the winning candidate and save it for later forecasting.
  const rffrc::ChronologicalSplit in_split = rffrc::chronological_split(
      data.inputs.values, c.train_frac, c.val_frac, c.swap_validation_test);
  rffrc::TimeSeries train_inputs;
  train_inputs.dt = data.inputs.dt;
  train_inputs.channel_names = data.inputs.channel_names;
  train_inputs.values = in_split.train;
  rffrc::ForecasterConfig best_fc = forecaster_config(c);
  best_fc.k = result.best.k;
  best_fc.n_features = result.best.m;
  best_fc.lambda = result.best.lambda;
  best_fc.sigma = result.best.sigma;
  for (const auto& row : result.rows) {
    if (row.candidate.k == result.best.k && row.candidate.m == result.best.m &&
        row.candidate.lambda == result.best.lambda &&
        row.candidate.sigma == result.best.sigma) {
      best_fc.seed = row.seed;
      break;
    }
  }
  const rffrc::Forecaster best_model =
      rffrc::Forecaster::train(train_inputs, best_fc);
  const fs::path model_file = fs::path(c.out_dir) / "best_model.rfrc";
  best_model.save(model_file);

  json metrics;
  metrics["command"] = "gridsearch";
  metrics["config"] = config_to_json(c);
  metrics["best"] = json{{"k", result.best.k},
                         {"m", result.best.m},
                         {"lambda", result.best.lambda},
                         {"sigma", result.best.sigma},
                         {"seed", best_fc.seed}};
  metrics["best_validation_nrmse"] = result.best_validation_nrmse;
  metrics["n_candidates"] = result.rows.size();
  metrics["rows"] = rows;
  metrics["model_file"] = model_file.string();
  metrics["wall_ms"] = ms_since(t0);
  write_json_file(fs::path(c.out_dir) / "metrics.json", metrics);
  write_resolved_config(c);
  if (!f.quiet) {
    std::printf(
        "grid search over %zu candidates: best k=%d m=%d lambda=%g sigma=%g "
        "(validation NRMSE %.3e)\n",
        result.rows.size(), result.best.k, result.best.m, result.best.lambda,
        result.best.sigma, result.best_validation_nrmse);
  }
  return 0;
}

int cmd_reproduce(const Flags& f, const std::string& name) {
  ExperimentConfig c = resolve_config("reproduce", f);
  rffrc::recipes::RecipeOptions options;
  options.out_dir = f.o_out->count() > 0 ? fs::path(c.out_dir)
                                         : fs::path("out_reproduce") / name;
  options.write_files = true;
  options.full_scale = f.full_scale;
  const rffrc::recipes::RecipeResult result = rffrc::recipes::run(name, options);
  std::printf("%s\n", result.summary.c_str());
  return 0;
}

int cmd_denoise_eval(const Flags& f) {
  const auto t0 = Clock::now();
  ExperimentConfig c = resolve_config("denoise-eval", f);
  fs::create_directories(c.out_dir);
  const Dataset data = load_dataset(c);
  if (!data.targets) {
    throw rffrc::config_error(
        "denoise-eval needs a clean reference: configure noise_snr_db on a "
        "synthetic system, or provide target_csv");
  }
  const rffrc::ChronologicalSplit in_split = rffrc::chronological_split(
      data.inputs.values, c.train_frac, c.val_frac, c.swap_validation_test);
  const rffrc::ChronologicalSplit target_split = rffrc::chronological_split(
      data.targets->values, c.train_frac, c.val_frac, c.swap_validation_test);

  rffrc::TimeSeries train_inputs;
  train_inputs.dt = data.inputs.dt;
  train_inputs.channel_names = data.inputs.channel_names;
  train_inputs.values = in_split.train;
  rffrc::TimeSeries train_targets;
  train_targets.dt = data.targets->dt;
  train_targets.channel_names = data.targets->channel_names;
  train_targets.values = target_split.train;

  const rffrc::ForecasterConfig fc = forecaster_config(c);
  const rffrc::Forecaster model =
      c.clean_targets ? rffrc::Forecaster::train(train_inputs, train_targets, fc)
                      : rffrc::Forecaster::train(train_inputs, fc);

  const Eigen::MatrixXd pred = model.predict_one_step(in_split.test);
  const rffrc::TrainingPairs clean_pairs = rffrc::make_training_pairs(
      target_split.test, c.k, model.observed_channels(),
      model.target_channels());
  const rffrc::TrainingPairs noisy_pairs = rffrc::make_training_pairs(
      in_split.test, c.k, model.observed_channels(), model.target_channels());

  const rffrc::SnrReport input_snr =
      rffrc::measure_snr(clean_pairs.targets, noisy_pairs.targets);
  const rffrc::SnrReport pred_snr =
      rffrc::measure_snr(clean_pairs.targets, pred);
  const Eigen::VectorXd gain =
      pred_snr.per_channel_db - input_snr.per_channel_db;
  const Eigen::VectorXd err = rffrc::nrmse(pred, clean_pairs.targets);

  const std::vector<std::string> target_names =
      names_for(data.inputs.channel_names, model.target_channels());
  const Eigen::Index first = in_split.test_offset + c.k;
  rffrc::write_matrix_csv(pred, target_names, data.inputs.dt, first,
                          fs::path(c.out_dir) / "denoised_pred.csv");
  rffrc::write_matrix_csv(clean_pairs.targets, target_names, data.inputs.dt,
                          first, fs::path(c.out_dir) / "clean_truth.csv");
  rffrc::write_matrix_csv(noisy_pairs.targets, target_names, data.inputs.dt,
                          first, fs::path(c.out_dir) / "noisy_input.csv");

  json metrics;
  metrics["command"] = "denoise-eval";
  metrics["config"] = config_to_json(c);
  metrics["input_snr_db"] = vector_to_json(input_snr.per_channel_db);
  metrics["pred_snr_db"] = vector_to_json(pred_snr.per_channel_db);
  metrics["snr_gain_db_per_channel"] = vector_to_json(gain);
  metrics["snr_gain_db"] = gain.mean();
  metrics["test_nrmse"] = vector_to_json(err);
  metrics["wall_ms"] = ms_since(t0);
  write_json_file(fs::path(c.out_dir) / "metrics.json", metrics);
  write_resolved_config(c);
  if (!f.quiet) {
    std::printf("denoise-eval: SNR gain %.2f dB, mean NRMSE %.3e\n",
                gain.mean(), err.mean());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("RFFRC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"Random-feature forecasting toolkit (library version " +
               std::string(rffrc::kVersion) + ")"};
  app.require_subcommand(1);

  // One flag set per subcommand: option pointers must belong to the
  // subcommand that parses them.
  Flags f_gen, f_train, f_fc, f_sweep, f_grid, f_rep, f_den;
  std::string recipe_name;

  CLI::App* generate =
      app.add_subcommand("generate", "generate a benchmark series as CSV");
  add_common_flags(generate, f_gen);
  add_data_flags(generate, f_gen);

  CLI::App* train =
      app.add_subcommand("train", "fit a forecaster and save the model");
  add_common_flags(train, f_train);
  add_data_flags(train, f_train);
  add_split_flags(train, f_train);
  add_model_flags(train, f_train);
  f_train.o_horizon = train->add_option(
      "--horizon", f_train.horizon, "rollout steps for the test-time metric");
  f_train.o_theta = train->add_option("--theta", f_train.theta,
                                      "valid-time error threshold");

  CLI::App* forecast =
      app.add_subcommand("forecast", "run a saved model over a data segment");
  add_common_flags(forecast, f_fc);
  add_data_flags(forecast, f_fc);
  add_split_flags(forecast, f_fc);
  f_fc.o_model =
      forecast->add_option("--model", f_fc.model_path, "saved .rfrc model file");
  f_fc.o_mode = forecast->add_option("--mode", f_fc.forecast_mode,
                                     "onestep | rollout | teacher");
  f_fc.o_segment = forecast->add_option("--segment", f_fc.segment,
                                        "train | validation | test");
  f_fc.o_horizon = forecast->add_option(
      "--horizon", f_fc.horizon, "steps to forecast (0 writes only headers)");
  f_fc.o_theta = forecast->add_option("--theta", f_fc.theta,
                                      "valid-time error threshold");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "one-dimensional hyperparameter sweep with quartiles");
  add_common_flags(sweep_cmd, f_sweep);
  add_data_flags(sweep_cmd, f_sweep);
  add_split_flags(sweep_cmd, f_sweep);
  add_model_flags(sweep_cmd, f_sweep);
  f_sweep.o_axis = sweep_cmd->add_option("--axis", f_sweep.axis,
                                         "sweep axis: m | k | sigma | lambda");
  f_sweep.o_axis_values =
      sweep_cmd->add_option("--values", f_sweep.axis_values, "axis values")
          ->delimiter(',');
  f_sweep.o_sweep_seeds =
      sweep_cmd
          ->add_option("--sweep-seeds", f_sweep.sweep_seeds,
                       "seeds to median over")
          ->delimiter(',');
  f_sweep.o_segment = sweep_cmd->add_option(
      "--segment", f_sweep.segment, "scoring segment (default validation)");

  CLI::App* gridsearch = app.add_subcommand(
      "gridsearch", "exhaustive search over a hyperparameter grid");
  add_common_flags(gridsearch, f_grid);
  add_data_flags(gridsearch, f_grid);
  add_split_flags(gridsearch, f_grid);
  add_model_flags(gridsearch, f_grid);
  f_grid.o_k_grid =
      gridsearch->add_option("--k-grid", f_grid.k_grid, "k candidates")
          ->delimiter(',');
  f_grid.o_m_grid =
      gridsearch->add_option("--m-grid", f_grid.m_grid, "m candidates")
          ->delimiter(',');
  f_grid.o_lambda_grid =
      gridsearch
          ->add_option("--lambda-grid", f_grid.lambda_grid,
                       "lambda candidates")
          ->delimiter(',');
  f_grid.o_sigma_grid =
      gridsearch
          ->add_option("--sigma-grid", f_grid.sigma_grid, "sigma candidates")
          ->delimiter(',');
  f_grid.o_seed_mode = gridsearch->add_option(
      "--seed-mode", f_grid.seed_mode, "shared | per_candidate");

  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "rerun a named experiment and check its published bounds");
  add_common_flags(reproduce, f_rep);
  std::string names_help = "experiment name:";
  for (const auto& known : rffrc::recipes::names()) names_help += " " + known;
  reproduce->add_option("name", recipe_name, names_help)->required();
  reproduce->add_flag("--full-scale", f_rep.full_scale,
                      "run the full-size variant (more features)");

  CLI::App* denoise = app.add_subcommand(
      "denoise-eval", "train on noisy data and measure the SNR improvement");
  add_common_flags(denoise, f_den);
  add_data_flags(denoise, f_den);
  add_split_flags(denoise, f_den);
  add_model_flags(denoise, f_den);

  try {
    app.parse(argc, argv);
    if (*generate) return cmd_generate(f_gen);
    if (*train) return cmd_train(f_train);
    if (*forecast) return cmd_forecast(f_fc);
    if (*sweep_cmd) return cmd_sweep(f_sweep);
    if (*gridsearch) return cmd_gridsearch(f_grid);
    if (*reproduce) return cmd_reproduce(f_rep, recipe_name);
    if (*denoise) return cmd_denoise_eval(f_den);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const rffrc::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const rffrc::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const rffrc::numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
