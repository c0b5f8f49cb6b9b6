#include "odegrow/cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "odegrow/error.hpp"

namespace odegrow::cli {

void CalibrationOverrides::apply_to(CalibrationConfig& config) const {
  if (learning_rate) config.learning_rate = *learning_rate;
  if (max_iters) config.max_iters = *max_iters;
  if (adam_beta1) config.adam_beta1 = *adam_beta1;
  if (adam_beta2) config.adam_beta2 = *adam_beta2;
  if (adam_eps) config.adam_eps = *adam_eps;
  if (penalty_kappa) config.penalty_kappa = *penalty_kappa;
  if (early_stop_patience) config.early_stop_patience = *early_stop_patience;
  if (early_stop_rel_tol) config.early_stop_rel_tol = *early_stop_rel_tol;
}

CalibrationConfig CliConfig::calibration_for(ModelKind kind) const {
  CalibrationConfig config = CalibrationConfig::defaults_for(kind);
  calibration.apply_to(config);
  if (auto it = per_model.find(kind); it != per_model.end()) it->second.apply_to(config);
  flags.apply_to(config);
  config.solve = solve;
  config.seed = seed;
  return config;
}

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, where + ": " + what);
}

double as_real(const TomlValue& value, const std::string& where) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  invalid(where, "expected a number");
}

std::uint64_t as_count(const TomlValue& value, const std::string& where) {
  const auto* i = std::get_if<std::int64_t>(&value);
  if (i == nullptr) invalid(where, "expected an integer");
  if (*i < 0) invalid(where, "must not be negative");
  return static_cast<std::uint64_t>(*i);
}

CalibrationOverrides read_calibration(const std::map<std::string, TomlValue>& table, const std::string& section,
                                      bool allow_seed, CliConfig& out) {
  CalibrationOverrides o;
  for (const auto& [key, value] : table) {
    const std::string where = "[" + section + "] " + key;
    if (key == "learning_rate") {
      o.learning_rate = as_real(value, where);
    } else if (key == "max_iters") {
      o.max_iters = as_count(value, where);
    } else if (key == "adam_beta1") {
      o.adam_beta1 = as_real(value, where);
    } else if (key == "adam_beta2") {
      o.adam_beta2 = as_real(value, where);
    } else if (key == "adam_eps") {
      o.adam_eps = as_real(value, where);
    } else if (key == "penalty_kappa") {
      o.penalty_kappa = as_real(value, where);
    } else if (key == "early_stop_patience") {
      o.early_stop_patience = as_count(value, where);
    } else if (key == "early_stop_rel_tol") {
      o.early_stop_rel_tol = as_real(value, where);
    } else if (key == "seed" && allow_seed) {
      out.seed = as_count(value, where);
    } else {
      invalid(where, "unknown key");
    }
  }
  return o;
}

unsigned as_threads(const TomlValue& value, const std::string& where) {
  const std::uint64_t n = as_count(value, where);
  if (n > 4096) invalid(where, "too many threads");
  return static_cast<unsigned>(n);
}

}  // namespace

CliConfig config_from_toml(const TomlDocument& doc) {
  CliConfig config;
  for (const auto& [section, table] : doc) {
    if (section.empty()) {
      for (const auto& [key, value] : table) {
        if (key == "threads") {
          config.threads = as_threads(value, key);
        } else {
          invalid(key, "unknown top-level key");
        }
      }
    } else if (section == "calibration") {
      config.calibration = read_calibration(table, section, true, config);
    } else if (section.rfind("calibration.", 0) == 0) {
      const std::string name = section.substr(std::string("calibration.").size());
      const auto kind = parse_model_kind(name);
      if (!kind) invalid("[" + section + "]", "unknown model '" + name + "'; valid models: " + model_kind_list());
      config.per_model[*kind] = read_calibration(table, section, false, config);
    } else if (section == "solver") {
      for (const auto& [key, value] : table) {
        const std::string where = "[solver] " + key;
        if (key == "steps") {
          config.solve.steps = as_count(value, where);
        } else if (key == "max_state_magnitude") {
          config.solve.max_state_magnitude = as_real(value, where);
        } else {
          invalid(where, "unknown key");
        }
      }
    } else if (section == "bootstrap") {
      for (const auto& [key, value] : table) {
        const std::string where = "[bootstrap] " + key;
        if (key == "n_resamples") {
          config.bootstrap.n_resamples = as_count(value, where);
        } else if (key == "alpha") {
          config.bootstrap.alpha = as_real(value, where);
        } else {
          invalid(where, "unknown key");
        }
      }
    } else if (section == "run") {
      if (auto it = table.find("threads"); it != table.end()) config.threads = as_threads(it->second, "[run] threads");
    } else {
      invalid("[" + section + "]", "unknown section");
    }
  }
  if (config.solve.steps < 1) invalid("[solver] steps", "must be positive");
  if (!(config.solve.max_state_magnitude > 0.0)) invalid("[solver] max_state_magnitude", "must be positive");
  if (config.bootstrap.n_resamples < 1) invalid("[bootstrap] n_resamples", "must be positive");
  if (!(config.bootstrap.alpha > 0.0 && config.bootstrap.alpha < 1.0)) invalid("[bootstrap] alpha", "must lie in (0, 1)");
  return config;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  return config_from_toml(parse_toml(in));
}

unsigned resolve_threads(std::optional<unsigned> flag, const CliConfig& config) {
  if (flag) return *flag;
  if (config.threads) return *config.threads;
  if (const char* env = std::getenv("ODEGROW_THREADS"); env != nullptr && *env != '\0') {
    unsigned n = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::InvalidConfig, "ODEGROW_THREADS must be a non-negative integer, got '" + std::string(text) + "'");
    }
    return n;
  }
  return 0;  // battle() maps 0 to hardware concurrency
}

}  // namespace odegrow::cli
