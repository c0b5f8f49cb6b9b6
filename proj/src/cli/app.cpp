#include "odegrow/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "odegrow/calibrate.hpp"
#include "odegrow/cli/svg.hpp"
#include "odegrow/cli/toml.hpp"
#include "odegrow/data.hpp"
#include "odegrow/error.hpp"
#include "odegrow/models.hpp"

namespace odegrow::cli {

namespace {

// Flags shared by the commands that fit models.
struct FitFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<std::size_t> max_iters;
  std::optional<double> penalty;
  std::optional<std::size_t> patience;
  std::optional<double> rel_tol;
  std::optional<std::size_t> steps;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "TOML config with [calibration], [solver], [bootstrap]")
        ->check(CLI::ExistingFile);
    cmd.add_option("--seed", seed, "master seed (overrides [calibration] seed)");
    cmd.add_option("--learning-rate", learning_rate, "Adam learning rate for every model");
    cmd.add_option("--max-iters", max_iters, "iteration cap per fit");
    cmd.add_option("--penalty", penalty, "penalty exponent kappa for every model");
    cmd.add_option("--patience", patience, "early-stopping patience");
    cmd.add_option("--rel-tol", rel_tol, "early-stopping relative tolerance");
    cmd.add_option("--steps", steps, "RK4 steps over the calibration span");
  }

  [[nodiscard]] CliConfig resolve() const {
    CliConfig config = config_path.empty() ? CliConfig{} : load_config(config_path);
    if (seed) config.seed = *seed;
    config.flags.learning_rate = learning_rate;
    config.flags.max_iters = max_iters;
    config.flags.penalty_kappa = penalty;
    config.flags.early_stop_patience = patience;
    config.flags.early_stop_rel_tol = rel_tol;
    if (steps) {
      if (*steps < 1) throw Error(ErrorCode::InvalidConfig, "--steps must be positive");
      config.solve.steps = *steps;
    }
    return config;
  }
};

ModelSpec parse_model(const std::string& name) {
  const auto kind = parse_model_kind(name);
  if (!kind) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + name + "'; valid models: " + model_kind_list());
  }
  return ModelSpec::of(*kind);
}

const Lesion& find_lesion(const std::vector<Lesion>& cohort, const std::string& id) {
  for (const auto& lesion : cohort) {
    if (lesion.id() == id) return lesion;
  }
  throw Error(ErrorCode::InvalidConfig, "lesion '" + id + "' not found in the cohort");
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

std::string fit_report(const Lesion& lesion, const FitResult& result, const HoldoutPoints& holdout) {
  std::ostringstream s;
  s << "lesion: " << lesion.id() << '\n';
  s << "model: " << to_string(result.spec.kind()) << '\n';
  s << "status: " << to_string(result.status) << '\n';
  s << "iterations: " << result.iterations << '\n';
  s << "final_loss: " << format_number(result.final_loss()) << '\n';
  s << "time_origin: " << format_number(result.time_origin) << '\n';
  s << "volume_scale: " << format_number(result.volume_scale) << '\n';
  s << "parameters:\n";
  const auto& names = result.params.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    s << "  " << names[i] << " = " << format_number(result.params[i]) << '\n';
  }
  if (result.status != FitStatus::Diverged) {
    s << "holdout_mae: " << format_number(holdout_mae(result, holdout)) << '\n';
    s << "holdout:\n";
    for (std::size_t i = 0; i < holdout.times.size(); ++i) {
      s << "  t = " << format_number(holdout.times[i]) << ", measured = " << format_number(holdout.volumes[i])
        << ", predicted = " << format_number(result.holdout_predictions[i]) << '\n';
    }
  }
  return s.str();
}

CalibrationConfig lesion_config(const CliConfig& config, const ModelSpec& spec, const std::string& id) {
  CalibrationConfig cfg = config.calibration_for(spec.kind());
  cfg.seed = derive_seed(config.seed, id, spec.kind());
  return cfg;
}

int cmd_fit(const std::string& input, const std::string& model, const std::string& lesion_id,
            const std::string& out_path, const FitFlags& flags, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = parse_model(model);
  const CliConfig config = flags.resolve();
  const auto cohort = load_cohort(input);
  const Lesion& lesion = find_lesion(cohort, lesion_id);
  const HoldoutSplit split = split_holdout(lesion);
  const FitResult result = fit(spec, split.calibration, lesion_config(config, spec, lesion.id()), split.holdout);
  const std::string report = fit_report(lesion, result, split.holdout);
  out << report;
  if (!out_path.empty()) {
    auto file = open_output(out_path);
    file << report;
    finish_output(file, out_path);
  }
  if (result.status == FitStatus::Diverged) {
    err << "Diverged: fit of " << to_string(spec.kind()) << " to lesion '" << lesion.id()
        << "' did not produce a finite loss or holdout prediction\n";
    return kExitNumerical;
  }
  return kExitOk;
}

std::string verdict_cell(const Matchup& m) {
  return std::string(to_string(m.verdict)) + " [" + format_number(m.interval.low) + ";" +
         format_number(m.interval.high) + "]";
}

int cmd_battle(const std::string& input, const std::string& models, const std::string& out_dir,
               std::optional<unsigned> threads_flag, std::optional<std::size_t> resamples, std::optional<double> alpha,
               const FitFlags& flags, std::ostream& out) {
  const auto specs = parse_model_list(models);
  if (specs.size() < 2) throw Error(ErrorCode::InvalidConfig, "at least two models required");
  CliConfig config = flags.resolve();
  if (resamples) config.bootstrap.n_resamples = *resamples;
  if (alpha) config.bootstrap.alpha = *alpha;
  if (config.bootstrap.n_resamples < 1) throw Error(ErrorCode::InvalidConfig, "--resamples must be positive");
  if (!(config.bootstrap.alpha > 0.0 && config.bootstrap.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "--alpha must lie in (0, 1)");
  }
  const auto cohort = load_cohort(input);

  BattleConfig battle_config;
  for (const auto& spec : specs) battle_config.calibration.push_back(config.calibration_for(spec.kind()));
  battle_config.bootstrap = config.bootstrap;
  battle_config.master_seed = config.seed;
  battle_config.threads = resolve_threads(threads_flag, config);
  if (battle_config.threads == 0) battle_config.threads = std::max(1u, std::thread::hardware_concurrency());
  const BattleReport report = battle(cohort, specs, battle_config);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, auto&& writer) {
    const auto path = dir / name;
    auto file = open_output(path);
    writer(file);
    finish_output(file, path);
  };
  write("ranking.csv", [&](std::ostream& o) { write_ranking_csv(o, report); });
  write("matchups.csv", [&](std::ostream& o) { write_matchups_csv(o, report); });
  write("per_lesion_errors.csv", [&](std::ostream& o) { write_per_lesion_csv(o, report); });
  write("manifest.toml",
        [&](std::ostream& o) { write_manifest(o, input, report, battle_config, battle_config.threads); });

  out << "lesions used: " << report.n_lesions_used << ", discarded (diverged): " << report.n_discarded
      << ", rejected (< " << kMinMeasurements << " points): " << report.n_rejected << '\n';
  out << std::left << std::setw(6) << "rank" << std::setw(24) << "model" << std::setw(24) << "mean abs. error"
      << "num. parameters\n";
  std::size_t rank = 1;
  for (std::size_t m : report.ranking()) {
    out << std::setw(6) << rank++ << std::setw(24) << display_name(report.models[m].kind()) << std::setw(24)
        << format_number(report.mean_abs_error[m]) << report.models[m].parameter_count() << '\n';
  }
  return kExitOk;
}

int cmd_plot(const std::string& input, const std::string& lesion_id, const std::string& models,
             const std::string& out_path, const FitFlags& flags) {
  const auto specs = parse_model_list(models);
  const CliConfig config = flags.resolve();
  const auto cohort = load_cohort(input);
  const Lesion& lesion = find_lesion(cohort, lesion_id);
  const HoldoutSplit split = split_holdout(lesion);

  PlotData plot;
  plot.title = "lesion " + lesion.id();
  const auto ct = split.calibration.times();
  const auto cv = split.calibration.volumes();
  plot.calibration_times.assign(ct.begin(), ct.end());
  plot.calibration_volumes.assign(cv.begin(), cv.end());
  plot.holdout_times = split.holdout.times;
  plot.holdout_volumes = split.holdout.volumes;

  constexpr std::size_t kCurvePoints = 200;
  const double t_first = ct.front();
  const double t_last = lesion.times().back();
  std::vector<double> rel(kCurvePoints);
  std::vector<double> abs_times(kCurvePoints);
  for (std::size_t k = 0; k < kCurvePoints; ++k) {
    abs_times[k] = t_first + (t_last - t_first) * static_cast<double>(k) / static_cast<double>(kCurvePoints - 1);
    rel[k] = abs_times[k] - t_first;
  }
  for (const auto& spec : specs) {
    PlotCurve curve;
    curve.label = std::string(display_name(spec.kind()));
    const CalibrationConfig cfg = lesion_config(config, spec, lesion.id());
    const FitResult result = fit(spec, split.calibration, cfg, split.holdout);
    std::optional<std::vector<double>> values;
    if (result.status != FitStatus::Diverged) values = try_predict(spec, result.params.values(), rel, cfg.solve);
    if (values) {
      curve.times = abs_times;
      curve.volumes = std::move(*values);
    } else {
      curve.diverged = true;
    }
    plot.curves.push_back(std::move(curve));
  }
  auto file = open_output(out_path);
  file << render_svg(plot);
  finish_output(file, out_path);
  return kExitOk;
}

ParamRange parse_range(const std::string& text, std::string& name) {
  const auto eq = text.find('=');
  const auto colon = text.find(':', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || colon == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "--range expects name=low:high, got '" + text + "'");
  }
  name = text.substr(0, eq);
  ParamRange r;
  try {
    std::size_t used = 0;
    const std::string lo = text.substr(eq + 1, colon - eq - 1);
    const std::string hi = text.substr(colon + 1);
    r.low = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    r.high = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidConfig, "--range expects name=low:high, got '" + text + "'");
  }
  return r;
}

int cmd_synth(SynthConfig config, const std::vector<std::string>& ranges, const std::string& out_path,
              std::ostream& out) {
  for (const auto& text : ranges) {
    std::string name;
    const ParamRange r = parse_range(text, name);
    config.param_ranges[name] = r;
  }
  const SyntheticCohort cohort = generate_cohort(config);
  const std::filesystem::path path(out_path);
  const auto truth_path = truth_sidecar_path(path);
  {
    auto file = open_output(path);
    write_cohort(file, cohort.lesions);
    finish_output(file, path);
  }
  {
    auto file = open_output(truth_path);
    write_truth(file, cohort.truth);
    finish_output(file, truth_path);
  }
  out << "wrote " << cohort.lesions.size() << " lesions to " << path.string() << " and ground truth to "
      << truth_path.string() << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::Diverged || code == ErrorCode::NoUsableLesions ? kExitNumerical : kExitUsage;
}

}  // namespace

std::vector<ModelSpec> parse_model_list(const std::string& text) {
  std::vector<ModelSpec> specs;
  if (text == "all") {
    for (ModelKind kind : kAllModelKinds) specs.push_back(ModelSpec::of(kind));
    return specs;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string name = text.substr(start, comma - start);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!name.empty()) {
      const ModelSpec spec = parse_model(name);
      for (const auto& s : specs) {
        if (s.kind() == spec.kind()) throw Error(ErrorCode::InvalidConfig, "model '" + name + "' listed twice");
      }
      specs.push_back(spec);
    }
    start = comma + 1;
  }
  if (specs.empty()) throw Error(ErrorCode::InvalidConfig, "no models given; valid models: " + model_kind_list());
  return specs;
}

void write_ranking_csv(std::ostream& out, const BattleReport& report) {
  out << "model,mean_abs_error,num_parameters\n";
  for (std::size_t m : report.ranking()) {
    out << to_string(report.models[m].kind()) << ',' << format_number(report.mean_abs_error[m]) << ','
        << report.models[m].parameter_count() << '\n';
  }
}

void write_matchups_csv(std::ostream& out, const BattleReport& report) {
  const std::size_t k = report.models.size();
  out << "model";
  for (const auto& spec : report.models) out << ',' << to_string(spec.kind());
  out << '\n';
  for (std::size_t a = 0; a < k; ++a) {
    out << to_string(report.models[a].kind());
    for (std::size_t b = 0; b < k; ++b) {
      out << ',';
      if (a != b) out << verdict_cell(report.matchup(a, b));
    }
    out << '\n';
  }
}

void write_per_lesion_csv(std::ostream& out, const BattleReport& report) {
  out << "patient_id";
  for (const auto& spec : report.models) out << ',' << to_string(spec.kind());
  out << '\n';
  for (std::size_t l = 0; l < report.lesion_ids.size(); ++l) {
    out << report.lesion_ids[l];
    for (double e : report.per_lesion_errors[l]) out << ',' << format_number(e);
    out << '\n';
  }
}

void write_manifest(std::ostream& out, const std::filesystem::path& input, const BattleReport& report,
                    const BattleConfig& battle, unsigned threads) {
  auto strings = [](const std::vector<std::string>& items) {
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + toml_quote(items[i]);
    return s + "]";
  };
  std::vector<std::string> names;
  for (const auto& spec : report.models) names.emplace_back(to_string(spec.kind()));

  out << "# Battle manifest. Pass it back with --config to rerun with identical settings.\n";
  out << "# Fit seeds: derive_seed(master seed, patient_id, model).\n\n";
  out << "[run]\n";
  out << "command = \"battle\"\n";
  out << "input = " << toml_quote(input.string()) << '\n';
  out << "models = " << strings(names) << '\n';
  out << "threads = " << threads << '\n';
  out << "n_lesions_used = " << report.n_lesions_used << '\n';
  out << "n_discarded = " << report.n_discarded << '\n';
  out << "n_rejected = " << report.n_rejected << '\n';
  out << "discarded_ids = " << strings(report.discarded_ids) << "\n\n";

  out << "[calibration]\n";
  out << "seed = " << battle.master_seed << "\n\n";
  for (std::size_t m = 0; m < report.models.size(); ++m) {
    const CalibrationConfig& c = battle.calibration[m];
    out << "[calibration." << names[m] << "]\n";
    out << "learning_rate = " << toml_float(c.learning_rate) << '\n';
    out << "max_iters = " << c.max_iters << '\n';
    out << "adam_beta1 = " << toml_float(c.adam_beta1) << '\n';
    out << "adam_beta2 = " << toml_float(c.adam_beta2) << '\n';
    out << "adam_eps = " << toml_float(c.adam_eps) << '\n';
    out << "penalty_kappa = " << toml_float(c.penalty_kappa) << '\n';
    out << "early_stop_patience = " << c.early_stop_patience << '\n';
    out << "early_stop_rel_tol = " << toml_float(c.early_stop_rel_tol) << "\n\n";
  }
  const SolveConfig& solve = battle.calibration.front().solve;
  out << "[solver]\n";
  out << "steps = " << solve.steps << '\n';
  out << "max_state_magnitude = " << toml_float(solve.max_state_magnitude) << "\n\n";
  out << "[bootstrap]\n";
  out << "n_resamples = " << battle.bootstrap.n_resamples << '\n';
  out << "alpha = " << toml_float(battle.bootstrap.alpha) << '\n';
}

std::filesystem::path truth_sidecar_path(const std::filesystem::path& cohort_path) {
  return cohort_path.parent_path() / (cohort_path.stem().string() + "_truth.csv");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibrate and compare tumor growth models on lesion volume time series."};
  app.name(args.empty() ? "odegrow" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Calibrate one model to one lesion and report the holdout error");
  std::string fit_input;
  std::string fit_model;
  std::string fit_lesion;
  std::string fit_out;
  FitFlags fit_flags;
  fit_cmd->add_option("--input", fit_input, "cohort CSV")->required();
  fit_cmd->add_option("--model", fit_model, "model name: " + model_kind_list())->required();
  fit_cmd->add_option("--lesion", fit_lesion, "patient_id of the lesion")->required();
  fit_cmd->add_option("--out", fit_out, "also write the report to this file");
  fit_flags.attach(*fit_cmd);

  // battle
  auto* battle_cmd = app.add_subcommand("battle", "Fit models to every lesion and compare holdout errors");
  std::string battle_input;
  std::string battle_models = "all";
  std::string battle_out;
  std::optional<unsigned> battle_threads;
  std::optional<std::size_t> battle_resamples;
  std::optional<double> battle_alpha;
  FitFlags battle_flags;
  battle_cmd->add_option("--input", battle_input, "cohort CSV")->required();
  battle_cmd->add_option("--models", battle_models, "'all' or a comma-separated list")->capture_default_str();
  battle_cmd->add_option("--out-dir", battle_out, "directory for the CSV tables and manifest")->required();
  battle_cmd->add_option("--threads", battle_threads, "worker threads (default: ODEGROW_THREADS, then all cores)");
  battle_cmd->add_option("--resamples", battle_resamples, "bootstrap resamples");
  battle_cmd->add_option("--alpha", battle_alpha, "bootstrap significance level");
  battle_flags.attach(*battle_cmd);

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Draw measurements and fitted curves for one lesion as SVG");
  std::string plot_input;
  std::string plot_lesion;
  std::string plot_models = "all";
  std::string plot_out;
  FitFlags plot_flags;
  plot_cmd->add_option("--input", plot_input, "cohort CSV")->required();
  plot_cmd->add_option("--lesion", plot_lesion, "patient_id of the lesion")->required();
  plot_cmd->add_option("--models", plot_models, "'all' or a comma-separated list")->capture_default_str();
  plot_cmd->add_option("--out", plot_out, "output SVG path")->required();
  plot_flags.attach(*plot_cmd);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort and its ground-truth sidecar");
  std::string synth_model;
  std::string synth_out;
  std::vector<std::string> synth_ranges;
  SynthConfig synth;
  synth_cmd->add_option("--model", synth_model, "generator model name")->required();
  synth_cmd->add_option("--n", synth.n_lesions, "number of lesions")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise_sigma, "log-normal noise sigma")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--min-points", synth.min_points, "fewest measurements per lesion")->capture_default_str();
  synth_cmd->add_option("--max-points", synth.max_points, "most measurements per lesion")->capture_default_str();
  synth_cmd->add_option("--span-min", synth.span_days.low, "shortest observation span, days")->capture_default_str();
  synth_cmd->add_option("--span-max", synth.span_days.high, "longest observation span, days")->capture_default_str();
  synth_cmd->add_option("--range", synth_ranges, "parameter sampling interval, name=low:high (repeatable)");
  synth_cmd->add_option("--out", synth_out, "output cohort CSV")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) argv.push_back("odegrow");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    err << "Run with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_input, fit_model, fit_lesion, fit_out, fit_flags, out, err);
    if (battle_cmd->parsed()) {
      return cmd_battle(battle_input, battle_models, battle_out, battle_threads, battle_resamples, battle_alpha,
                        battle_flags, out);
    }
    if (plot_cmd->parsed()) return cmd_plot(plot_input, plot_lesion, plot_models, plot_out, plot_flags);
    if (synth_cmd->parsed()) {
      synth.generator_kind = parse_model(synth_model).kind();
      return cmd_synth(synth, synth_ranges, synth_out, out);
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "IoError: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace odegrow::cli
