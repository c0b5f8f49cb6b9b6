// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "odegrow/calibrate.hpp"
#include "odegrow/cli/app.hpp"
#include "odegrow/data.hpp"
#include "odegrow/evaluate.hpp"
#include "odegrow/models.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace odegrow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

const ModelKind kBertalanffyFamily[] = {ModelKind::Logistic, ModelKind::ClassicalBertalanffy,
                                        ModelKind::ClassicalGompertz, ModelKind::GeneralBertalanffy};

// Parameters and a 10-point grid drawn from the synthetic-cohort ranges.
struct Draw {
  std::vector<double> params;
  std::vector<double> times;
};

Draw draw_bertalanffy(const ModelSpec& spec, std::mt19937_64& rng) {
  auto u = [&](ParamRange r) { return std::uniform_real_distribution<double>(r.low, r.high)(rng); };
  Draw d;
  for (const auto& name : spec.parameter_names()) d.params.push_back(u(default_param_range(spec.kind(), name)));
  const double span = u({120.0, 480.0});
  for (int k = 0; k < 10; ++k) d.times.push_back(span * k / 9.0);
  return d;
}

double lambda_of(const ModelSpec& spec, std::span<const double> p) {
  return spec.lambda_fixed() ? *spec.lambda_fixed() : p[param::kLambda];
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::mt19937_64 rng(101);
  for (ModelKind kind : kBertalanffyFamily) {
    const auto spec = ModelSpec::of(kind);
    const auto system = make_system(spec);
    for (int i = 0; i < 50; ++i) {
      const Draw d = draw_bertalanffy(spec, rng);
      const auto& p = d.params;
      const auto states = integrate(*system, initial_state(spec, p), p, 0.0, d.times);
      for (std::size_t k = 0; k < d.times.size(); ++k) {
        const double exact =
            bertalanffy_solution(d.times[k], p[param::kV0], p[param::kVInf], p[param::kOmega], lambda_of(spec, p));
        worst = std::max(worst, rel_err(states[k][0], exact));
      }
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-6 && seconds < 10.0,
          "max rel err " + fmt("%.3g", worst) + " (< 1e-6), " + fmt("%.2f", seconds) + " s (< 10 s)"};
}

Outcome criterion2() {
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double x = 0.1 * k;
    worst = std::max(worst, std::abs(box_cox(x, 1e-8) - std::log(x)));
  }
  // Pinned models against GeneralBertalanffy with the pinned exponent.
  std::mt19937_64 rng(202);
  const auto gb = ModelSpec::of(ModelKind::GeneralBertalanffy);
  std::size_t mismatches = 0;
  std::size_t compared = 0;
  for (ModelKind kind : {ModelKind::Logistic, ModelKind::ClassicalBertalanffy, ModelKind::ClassicalGompertz}) {
    const auto spec = ModelSpec::of(kind);
    for (int i = 0; i < 50; ++i) {
      const Draw d = draw_bertalanffy(spec, rng);
      std::vector<double> general = d.params;
      general.push_back(*spec.lambda_fixed());
      const auto a = predict(spec, ParamVector::for_spec(spec, d.params), d.times);
      const auto b = predict(gb, ParamVector::for_spec(gb, general), d.times);
      const auto g = rhs(spec, OdeState(d.params[0]), ParamVector::for_spec(spec, d.params));
      const auto h = rhs(gb, OdeState(d.params[0]), ParamVector::for_spec(gb, general));
      ++compared;
      if (a != b || !(g == h)) ++mismatches;
    }
  }
  return {worst < 1e-7 && mismatches == 0,
          "max |B - ln x| " + fmt("%.3g", worst) + " (< 1e-7); " + std::to_string(mismatches) + "/" +
              std::to_string(compared) + " pinned-model mismatches"};
}

Outcome criterion3() {
  std::mt19937_64 rng(303);
  const auto gb = ModelSpec::of(ModelKind::GeneralBertalanffy);
  const auto b2 = ModelSpec::of(ModelKind::Bertalanffy2D);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Draw d = draw_bertalanffy(gb, rng);
    std::vector<double> p2 = d.params;
    p2.push_back(0.0);
    const auto a = predict(b2, ParamVector::for_spec(b2, p2), d.times);
    const auto b = predict(gb, ParamVector::for_spec(gb, d.params), d.times);
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, rel_err(a[k], b[k]));
  }
  return {worst < 1e-6, "max rel err " + fmt("%.3g", worst) + " (< 1e-6) over 50 draws"};
}

Outcome criterion4() {
  const auto start = std::chrono::steady_clock::now();
  // Calibration-scale lesion: times on [0, 1], maximum volume 1.
  const std::vector<double> t{0.0, 0.12, 0.3, 0.45, 0.7, 1.0};
  std::vector<double> v;
  const double wiggle[] = {1.02, 0.97, 1.03, 0.99, 1.01, 1.0};
  for (std::size_t i = 0; i < t.size(); ++i) v.push_back(bertalanffy_solution(t[i], 0.45, 1.1, 1.8, 0.3) * wiggle[i]);
  const double top = *std::max_element(v.begin(), v.end());
  for (double& x : v) x /= top;
  const Lesion lesion = validate_lesion("grad", t, v);

  std::mt19937_64 rng(404);
  double worst = 0.0;
  std::string worst_at = "none";
  std::size_t failures = 0;
  for (ModelKind kind : kAllModelKinds) {
    const auto spec = ModelSpec::of(kind);
    const double kappa = CalibrationConfig::defaults_for(kind).penalty_kappa;
    for (int i = 0; i < 10; ++i) {
      const auto p = testing::sample_params(spec, rng);
      const auto lg = loss_and_gradient(spec, p, lesion, kappa);
      if (!lg) {
        ++failures;
        continue;
      }
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(p[j]));
        auto plus = p;
        auto minus = p;
        plus[j] += h;
        minus[j] -= h;
        const double fd = (loss(spec, ParamVector::for_spec(spec, plus), lesion, kappa) -
                           loss(spec, ParamVector::for_spec(spec, minus), lesion, kappa)) /
                          (2.0 * h);
        const double g = lg->gradient[j];
        const double denom = std::max({std::abs(g), std::abs(fd), 1e-8});
        const double err = std::abs(g - fd) / denom;
        if (err > worst) {
          worst = err;
          worst_at = std::string(to_string(kind)) + "[" + std::to_string(j) + "]";
        }
      }
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {failures == 0 && worst < 1e-4 && seconds < 60.0,
          "max rel err " + fmt("%.3g", worst) + " at " + worst_at + " (< 1e-4), " + std::to_string(failures) +
              " non-finite evaluations, " + fmt("%.2f", seconds) + " s (< 60 s)"};
}

Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (ModelKind kind : {ModelKind::Exponential, ModelKind::ClassicalGompertz, ModelKind::GeneralBertalanffy}) {
    SynthConfig synth;
    synth.generator_kind = kind;
    synth.n_lesions = 20;
    synth.noise_sigma = 0.0;
    synth.seed = 505;
    synth.min_points = 10;
    synth.max_points = 12;
    synth.param_ranges = {{"v0", {0.5, 1.5}}, {"v_inf", {3.0, 6.0}}, {"omega", {0.01, 0.02}}, {"lambda", {0.2, 1.0}}};
    const auto cohort = generate_cohort(synth);
    const auto spec = ModelSpec::of(kind);
    const std::size_t np = spec.parameter_count();

    auto config = CalibrationConfig::defaults_for(kind);
    config.learning_rate = 1e-3;
    config.early_stop_patience = 20000;
    config.max_iters = 300000;

    std::size_t ok = 0;
    double worst_param = 0.0;
    double worst_mae = 0.0;
    for (std::size_t l = 0; l < cohort.lesions.size(); ++l) {
      const auto split = split_holdout(cohort.lesions[l]);
      config.seed = derive_seed(synth.seed, cohort.lesions[l].id(), kind);
      const FitResult r = fit(spec, split.calibration, config, split.holdout);
      double param_err = 1.0;
      double mae = 1.0;
      if (r.status != FitStatus::Diverged) {
        param_err = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
          param_err = std::max(param_err, rel_err(r.params[i], cohort.truth[l * np + i].value));
        }
        mae = holdout_mae(r, split.holdout);
      }
      worst_param = std::max(worst_param, param_err);
      worst_mae = std::max(worst_mae, mae);
      if (param_err < 0.01 && mae < 1e-4) ++ok;
    }
    pass = pass && ok == cohort.lesions.size();
    detail += std::string(to_string(kind)) + " " + std::to_string(ok) + "/20 (param " + fmt("%.2g", worst_param) +
              ", mae " + fmt("%.2g", worst_mae) + "); ";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {pass && seconds < 300.0, detail + fmt("%.1f", seconds) + " s (< 300 s)"};
}

Outcome criterion6() {
  const std::size_t expected[] = {2, 3, 3, 3, 4, 5, 12, 14};
  std::string counts;
  bool pass = true;
  for (std::size_t i = 0; i < kAllModelKinds.size(); ++i) {
    const std::size_t n = ModelSpec::of(kAllModelKinds[i]).parameter_count();
    pass = pass && n == expected[i];
    counts += (i ? "," : "") + std::to_string(n);
  }
  return {pass, "counts " + counts + " (expected 2,3,3,3,4,5,12,14)"};
}

Outcome criterion7() {
  const auto start = std::chrono::steady_clock::now();
  // Skewed differences: a shifted exponential with mean 0.01.
  constexpr double kMean = 0.01;
  std::mt19937_64 rng(707);
  std::exponential_distribution<double> draw(1.0 / 0.02);
  int covered = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> d(100);
    for (double& x : d) x = draw(rng) - 0.02 + kMean;
    const Interval ci = bootstrap_ci(d, 2000, 0.05, static_cast<std::uint64_t>(trial));
    if (ci.low <= kMean && kMean <= ci.high) ++covered;
  }
  const double rate = covered / 500.0;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {rate >= 0.93 && rate <= 0.97 && seconds < 60.0,
          "coverage " + fmt("%.3f", rate) + " (in [0.93, 0.97]), " + fmt("%.2f", seconds) + " s (< 60 s)"};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "odegrow");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

struct BattleRuns {
  fs::path dir;
  bool ok = false;
  double first_seconds = 0.0;
};

BattleRuns run_battles() {
  BattleRuns runs;
  runs.dir = fs::temp_directory_path() / "odegrow_acceptance";
  if (!runs.dir.empty()) fs::remove_all(runs.dir);
  fs::create_directories(runs.dir);
  const std::string cohort = (runs.dir / "cohort.csv").string();
  if (cli({"synth", "--model", "bertalanffy", "--n", "100", "--noise", "0.05", "--seed", "8", "--out", cohort}) != 0) {
    return runs;
  }
  const auto start = std::chrono::steady_clock::now();
  const int first = cli({"battle", "--input", cohort, "--models", "all", "--seed", "8", "--threads", "1", "--out-dir",
                         (runs.dir / "run1").string()});
  runs.first_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int second = cli({"battle", "--input", cohort, "--models", "all", "--seed", "8", "--threads", "2", "--out-dir",
                          (runs.dir / "run2").string()});
  runs.ok = first == 0 && second == 0;
  return runs;
}

Outcome criterion8(const BattleRuns& runs) {
  if (!runs.ok) return {false, "battle command failed"};
  const auto ranking = read_csv(runs.dir / "run1" / "ranking.csv");
  int gb_rank = -1;
  int exp_rank = -1;
  for (std::size_t r = 1; r < ranking.size(); ++r) {
    if (ranking[r][0] == "bertalanffy") gb_rank = static_cast<int>(r);
    if (ranking[r][0] == "exponential") exp_rank = static_cast<int>(r);
  }
  const auto matchups = read_csv(runs.dir / "run1" / "matchups.csv");
  std::string cell = "missing";
  for (const auto& row : matchups) {
    if (row.empty() || row[0] != "bertalanffy") continue;
    for (std::size_t c = 1; c < matchups[0].size() && c < row.size(); ++c) {
      if (matchups[0][c] == "exponential") cell = row[c];
    }
  }
  const std::string manifest = slurp(runs.dir / "run1" / "manifest.toml");
  const bool ranked = gb_rank > 0 && exp_rank > 0 && gb_rank < exp_rank;
  const bool significant = cell.rfind("winA ", 0) == 0;
  return {ranked && significant && runs.first_seconds < 600.0,
          "bertalanffy rank " + std::to_string(gb_rank) + ", exponential rank " + std::to_string(exp_rank) +
              "; bertalanffy vs exponential " + cell + "; " + fmt("%.0f", runs.first_seconds) +
              " s single-threaded (< 600 s)"};
}

Outcome criterion9(const BattleRuns& runs) {
  if (!runs.ok) return {false, "battle command failed"};
  bool same = true;
  for (const char* name : {"ranking.csv", "matchups.csv"}) {
    const std::string a = slurp(runs.dir / "run1" / name);
    same = same && !a.empty() && a == slurp(runs.dir / "run2" / name);
  }
  return {same, same ? "ranking.csv and matchups.csv bit-identical across reruns (1 and 2 threads)"
                     : "outputs differ between reruns"};
}

Outcome criterion10() {
  // Two points, second fitted exactly and the maximum; first off by 0.1 after normalization.
  const auto spec = ModelSpec::of(ModelKind::ClassicalGompertz);
  const auto params = ParamVector::for_spec(spec, {1.0, 2.0, 1.0});
  const double top = bertalanffy_solution(1.0, 1.0, 2.0, 1.0, 0.0);
  const Lesion lesion = validate_lesion("pen", {0.0, 1.0}, {1.0 - 0.1 * top, top});
  const double value = loss(spec, params, lesion, 0.8);
  const double direct = 0.01 * penalty_factor(1.0, 2.0, 0.8);
  const double err = std::max(std::abs(value - oracle::kPenalty), std::abs(direct - oracle::kPenalty));
  return {err < 1e-12, "penalized loss " + fmt("%.17g", value) + ", |err| " + fmt("%.2g", err) + " (< 1e-12)"};
}

}  // namespace

// Optional arguments select criteria by number; default is all ten.
int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  auto wanted = [&](int id) { return selected.empty() || std::find(selected.begin(), selected.end(), id) != selected.end(); };
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << ": " << name << ": " << o.detail
              << std::endl;
  };
  report(1, "analytic-numeric equivalence", criterion1);
  report(2, "Box-Cox continuity and specialization", criterion2);
  report(3, "Bertalanffy2D degeneration", criterion3);
  report(4, "gradient suite", criterion4);
  report(5, "parameter recovery", criterion5);
  report(6, "parameter counts", criterion6);
  report(7, "bootstrap coverage", criterion7);
  BattleRuns runs;
  try {
    if (wanted(8) || wanted(9)) runs = run_battles();
  } catch (const std::exception& e) {
    std::cerr << "battle: " << e.what() << '\n';
  }
  report(8, "battle direction", [&] { return criterion8(runs); });
  report(9, "determinism", [&] { return criterion9(runs); });
  report(10, "penalty arithmetic", criterion10);
  if (!runs.dir.empty()) fs::remove_all(runs.dir);
  std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
