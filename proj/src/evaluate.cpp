#include "odegrow/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace odegrow {

HoldoutSplit split_holdout(const Lesion& lesion) {
  if (lesion.size() < kMinMeasurements) {
    throw Error(ErrorCode::TooFewMeasurements, "lesion '" + lesion.id() + "' has " + std::to_string(lesion.size()) +
                                                   " measurements; at least " + std::to_string(kMinMeasurements) +
                                                   " are required");
  }
  const std::size_t n_cal = lesion.size() - kHoldoutSize;
  const auto t = lesion.times();
  const auto v = lesion.volumes();
  HoldoutSplit split{
      Lesion::validate(lesion.id(), {t.begin(), t.begin() + static_cast<std::ptrdiff_t>(n_cal)},
                       {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_cal)}),
      HoldoutPoints{{t.begin() + static_cast<std::ptrdiff_t>(n_cal), t.end()},
                    {v.begin() + static_cast<std::ptrdiff_t>(n_cal), v.end()}},
  };
  return split;
}

double holdout_mae(const FitResult& fit, const HoldoutPoints& holdout) {
  if (fit.status == FitStatus::Diverged) throw Error(ErrorCode::Diverged, "cannot score a diverged fit");
  if (fit.holdout_predictions.size() != holdout.volumes.size() || holdout.volumes.empty()) {
    throw Error(ErrorCode::Diverged, "fit has no predictions for these holdout points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < holdout.volumes.size(); ++i) {
    total += std::abs(fit.holdout_predictions[i] - holdout.volumes[i]) / fit.volume_scale;
  }
  return total / static_cast<double>(holdout.volumes.size());
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Interval bootstrap_ci(std::span<const double> differences, std::size_t n_resamples, double alpha,
                      std::uint64_t seed) {
  if (differences.empty()) throw Error(ErrorCode::EmptyInput, "bootstrap needs at least one difference");
  if (n_resamples < 1) throw Error(ErrorCode::InvalidConfig, "bootstrap needs at least one resample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1)");
  const std::size_t n = differences.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(n_resamples);
  for (double& mean : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += differences[pick(rng)];
    mean = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  return {quantile_sorted(means, alpha / 2.0), quantile_sorted(means, 1.0 - alpha / 2.0)};
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::WinA: return "winA";
    case Verdict::WinB: return "winB";
    case Verdict::Draw: return "draw";
  }
  return "draw";
}

Verdict verdict_for(const Interval& interval) noexcept {
  if (interval.high < 0.0) return Verdict::WinA;
  if (interval.low > 0.0) return Verdict::WinB;
  return Verdict::Draw;
}

BattleConfig default_battle_config(std::span<const ModelSpec> specs) {
  BattleConfig config;
  for (const auto& spec : specs) config.calibration.push_back(CalibrationConfig::defaults_for(spec.kind()));
  return config;
}

std::vector<std::size_t> BattleReport::ranking() const {
  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean_abs_error[a] < mean_abs_error[b]; });
  return order;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view lesion_id, ModelKind kind) noexcept {
  return splitmix64(splitmix64(master_seed ^ fnv1a(lesion_id)) + static_cast<std::uint64_t>(kind));
}

std::vector<Matchup> compare_models(const std::vector<std::vector<double>>& per_lesion_errors,
                                    std::span<const ModelSpec> models, const BootstrapConfig& config,
                                    std::uint64_t master_seed) {
  const std::size_t k = models.size();
  std::vector<Matchup> out(k * k);
  std::vector<double> diff(per_lesion_errors.size());
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      for (std::size_t l = 0; l < per_lesion_errors.size(); ++l) {
        diff[l] = per_lesion_errors[l][a] - per_lesion_errors[l][b];
      }
      const std::uint64_t seed = splitmix64(splitmix64(master_seed ^ 0x626f6f74ULL) +
                                            static_cast<std::uint64_t>(models[a].kind()) * 16 +
                                            static_cast<std::uint64_t>(models[b].kind()));
      const Interval ci = bootstrap_ci(diff, config.n_resamples, config.alpha, seed);
      out[a * k + b] = {ci, verdict_for(ci)};
      const Interval mirrored{-ci.high, -ci.low};
      out[b * k + a] = {mirrored, verdict_for(mirrored)};
    }
  }
  return out;
}

NoUsableLesions::NoUsableLesions(std::size_t rejected, std::size_t discarded)
    : Error(ErrorCode::NoUsableLesions, std::to_string(rejected) + " lesions rejected for too few measurements, " +
                                            std::to_string(discarded) + " discarded after divergence"),
      rejected_(rejected),
      discarded_(discarded) {}

BattleReport battle(std::span<const Lesion> cohort, std::span<const ModelSpec> specs, const BattleConfig& config) {
  if (specs.size() < 2) throw Error(ErrorCode::InvalidConfig, "at least two models required");
  if (config.calibration.size() != specs.size()) {
    throw Error(ErrorCode::InvalidConfig, "one calibration config per model required");
  }
  for (std::size_t a = 0; a < specs.size(); ++a) {
    config.calibration[a].validate();
    for (std::size_t b = a + 1; b < specs.size(); ++b) {
      if (specs[a].kind() == specs[b].kind()) {
        throw Error(ErrorCode::InvalidConfig, "model '" + std::string(to_string(specs[a].kind())) + "' listed twice");
      }
    }
  }

  BattleReport report;
  report.models.assign(specs.begin(), specs.end());
  std::vector<HoldoutSplit> admitted;
  for (const auto& lesion : cohort) {
    try {
      admitted.push_back(split_holdout(lesion));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewMeasurements) throw;
      ++report.n_rejected;
    }
  }

  const std::size_t n_models = specs.size();
  const std::size_t n_tasks = admitted.size() * n_models;
  std::vector<double> errors(n_tasks, 0.0);
  std::vector<char> diverged(n_tasks, 0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        const auto& split = admitted[task / n_models];
        const std::size_t m = task % n_models;
        CalibrationConfig cfg = config.calibration[m];
        cfg.seed = derive_seed(config.master_seed, split.calibration.id(), specs[m].kind());
        const FitResult result = fit(specs[m], split.calibration, cfg, split.holdout);
        if (result.status == FitStatus::Diverged) {
          diverged[task] = 1;
        } else {
          errors[task] = holdout_mae(result, split.holdout);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_tasks)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t l = 0; l < admitted.size(); ++l) {
    bool any = false;
    for (std::size_t m = 0; m < n_models; ++m) any = any || diverged[l * n_models + m];
    if (any) {
      ++report.n_discarded;
      report.discarded_ids.push_back(admitted[l].calibration.id());
      continue;
    }
    report.lesion_ids.push_back(admitted[l].calibration.id());
    report.per_lesion_errors.emplace_back(errors.begin() + static_cast<std::ptrdiff_t>(l * n_models),
                                          errors.begin() + static_cast<std::ptrdiff_t>((l + 1) * n_models));
  }
  report.n_lesions_used = report.lesion_ids.size();
  if (report.n_lesions_used == 0) throw NoUsableLesions(report.n_rejected, report.n_discarded);

  report.mean_abs_error.assign(n_models, 0.0);
  for (std::size_t m = 0; m < n_models; ++m) {
    double sum = 0.0;
    for (const auto& row : report.per_lesion_errors) sum += row[m];
    report.mean_abs_error[m] = sum / static_cast<double>(report.n_lesions_used);
  }
  report.pairwise = compare_models(report.per_lesion_errors, specs, config.bootstrap, config.master_seed);
  return report;
}

}  // namespace odegrow
