#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "odegrow/evaluate.hpp"
#include "odegrow/models.hpp"

using namespace odegrow;

namespace {

Lesion points(std::size_t n) {
  std::vector<double> t(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = 10.0 * static_cast<double>(i);
    v[i] = bertalanffy_solution(t[i], 1.0, 2.5, 0.03, 0.3);
  }
  return validate_lesion("L" + std::to_string(n), std::move(t), std::move(v));
}

FitResult scored(std::vector<double> predictions, double scale = 1.0) {
  FitResult r;
  r.status = FitStatus::Converged;
  r.volume_scale = scale;
  r.holdout_predictions = std::move(predictions);
  return r;
}

}  // namespace

TEST_CASE("split_holdout") {
  const auto six = split_holdout(points(6));
  CHECK(six.calibration.size() == 4);
  CHECK(six.holdout.times == std::vector<double>{40.0, 50.0});
  CHECK(six.calibration.id() == "L6");
  CHECK(split_holdout(points(9)).calibration.size() == 7);
  try {
    (void)split_holdout(points(5));
    FAIL("expected TooFewMeasurements");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewMeasurements);
  }
}

TEST_CASE("holdout_mae") {
  const HoldoutPoints h{{1, 2}, {1.0, 2.0}};
  CHECK(holdout_mae(scored({1.0, 2.0}), h) == 0.0);
  CHECK(holdout_mae(scored({1.01, 1.97}), h) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(holdout_mae(scored({1.2, 1.6}, 2.0), h) == doctest::Approx(0.15).epsilon(1e-12));
  FitResult diverged = scored({1.0, 2.0});
  diverged.status = FitStatus::Diverged;
  CHECK_THROWS_AS((void)holdout_mae(diverged, h), Error);
  CHECK_THROWS_AS((void)holdout_mae(scored({}), h), Error);
}

TEST_CASE("bootstrap degenerate inputs") {
  const std::vector<double> zeros(30, 0.0);
  const Interval z = bootstrap_ci(zeros);
  CHECK(z.low == 0.0);
  CHECK(z.high == 0.0);
  CHECK(verdict_for(z) == Verdict::Draw);

  const std::vector<double> ones(30, 1.0);
  const Interval o = bootstrap_ci(ones);
  CHECK(o.low == 1.0);
  CHECK(o.high == 1.0);
  CHECK(verdict_for(o) == Verdict::WinB);
  CHECK(verdict_for({-2.0, -1.0}) == Verdict::WinA);
  CHECK(verdict_for({-1.0, 0.0}) == Verdict::Draw);

  CHECK_THROWS_AS((void)bootstrap_ci(std::vector<double>{}), Error);
  CHECK_THROWS_AS((void)bootstrap_ci(ones, 2000, 1.5), Error);
}

TEST_CASE("bootstrap is seeded") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.1, 1.0);
  std::vector<double> d(50);
  for (double& x : d) x = n(rng);
  const Interval a = bootstrap_ci(d, 500, 0.05, 9);
  const Interval b = bootstrap_ci(d, 500, 0.05, 9);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.low < a.high);
}

TEST_CASE("derive_seed depends on lesion and model only") {
  const auto s = derive_seed(7, "P1", ModelKind::Logistic);
  CHECK(s == derive_seed(7, "P1", ModelKind::Logistic));
  CHECK(s != derive_seed(7, "P2", ModelKind::Logistic));
  CHECK(s != derive_seed(7, "P1", ModelKind::ClassicalGompertz));
  CHECK(s != derive_seed(8, "P1", ModelKind::Logistic));
}

TEST_CASE("pairwise matchups are antisymmetric") {
  const std::vector<ModelSpec> models{ModelSpec::of(ModelKind::Exponential), ModelSpec::of(ModelKind::Logistic),
                                      ModelSpec::of(ModelKind::ClassicalGompertz)};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  std::vector<std::vector<double>> errors(40);
  for (auto& row : errors) row = {u(rng) + 0.05, u(rng), u(rng)};
  const auto m = compare_models(errors, models, {}, 3);
  REQUIRE(m.size() == 9);
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(m[a * 3 + a].verdict == Verdict::Draw);
    for (std::size_t b = 0; b < 3; ++b) {
      CHECK(m[a * 3 + b].interval.low == -m[b * 3 + a].interval.high);
      CHECK(m[a * 3 + b].interval.high == -m[b * 3 + a].interval.low);
    }
  }
  CHECK(m[0 * 3 + 1].verdict == Verdict::WinB);
  CHECK(m[1 * 3 + 0].verdict == Verdict::WinA);
}

TEST_CASE("one lesion with identical errors is a draw everywhere") {
  const std::vector<ModelSpec> models{ModelSpec::of(ModelKind::Logistic), ModelSpec::of(ModelKind::ClassicalGompertz)};
  const auto m = compare_models({{0.02, 0.02}}, models, {}, 0);
  for (const auto& x : m) CHECK(x.verdict == Verdict::Draw);
}

TEST_CASE("battle on a small cohort") {
  const std::vector<Lesion> cohort{points(8), points(7), points(5)};
  const std::vector<ModelSpec> specs{ModelSpec::of(ModelKind::Exponential),
                                     ModelSpec::of(ModelKind::GeneralBertalanffy)};
  auto config = default_battle_config(specs);
  config.master_seed = 2;
  const BattleReport r = battle(cohort, specs, config);
  CHECK(r.n_rejected == 1);
  CHECK(r.n_discarded == 0);
  CHECK(r.n_lesions_used == 2);
  CHECK(r.lesion_ids == std::vector<std::string>{"L8", "L7"});
  CHECK(r.per_lesion_errors.size() == 2);
  CHECK(r.mean_abs_error[1] < r.mean_abs_error[0]);
  CHECK(r.ranking() == std::vector<std::size_t>{1, 0});

  config.threads = 3;
  const BattleReport threaded = battle(cohort, specs, config);
  CHECK(threaded.per_lesion_errors == r.per_lesion_errors);
}

TEST_CASE("battle with every lesion diverging") {
  const std::vector<Lesion> cohort{
      validate_lesion("x1", {0, 1, 2, 3, 4, 5}, {1e-300, 1.0, 1e300, 1e-300, 1.0, 1.0}),
      validate_lesion("x2", {0, 1, 2, 3, 4, 5}, {1e300, 1e-300, 1.0, 1e300, 1.0, 1.0})};
  const std::vector<ModelSpec> specs{ModelSpec::of(ModelKind::Exponential), ModelSpec::of(ModelKind::Logistic)};
  try {
    (void)battle(cohort, specs, default_battle_config(specs));
    FAIL("expected NoUsableLesions");
  } catch (const NoUsableLesions& e) {
    CHECK(e.code() == ErrorCode::NoUsableLesions);
    CHECK(e.n_discarded() == 2);
    CHECK(e.n_rejected() == 0);
  }
}

TEST_CASE("battle needs two models") {
  const std::vector<Lesion> cohort{points(8)};
  const std::vector<ModelSpec> one{ModelSpec::of(ModelKind::Exponential)};
  CHECK_THROWS_AS((void)battle(cohort, one, default_battle_config(one)), Error);
}
