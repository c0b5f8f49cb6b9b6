#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "odegrow/data.hpp"
#include "odegrow/models.hpp"

using namespace odegrow;

TEST_CASE("read_cohort groups and sorts") {
  std::istringstream one("patient_id,time_days,volume\nA,0,1.0\nA,7,1.2\nA,14,1.5\n");
  const auto single = read_cohort(one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].size() == 3);

  std::istringstream mixed("patient_id,time_days,volume\nB,7,2.0\nA,3,1.0\nB,0,1.5\nA,0,0.5\nB,14,2.5\n");
  const auto cohort = read_cohort(mixed);
  REQUIRE(cohort.size() == 2);
  CHECK(cohort[0].id() == "B");
  CHECK(std::vector<double>(cohort[0].times().begin(), cohort[0].times().end()) == std::vector<double>{0, 7, 14});
  CHECK(std::vector<double>(cohort[0].volumes().begin(), cohort[0].volumes().end()) ==
        std::vector<double>{1.5, 2.0, 2.5});
  CHECK(cohort[1].id() == "A");
  CHECK(cohort[1].volumes()[0] == 0.5);
}

TEST_CASE("read_cohort reports the failing line") {
  std::istringstream in(
      "patient_id,time_days,volume\nA,0,1\nA,1,1\nA,2,1\nB,0,1\nB,1,1\nB,2,abc\n");
  try {
    (void)read_cohort(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  std::istringstream header("id,t,v\nA,0,1\n");
  CHECK_THROWS_AS((void)read_cohort(header), ParseError);
  std::istringstream columns("patient_id,time_days,volume\nA,0\n");
  CHECK_THROWS_AS((void)read_cohort(columns), ParseError);
}

TEST_CASE("read_cohort validates lesions") {
  std::istringstream dup("patient_id,time_days,volume\nA,0,1\nA,0,2\n");
  try {
    (void)read_cohort(dup);
    FAIL("expected LesionError");
  } catch (const LesionError& e) {
    CHECK(std::string(e.what()).find("'A'") != std::string::npos);
  }
  std::istringstream negative("patient_id,time_days,volume\nA,0,1\nA,1,-2\n");
  CHECK_THROWS_AS((void)read_cohort(negative), LesionError);
}

TEST_CASE("format_number round trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5, 6.02214076e23}) {
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(7.0) == "7");
}

TEST_CASE("synthetic cohorts") {
  SynthConfig config;
  config.generator_kind = ModelKind::ClassicalGompertz;
  config.n_lesions = 10;
  config.noise_sigma = 0.0;
  config.seed = 3;
  const auto a = generate_cohort(config);
  const auto b = generate_cohort(config);
  REQUIRE(a.lesions.size() == 10);
  CHECK(a.lesions == b.lesions);
  CHECK(a.truth.size() == 30);

  for (std::size_t l = 0; l < a.lesions.size(); ++l) {
    const Lesion& lesion = a.lesions[l];
    CHECK(lesion.times()[0] == 0.0);
    CHECK(lesion.size() >= 6);
    CHECK(lesion.size() <= 12);
    const double v0 = a.truth[3 * l].value;
    const double v_inf = a.truth[3 * l + 1].value;
    const double omega = a.truth[3 * l + 2].value;
    CHECK(a.truth[3 * l].patient_id == lesion.id());
    for (std::size_t i = 0; i < lesion.size(); ++i) {
      CHECK(lesion.volumes()[i] == bertalanffy_solution(lesion.times()[i], v0, v_inf, omega, 0.0));
    }
  }
}

TEST_CASE("mean number of points") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    SynthConfig config;
    config.seed = seed;
    const auto cohort = generate_cohort(config);
    double total = 0.0;
    for (const auto& l : cohort.lesions) total += static_cast<double>(l.size());
    const double mean = total / static_cast<double>(cohort.lesions.size());
    CAPTURE(seed);
    CHECK(mean >= 8.0);
    CHECK(mean <= 10.0);
  }
}

TEST_CASE("cohort files round trip") {
  SynthConfig config;
  config.n_lesions = 12;
  config.seed = 21;
  const auto cohort = generate_cohort(config);
  const auto dir = std::filesystem::temp_directory_path() / "odegrow_data_test";
  std::filesystem::create_directories(dir);
  save_cohort(dir / "c.csv", cohort.lesions);
  save_truth(dir / "c_truth.csv", cohort.truth);
  CHECK(load_cohort(dir / "c.csv") == cohort.lesions);
  CHECK_THROWS_AS((void)load_cohort(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);

  std::ostringstream truth;
  write_truth(truth, cohort.truth);
  CHECK(truth.str().rfind(std::string(kTruthHeader) + "\n", 0) == 0);
}

TEST_CASE("synth config validation") {
  SynthConfig config;
  config.noise_sigma = -0.1;
  CHECK_THROWS_AS(config.validate(), Error);
  config = {};
  config.min_points = 5;
  CHECK_THROWS_AS(config.validate(), Error);
  config = {};
  config.min_points = 9;
  config.max_points = 8;
  CHECK_THROWS_AS(config.validate(), Error);
  config = {};
  config.param_ranges["v0"] = {2.0, 1.0};
  CHECK_THROWS_AS(config.validate(), Error);
}
