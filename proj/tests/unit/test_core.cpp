#include <cmath>
#include <limits>

#include "doctest.h"
#include "odegrow/core.hpp"

using namespace odegrow;

namespace {

template <class F>
LesionError lesion_error(F&& f) {
  try {
    f();
  } catch (const LesionError& e) {
    return e;
  }
  FAIL("expected LesionError");
  return LesionError(ErrorCode::EmptyInput, 0, "");
}

}  // namespace

TEST_CASE("validate_lesion accepts a well-formed series") {
  const Lesion lesion = validate_lesion("a", {0, 7, 14}, {1.0, 0.9, 0.8});
  CHECK(lesion.id() == "a");
  CHECK(lesion.size() == 3);
  CHECK(lesion.volumes()[2] == 0.8);
}

TEST_CASE("validate_lesion reports the offending index") {
  auto dup = lesion_error([] { (void)validate_lesion("a", {0, 7, 7}, {1, 1, 1}); });
  CHECK(dup.code() == ErrorCode::NonMonotoneTimes);
  CHECK(dup.index() == 2);

  auto zero = lesion_error([] { (void)validate_lesion("a", {0, 7}, {1.0, 0.0}); });
  CHECK(zero.code() == ErrorCode::NonPositiveVolume);
  CHECK(zero.index() == 1);

  auto nan = lesion_error([] { (void)validate_lesion("a", {0, 1, 2}, {1.0, std::nan(""), 2.0}); });
  CHECK(nan.code() == ErrorCode::NonPositiveVolume);

  CHECK(lesion_error([] { (void)validate_lesion("a", {0, 1}, {1.0}); }).code() == ErrorCode::LengthMismatch);
  CHECK(lesion_error([] { (void)validate_lesion("a", {0}, {1.0}); }).code() == ErrorCode::TooFewPoints);
  CHECK(lesion_error([] { (void)validate_lesion("a", {0, 3, 2}, {1, 1, 1}); }).index() == 2);
}

TEST_CASE("parameter counts") {
  const std::size_t expected[] = {2, 3, 3, 3, 4, 5, 12, 14};
  for (std::size_t i = 0; i < kAllModelKinds.size(); ++i) {
    const auto spec = ModelSpec::of(kAllModelKinds[i]);
    CAPTURE(to_string(spec.kind()));
    CHECK(spec.parameter_count() == expected[i]);
    CHECK(spec.parameter_names().size() == expected[i]);
  }
}

TEST_CASE("model specs") {
  CHECK(ModelSpec::of(ModelKind::Logistic).lambda_fixed() == -1.0);
  CHECK(ModelSpec::of(ModelKind::ClassicalBertalanffy).lambda_fixed() == 1.0 / 3.0);
  CHECK(ModelSpec::of(ModelKind::ClassicalGompertz).lambda_fixed() == 0.0);
  CHECK_FALSE(ModelSpec::of(ModelKind::GeneralBertalanffy).lambda_fixed().has_value());
  CHECK(ModelSpec::of(ModelKind::Neural1D).mlp_shape() == MlpShape{1, 3, 1});
  CHECK(ModelSpec::of(ModelKind::Neural2D).mlp_shape() == MlpShape{2, 2, 2});
  CHECK(ModelSpec::of(ModelKind::Bertalanffy2D).state_dim() == 2);
  CHECK(ModelSpec::of(ModelKind::Neural2D).state_dim() == 2);
  CHECK(ModelSpec::of(ModelKind::GeneralBertalanffy).state_dim() == 1);
  CHECK_FALSE(ModelSpec::of(ModelKind::Exponential).has_v_inf());
}

TEST_CASE("model names round trip") {
  for (ModelKind kind : kAllModelKinds) {
    CHECK(parse_model_kind(to_string(kind)) == kind);
    CHECK(model_kind_list().find(to_string(kind)) != std::string::npos);
  }
  CHECK_FALSE(parse_model_kind("gompertz2").has_value());
}

TEST_CASE("ParamVector enforces open bounds") {
  const auto spec = ModelSpec::of(ModelKind::GeneralBertalanffy);
  const auto p = ParamVector::for_spec(spec, {1.0, 2.0, 0.1, 0.3});
  CHECK(p.size() == 4);
  CHECK(p.names()[param::kLambda] == "lambda");
  CHECK_THROWS_AS((void)ParamVector::for_spec(spec, {1.0, 2.0, 0.1, 5.0}), Error);
  CHECK_THROWS_AS((void)ParamVector::for_spec(spec, {0.0, 2.0, 0.1, 0.3}), Error);
  CHECK_THROWS_AS((void)ParamVector::for_spec(spec, {1.0, 2.0, 0.1}), Error);
  CHECK_THROWS_AS((void)p.with_values({1.0, -2.0, 0.1, 0.3}), Error);
  CHECK(p.with_values({1.5, 2.0, 0.1, 0.3})[0] == 1.5);
  CHECK_THROWS_AS(ParamVector({"a"}, {1.0}, {2.0}, {1.0}), Error);
  CHECK_NOTHROW(ParamVector({"a"}, {1.0}, {-std::numeric_limits<double>::infinity()},
                            {std::numeric_limits<double>::infinity()}));
}
