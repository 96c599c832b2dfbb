#include <doctest.h>

#include <cmath>

#include "jumpflux/config.hpp"

using namespace jumpflux;
using json = nlohmann::ordered_json;

TEST_CASE("defaults resolve") {
  const RunConfig rc = resolve_config(json::object());
  CHECK(rc.spec.preset.id == "alternating_exponential");
  CHECK(rc.spec.preset.covariance.smoothness == 0.5);
  CHECK(rc.spec.levels == std::vector<int>{64, 128, 256, 512});
  CHECK(rc.resolved["randfield"]["variance"] == 1.0);
  CHECK(rc.sweep_values.size() == 3);
}

TEST_CASE("preset-dependent defaults and explicit values") {
  const RunConfig rc = resolve_config(json::parse(R"({"jumpfield": {"preset": "poisson_sqexp"},
                                                       "randfield": {"correlation_length": 0.05}})"));
  CHECK(std::isinf(rc.spec.preset.covariance.smoothness));
  CHECK(rc.spec.preset.covariance.variance == 0.1);
  CHECK(rc.spec.preset.covariance.correlation_length == 0.05);
  CHECK(rc.resolved["randfield"]["smoothness"] == "inf");

  const RunConfig two = resolve_config(json::parse(R"({"jumpfield": {"preset": "two_level", "outer": 10.5, "inner": 20}})"));
  CHECK(two.spec.preset.outer == 10.5);
  CHECK(two.spec.preset.inner == 20.0);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(resolve_config(json::parse(R"({"solver": {"cfll": 0.5}})")), std::invalid_argument);
  CHECK_THROWS_AS(resolve_config(json::parse(R"({"sovler": {}})")), std::invalid_argument);
  CHECK_THROWS(resolve_config(json::parse(R"({"mesh": {"levels": [128, 64]}})")));
  CHECK_THROWS(resolve_config(json::parse(R"({"mesh": {"reference_factor": 2}})")));
  CHECK_THROWS(resolve_config(json::parse(R"({"jumpfield": {"preset": "unknown"}})")));
  CHECK_THROWS(resolve_config(json::parse(R"({"solver": {"cfl": "fast"}})")));
  CHECK_THROWS(resolve_config(json::parse(R"({"entropy": {"test_functions": [{"id": "a", "radius": 1}]}})")));
}

TEST_CASE("overrides") {
  const RunConfig rc = resolve_config(json::object(), {"mesh.levels=[32,64]", "experiment.id=abc",
                                                       "randfield.smoothness=inf", "sampling.seed=42"});
  CHECK(rc.spec.levels == std::vector<int>{32, 64});
  CHECK(rc.experiment_id == "abc");
  CHECK(std::isinf(rc.spec.preset.covariance.smoothness));
  CHECK(rc.spec.seed == 42);
  CHECK_THROWS(resolve_config(json::object(), {"mesh.nope=1"}));
  CHECK_THROWS(resolve_config(json::object(), {"novalue"}));
}

TEST_CASE("missing config file names the path") {
  try {
    load_config("/definitely/missing.json");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/definitely/missing.json") != std::string::npos);
  }
}
