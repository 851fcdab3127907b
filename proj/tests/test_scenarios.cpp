#include <doctest.h>

#include "spintomo/scenarios.hpp"

using namespace spintomo;
namespace fs = std::filesystem;

namespace {

ConfigError parse_error(const std::string& text, std::optional<ScenarioKind> kind = std::nullopt) {
  try {
    parse_config(text, kind);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("no ConfigError for: " << text);
  return ConfigError("", 0, "");
}

}  // namespace

TEST_CASE("scenario names") {
  for (auto k : {ScenarioKind::AuditFrame, ScenarioKind::Precess, ScenarioKind::Wavepacket,
                 ScenarioKind::Roundtrip, ScenarioKind::Residual})
    CHECK(scenario_from_string(to_string(k)) == k);
}

TEST_CASE("configs override defaults") {
  const ScenarioConfig c = parse_config(R"({
    "scenario": "wavepacket",
    "seed": 17,
    "grid": {"n": 128},
    "field": {"magnetic_field": [0, 0.2, 0], "kappa": 2},
    "propagation": {"dt": 0.002, "n_steps": 10, "record_every": 5}
  })", std::nullopt);
  CHECK(c.scenario == ScenarioKind::Wavepacket);
  CHECK(c.seed == 17);
  CHECK(c.grid.n == 128);
  CHECK(c.field.kappa == 2.0);
  CHECK(c.field.magnetic_field.y() == 0.2);
  CHECK(c.field.phi.z() == 1.0);  // wavepacket default oscillator stays
  CHECK(c.propagation.n_steps == 10);
}

TEST_CASE("unknown keys are rejected with their path and line") {
  const ConfigError e = parse_error("{\n  \"field\": {\n    \"kapa\": 1.0\n  }\n}", ScenarioKind::Precess);
  CHECK(e.field() == "field.kapa");
  CHECK(e.line() == 3);
  const ConfigError top = parse_error("{\"seeds\": 3}", ScenarioKind::Precess);
  CHECK(top.field() == "seeds");
  const ConfigError tol = parse_error("{\"tolerances\": {\"dualty\": 1e-3}}", ScenarioKind::AuditFrame);
  CHECK(tol.field() == "tolerances.dualty");
}

TEST_CASE("type, range and syntax errors") {
  CHECK(parse_error("{\"grid\": {\"n\": \"big\"}}", ScenarioKind::Roundtrip).field() == "grid.n");
  CHECK(parse_error("{\"grid\": {\"n\": 100}}", ScenarioKind::Roundtrip).field() == "grid");
  CHECK(parse_error("{\"field\": {\"mass\": -1}}", ScenarioKind::Precess).field() == "field");
  CHECK(parse_error("{\"representation\": \"glauber\"}", ScenarioKind::Roundtrip).field() ==
        "representation");
  CHECK(parse_error("{\"propagation\": {\"scheme\": \"euler\"}}", ScenarioKind::Wavepacket).field() ==
        "propagation.scheme");
  CHECK(parse_error("{\"propagation\": {\"scheme\": \"wigner-spectral\"}}", ScenarioKind::Wavepacket)
            .field() == "propagation.scheme");
  CHECK(parse_error("{\"propagation\": {\"dt\": -1}}", ScenarioKind::Wavepacket).field() ==
        "propagation");
  const ConfigError syntax = parse_error("{\n\"seed\": 1,\n\"grid\": {\"n\": 64,}\n}", ScenarioKind::Precess);
  CHECK(syntax.line() == 3);
  CHECK(parse_error("{\"scenario\": \"precess\"}", ScenarioKind::Residual).field() == "scenario");
  CHECK(parse_error("{}").field() == "scenario");
}

TEST_CASE("audit-frame run writes a report and honours the tolerance scale") {
  const fs::path out = fs::temp_directory_path() / "spintomo_scenario_test";
  fs::remove_all(out);
  const ScenarioConfig c = default_config(ScenarioKind::AuditFrame);
  const ScenarioResult ok = run(c, out);
  CHECK(ok.exit_code == 0);
  CHECK(ok.report["passed"] == true);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "quantizer_diff.csv"));
  CHECK(fs::exists(out / "frame.json"));

  const ScenarioResult strict = run(c, out, 1e-6);
  CHECK(strict.exit_code == 1);
  CHECK(strict.first_failed == "duality");
  CHECK(strict.report["first_failed_gate"] == "duality");
  CHECK_THROWS(run(c, out, 0.0));
}

TEST_CASE("random frames for other spins are audited") {
  ScenarioConfig c = parse_config(R"({"frame": {"kind": "random", "spin": 1.5, "seed": 4}})",
                                  ScenarioKind::AuditFrame);
  const ScenarioResult r = run(c, fs::temp_directory_path() / "spintomo_scenario_random");
  CHECK(r.exit_code == 0);
  CHECK(r.report["measurements"]["spin"] == 1.5);
}
