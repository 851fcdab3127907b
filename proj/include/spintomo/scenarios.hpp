#pragma once

// Scenario runner behind the command-line tool: config parsing with strict
// key checking, the five scenarios and their invariant gates.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spintomo/residuals.hpp"

namespace spintomo {

enum class ScenarioKind { AuditFrame, Precess, Wavepacket, Roundtrip, Residual };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& name);

/// Malformed configuration; line is 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::AuditFrame;
  std::uint64_t seed = 0;
  std::string output;

  PhaseSpaceGrid grid;

  struct Field {
    double charge = 1.0;
    double light_speed = 1.0;
    double kappa = 1.0;
    double mass = 1.0;
    double spin = 1.0;
    Eigen::Vector3d phi = Eigen::Vector3d::Zero();  // c0, c1, c2
    double vector_potential = 0.0;
    Vec3 magnetic_field = Vec3::Zero();
  } field;

  struct State {
    std::string kind = "product";  // or "random-mixed"
    Vec3 spin_direction = Vec3::UnitZ();
    double spin_projection = 1.0;
    GaussianPacket packet;
    int rank = 2;
  } state;

  struct Propagation {
    double dt = 1e-3;
    int n_steps = 1000;
    int record_every = 100;
    std::string scheme = "split-step-strang";
  } propagation;

  std::string representation = "wigner";

  struct Tomography {
    int n_theta = 128;
    int n_x = 0;
    std::vector<std::pair<double, double>> symplectic{{1.0, 0.0}, {0.8, 0.4}, {0.6, -0.7}};
  } tomography;

  struct Frame {
    std::string kind = "spin1";  // or "random"
    double spin = 1.0;
    std::optional<std::uint64_t> seed;
  } frame;

  struct Precession {
    double periods = 10.0;
    int samples_per_period = 200;
  } precession;

  struct Residual {
    std::vector<std::string> representations{"wigner", "husimi", "optical", "symplectic"};
    double dt = 0.05;
    int n_intervals = 4;
    int oracle_substeps = 4;
    int n_theta = 32;
    int levels = 2;
  } residual;

  bool write_fields = false;
  std::map<std::string, double> tolerances;

  /// Field configuration built from the constant parameters.
  EMFieldConfig field_config() const;
};

/// Defaults per scenario (grid, field and state choices that make the
/// scenario meaningful out of the box).
ScenarioConfig default_config(ScenarioKind kind);

/// Parses a JSON document over the defaults of `kind` (or of its own
/// "scenario" key).  Unknown keys, wrong types and non-finite numbers raise
/// ConfigError with the field path and source line.
ScenarioConfig parse_config(const std::string& text, std::optional<ScenarioKind> kind);

/// Default gate limits keyed by gate name.
const std::map<std::string, double>& default_tolerances();

struct Gate {
  std::string name;
  double measured = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=", ">=" or "in"
  double upper = 0.0;    // for "in"
  bool passed = false;
};

struct ScenarioResult {
  nlohmann::json report;
  std::vector<Gate> gates;
  int exit_code = 0;  // 0 all gates pass, 1 a gate failed
  std::string first_failed;
};

/// Runs the scenario, writing report.json and CSV tables into `out`.
/// tolerance_scale multiplies every "<=" limit and the slack of ">=" limits.
ScenarioResult run(const ScenarioConfig& config, const std::filesystem::path& out,
                   double tolerance_scale = 1.0);

}  // namespace spintomo
