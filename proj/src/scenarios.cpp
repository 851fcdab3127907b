#include "spintomo/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spintomo/io.hpp"

namespace spintomo {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::AuditFrame: return "audit-frame";
    case ScenarioKind::Precess: return "precess";
    case ScenarioKind::Wavepacket: return "wavepacket";
    case ScenarioKind::Roundtrip: return "roundtrip";
    case ScenarioKind::Residual: return "residual";
  }
  return "unknown";
}

ScenarioKind scenario_from_string(const std::string& name) {
  for (auto k : {ScenarioKind::AuditFrame, ScenarioKind::Precess, ScenarioKind::Wavepacket,
                 ScenarioKind::Roundtrip, ScenarioKind::Residual}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidArgument("unknown scenario '" + name + "'");
}

ConfigError::ConfigError(const std::string& field, int line, const std::string& message)
    : std::runtime_error(message), field_(field), line_(line) {}

EMFieldConfig ScenarioConfig::field_config() const {
  EMFieldConfig f = EMFieldConfig::constant(field.phi, field.vector_potential,
                                            field.magnetic_field, field.kappa, field.charge,
                                            field.mass);
  f.light_speed = field.light_speed;
  f.spin = Spin::from_value(field.spin);
  return f;
}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.scenario = kind;
  switch (kind) {
    case ScenarioKind::AuditFrame:
      break;
    case ScenarioKind::Precess:
      c.field.magnetic_field = Vec3(1.0, 0.0, 0.0);
      break;
    case ScenarioKind::Wavepacket:
      c.field.phi = Eigen::Vector3d(0.0, 0.0, 1.0);
      c.field.magnetic_field = Vec3(0.0, 0.0, 0.5);
      c.state.spin_direction = Vec3::UnitX();
      c.state.packet = {1.0, 0.5, 1.0};
      c.propagation = {2.0 * M_PI / 32768.0, 32768, 4096, "split-step-strang"};
      break;
    case ScenarioKind::Roundtrip:
      c.state.spin_direction = Vec3(1.0, 1.0, 0.0);
      c.state.packet = {0.5, -0.3, 1.0};
      break;
    case ScenarioKind::Residual:
      c.field.phi = Eigen::Vector3d(0.0, 0.0, 1.0);
      c.field.magnetic_field = Vec3(0.3, 0.0, 0.7);
      c.state.spin_direction = Vec3::UnitX();
      c.state.packet = {1.0, 0.5, 1.0};
      break;
  }
  return c;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"duality", 1e-12},
      {"completeness", 1e-12},
      {"quantizer_hermiticity", 1e-12},
      {"projector", 1e-12},
      {"quantizer_unit_vectors", 1e-12},
      {"spin_vs_oracle", 1e-8},
      {"larmor_relative", 1e-6},
      {"normalization", 1e-8},
      {"conservation_vector", 1e-12},
      {"trace", 1e-10},
      {"hermiticity", 1e-12},
      {"energy_relative", 1e-8},
      {"wigner_vs_oracle", 1e-5},
      {"realness", 1e-12},
      {"nonnegativity", 1e-9},
      {"roundtrip_wigner", 1e-10},
      {"fidelity", 0.999},
      {"static_residual", 1e-12},
      {"ratio_min", 3.0},
      {"ratio_max", 5.0},
  };
  return t;
}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    const std::string key = path.substr(path.find_last_of('.') + 1);
    throw ConfigError(path, line_of(key), message);
  }

  int line_of(const std::string& key) const {
    const auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + pos, '\n'));
  }

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path, "'" + path + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                  [&](const char* a) { return key == a; });
      if (!ok) fail(join(path, key), "unknown key '" + join(path, key) + "'");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_number()) fail(join(path, key), "'" + join(path, key) + "' must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(join(path, key), "'" + join(path, key) + "' must be finite");
  }

  void integer(const json& obj, const std::string& path, const char* key, int& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_number_integer()) fail(join(path, key), "'" + join(path, key) + "' must be an integer");
    out = v.get<int>();
  }

  void unsigned64(const json& obj, const std::string& path, const char* key,
                  std::uint64_t& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_number_unsigned()) {
      fail(join(path, key), "'" + join(path, key) + "' must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_string()) fail(join(path, key), "'" + join(path, key) + "' must be a string");
    out = v.get<std::string>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_boolean()) fail(join(path, key), "'" + join(path, key) + "' must be true or false");
    out = v.get<bool>();
  }

  void vec3(const json& obj, const std::string& path, const char* key, Eigen::Vector3d& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    const std::string p = join(path, key);
    if (!v.is_array() || v.size() != 3) fail(p, "'" + p + "' must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(p, "'" + p + "' must contain finite numbers");
      }
      out(i) = v[i].get<double>();
    }
  }

 private:
  const std::string& text_;
};

void parse_into(ScenarioConfig& c, const json& doc, const Reader& r) {
  r.keys(doc, "", {"scenario", "seed", "output", "grid", "field", "state", "propagation",
                   "representation", "tomography", "frame", "precession", "residual",
                   "tolerances", "write_fields"});
  r.unsigned64(doc, "", "seed", c.seed);
  r.string(doc, "", "output", c.output);
  r.boolean(doc, "", "write_fields", c.write_fields);
  if (doc.contains("representation")) {
    r.string(doc, "", "representation", c.representation);
    try {
      representation_from_string(c.representation);
    } catch (const InvalidArgument& e) {
      r.fail("representation", e.what());
    }
  }
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    r.keys(g, "grid", {"n", "q_min", "q_max", "hbar", "mass", "omega"});
    r.integer(g, "grid", "n", c.grid.n);
    r.number(g, "grid", "q_min", c.grid.q_min);
    r.number(g, "grid", "q_max", c.grid.q_max);
    r.number(g, "grid", "hbar", c.grid.hbar);
    r.number(g, "grid", "mass", c.grid.mass);
    r.number(g, "grid", "omega", c.grid.omega);
    try {
      c.grid.validate();
    } catch (const std::exception& e) {
      r.fail("grid", e.what());
    }
  }
  if (doc.contains("field")) {
    const json& f = doc["field"];
    r.keys(f, "field", {"charge", "light_speed", "kappa", "mass", "spin", "phi",
                        "vector_potential", "magnetic_field"});
    r.number(f, "field", "charge", c.field.charge);
    r.number(f, "field", "light_speed", c.field.light_speed);
    r.number(f, "field", "kappa", c.field.kappa);
    r.number(f, "field", "mass", c.field.mass);
    r.number(f, "field", "spin", c.field.spin);
    r.vec3(f, "field", "phi", c.field.phi);
    r.number(f, "field", "vector_potential", c.field.vector_potential);
    r.vec3(f, "field", "magnetic_field", c.field.magnetic_field);
    try {
      c.field_config().validate();
    } catch (const std::exception& e) {
      r.fail("field", e.what());
    }
  }
  if (doc.contains("state")) {
    const json& s = doc["state"];
    r.keys(s, "state", {"kind", "spin_direction", "spin_projection", "q0", "p0", "width", "rank"});
    r.string(s, "state", "kind", c.state.kind);
    if (c.state.kind != "product" && c.state.kind != "random-mixed") {
      r.fail("state.kind", "'state.kind' must be \"product\" or \"random-mixed\"");
    }
    r.vec3(s, "state", "spin_direction", c.state.spin_direction);
    if (c.state.spin_direction.norm() == 0.0) {
      r.fail("state.spin_direction", "'state.spin_direction' must be nonzero");
    }
    r.number(s, "state", "spin_projection", c.state.spin_projection);
    r.number(s, "state", "q0", c.state.packet.q0);
    r.number(s, "state", "p0", c.state.packet.p0);
    r.number(s, "state", "width", c.state.packet.width);
    if (!(c.state.packet.width > 0.0)) r.fail("state.width", "'state.width' must be positive");
    r.integer(s, "state", "rank", c.state.rank);
    if (c.state.rank < 1) r.fail("state.rank", "'state.rank' must be positive");
  }
  if (doc.contains("propagation")) {
    const json& p = doc["propagation"];
    r.keys(p, "propagation", {"dt", "n_steps", "record_every", "scheme"});
    r.number(p, "propagation", "dt", c.propagation.dt);
    r.integer(p, "propagation", "n_steps", c.propagation.n_steps);
    r.integer(p, "propagation", "record_every", c.propagation.record_every);
    r.string(p, "propagation", "scheme", c.propagation.scheme);
    Scheme scheme = Scheme::SplitStepStrang;
    try {
      scheme = scheme_from_string(c.propagation.scheme);
    } catch (const InvalidArgument& e) {
      r.fail("propagation.scheme", e.what());
    }
    if (scheme == Scheme::WignerSpectral) {
      r.fail("propagation.scheme", "'propagation.scheme' must be a spinor scheme");
    }
    try {
      PropagatorConfig{c.propagation.dt, c.propagation.n_steps, Scheme::SplitStepStrang,
                       c.propagation.record_every}
          .validate();
    } catch (const std::exception& e) {
      r.fail("propagation", e.what());
    }
  }
  if (doc.contains("tomography")) {
    const json& t = doc["tomography"];
    r.keys(t, "tomography", {"n_theta", "n_x", "symplectic"});
    r.integer(t, "tomography", "n_theta", c.tomography.n_theta);
    r.integer(t, "tomography", "n_x", c.tomography.n_x);
    if (c.tomography.n_theta < 1) r.fail("tomography.n_theta", "'tomography.n_theta' must be positive");
    if (t.contains("symplectic")) {
      const json& s = t["symplectic"];
      if (!s.is_array()) r.fail("tomography.symplectic", "'tomography.symplectic' must be a list");
      c.tomography.symplectic.clear();
      for (const auto& pair : s) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
          r.fail("tomography.symplectic", "symplectic samples must be [mu, nu] pairs");
        }
        const double mu = pair[0].get<double>();
        const double nu = pair[1].get<double>();
        if (mu == 0.0 && nu == 0.0) r.fail("tomography.symplectic", "sample (0, 0) is not allowed");
        c.tomography.symplectic.emplace_back(mu, nu);
      }
    }
  }
  if (doc.contains("frame")) {
    const json& f = doc["frame"];
    r.keys(f, "frame", {"kind", "spin", "seed"});
    r.string(f, "frame", "kind", c.frame.kind);
    if (c.frame.kind != "spin1" && c.frame.kind != "random") {
      r.fail("frame.kind", "'frame.kind' must be \"spin1\" or \"random\"");
    }
    r.number(f, "frame", "spin", c.frame.spin);
    if (f.contains("seed")) {
      std::uint64_t s = 0;
      r.unsigned64(f, "frame", "seed", s);
      c.frame.seed = s;
    }
  }
  if (doc.contains("precession")) {
    const json& p = doc["precession"];
    r.keys(p, "precession", {"periods", "samples_per_period"});
    r.number(p, "precession", "periods", c.precession.periods);
    r.integer(p, "precession", "samples_per_period", c.precession.samples_per_period);
    if (!(c.precession.periods > 0.0) || c.precession.samples_per_period < 8) {
      r.fail("precession", "'precession' needs periods > 0 and samples_per_period >= 8");
    }
  }
  if (doc.contains("residual")) {
    const json& q = doc["residual"];
    r.keys(q, "residual",
           {"representations", "dt", "n_intervals", "oracle_substeps", "n_theta", "levels"});
    if (q.contains("representations")) {
      const json& reps = q["representations"];
      if (!reps.is_array()) r.fail("residual.representations", "'residual.representations' must be a list");
      c.residual.representations.clear();
      for (const auto& name : reps) {
        if (!name.is_string()) r.fail("residual.representations", "representation names must be strings");
        try {
          representation_from_string(name.get<std::string>());
        } catch (const InvalidArgument& e) {
          r.fail("residual.representations", e.what());
        }
        c.residual.representations.push_back(name.get<std::string>());
      }
    }
    r.number(q, "residual", "dt", c.residual.dt);
    r.integer(q, "residual", "n_intervals", c.residual.n_intervals);
    r.integer(q, "residual", "oracle_substeps", c.residual.oracle_substeps);
    r.integer(q, "residual", "n_theta", c.residual.n_theta);
    r.integer(q, "residual", "levels", c.residual.levels);
    if (!(c.residual.dt > 0.0) || c.residual.n_intervals < 2 || c.residual.oracle_substeps < 1 ||
        c.residual.levels < 2) {
      r.fail("residual", "'residual' needs dt > 0, n_intervals >= 2, oracle_substeps >= 1, levels >= 2");
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) r.fail("tolerances", "'tolerances' must be an object");
    for (const auto& [key, value] : t.items()) {
      const std::string path = "tolerances." + key;
      if (!default_tolerances().count(key)) r.fail(path, "unknown key '" + path + "'");
      if (!value.is_number() || !std::isfinite(value.get<double>()) || value.get<double>() < 0.0) {
        r.fail(path, "'" + path + "' must be a non-negative number");
      }
      c.tolerances[key] = value.get<double>();
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, std::optional<ScenarioKind> kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto pos = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
    throw ConfigError("", line, std::string("malformed JSON: ") + e.what());
  }
  const Reader reader(text);
  if (!doc.is_object()) throw ConfigError("", 1, "config must be a JSON object");
  if (doc.contains("scenario")) {
    if (!doc["scenario"].is_string()) reader.fail("scenario", "'scenario' must be a string");
    ScenarioKind named;
    try {
      named = scenario_from_string(doc["scenario"].get<std::string>());
    } catch (const InvalidArgument& e) {
      reader.fail("scenario", e.what());
    }
    if (kind && *kind != named) {
      reader.fail("scenario", std::string("config is for '") + to_string(named) +
                                  "' but the subcommand is '" + to_string(*kind) + "'");
    }
    kind = named;
  }
  if (!kind) throw ConfigError("scenario", 0, "no scenario given");
  ScenarioConfig c = default_config(*kind);
  parse_into(c, doc, reader);
  return c;
}

namespace {

class Gates {
 public:
  Gates(const ScenarioConfig& config, double scale) : config_(config), scale_(scale) {}

  double tol(const std::string& name) const {
    const auto it = config_.tolerances.find(name);
    return it != config_.tolerances.end() ? it->second : default_tolerances().at(name);
  }

  void at_most(const std::string& gate, double measured, const std::string& tol_name) {
    Gate g{gate, measured, tol(tol_name) * scale_, "<=", 0.0, false};
    g.passed = measured <= g.limit;
    gates.push_back(g);
  }

  void at_least(const std::string& gate, double measured, const std::string& tol_name) {
    Gate g{gate, measured, 1.0 - (1.0 - tol(tol_name)) * scale_, ">=", 0.0, false};
    g.passed = measured >= g.limit;
    gates.push_back(g);
  }

  void within(const std::string& gate, double measured, double lo, double hi) {
    Gate g{gate, measured, lo, "in", hi, false};
    g.passed = measured >= lo && measured <= hi;
    gates.push_back(g);
  }

  std::vector<Gate> gates;

 private:
  const ScenarioConfig& config_;
  double scale_;
};

json grid_json(const PhaseSpaceGrid& g) { return io::grid_to_json(g); }

json field_json(const ScenarioConfig& c) {
  return {{"charge", c.field.charge},
          {"light_speed", c.field.light_speed},
          {"kappa", c.field.kappa},
          {"mass", c.field.mass},
          {"spin", c.field.spin},
          {"phi", {c.field.phi(0), c.field.phi(1), c.field.phi(2)}},
          {"vector_potential", c.field.vector_potential},
          {"magnetic_field",
           {c.field.magnetic_field(0), c.field.magnetic_field(1), c.field.magnetic_field(2)}}};
}

SpinMatrix initial_spin_state(const ScenarioConfig& c) {
  return eigenprojector(Spin::from_value(c.field.spin), Direction(c.state.spin_direction),
                        c.state.spin_projection);
}

SpinorDensity initial_state(const ScenarioConfig& c) {
  const Spin spin = Spin::from_value(c.field.spin);
  if (c.state.kind == "random-mixed") {
    return random_spinor_density(spin, c.grid, c.state.rank, c.seed);
  }
  return SpinorDensity::product(initial_spin_state(c), c.grid,
                                gaussian_packet(c.grid, c.state.packet));
}

std::shared_ptr<const SpinFrame> make_frame(const ScenarioConfig& c) {
  const Spin spin = Spin::from_value(c.field.spin);
  if (spin == Spin(2)) return std::make_shared<const SpinFrame>(build_spin1_frame());
  return std::make_shared<const SpinFrame>(random_frame(spin, c.seed));
}

std::optional<TomogramDomain> make_domain(const ScenarioConfig& c, Representation repr) {
  if (repr == Representation::Optical) {
    return TomogramDomain::optical(c.grid, c.tomography.n_theta, c.tomography.n_x);
  }
  if (repr == Representation::SymplecticSection) {
    return TomogramDomain::symplectic_samples(c.grid, c.tomography.symplectic, c.tomography.n_x);
  }
  return std::nullopt;
}

json audit_json(const AuditReport& a) {
  json comps = json::array();
  for (const auto& c : a.components) {
    comps.push_back({{"integral", c.integral}, {"min", c.min_value}, {"max", c.max_value}});
  }
  return {{"representation", to_string(a.representation)},
          {"components", comps},
          {"normalization_sum", a.normalization_sum},
          {"max_imag_residue", a.max_imag_residue},
          {"negativity_expected", a.negativity_expected},
          {"exceeds_unit_pointwise", a.exceeds_unit_pointwise}};
}

void add_audit_gates(Gates& gates, const AuditReport& a, const std::string& prefix) {
  gates.at_most(prefix + "normalization", std::abs(a.normalization_sum - 1.0), "normalization");
  if (a.representation == Representation::Wigner) {
    gates.at_most(prefix + "realness", a.max_imag_residue, "realness");
  } else {
    double min_value = std::numeric_limits<double>::infinity();
    for (const auto& c : a.components) min_value = std::min(min_value, c.min_value);
    gates.at_most(prefix + "negativity", std::max(0.0, -min_value), "nonnegativity");
  }
}


void run_audit_frame(const ScenarioConfig& c, const fs::path& out, Gates& gates, json& m) {
  const Spin spin = Spin::from_value(c.frame.spin);
  const bool standard = c.frame.kind == "spin1";
  if (standard && spin != Spin(2)) throw InvalidArgument("the standard frame is spin 1");
  const SpinFrame frame = standard ? build_spin1_frame() : random_frame(spin, c.frame.seed.value_or(c.seed));
  io::write_json(out / "frame.json", io::frame_to_json(frame));

  m["frame"] = standard ? "spin1" : "random";
  m["spin"] = spin.value();
  m["gram_determinant"] = frame.gram().determinant();
  m["gram_condition_number"] = frame.gram_condition_number();
  gates.at_most("duality", frame.duality_residual(), "duality");
  gates.at_most("completeness", frame.completeness_residual(), "completeness");
  gates.at_most("quantizer_hermiticity", frame.quantizer_hermiticity_residual(),
                "quantizer_hermiticity");
  double projector = 0.0;
  for (const auto& u : frame.dequantizer()) {
    projector = std::max(projector, (u - u.adjoint()).cwiseAbs().maxCoeff());
    projector = std::max(projector, (u * u - u).cwiseAbs().maxCoeff());
    projector = std::max(projector, std::abs(u.trace() - 1.0));
  }
  gates.at_most("projector", projector, "projector");

  {
    io::CsvWriter gram(out / "gram.csv", {"j", "k", "value"});
    for (Eigen::Index j = 0; j < frame.gram().rows(); ++j) {
      for (Eigen::Index k = 0; k < frame.gram().cols(); ++k) {
        gram.row({double(j + 1), double(k + 1), frame.gram()(j, k)});
      }
    }
  }
  if (!standard) return;

  double unit = 0.0;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(9);
    e(k) = 1.0;
    unit = std::max(unit, (frame.quantizer_vector(k, k) - e).cwiseAbs().maxCoeff());
  }
  gates.at_most("quantizer_unit_vectors", unit, "quantizer_unit_vectors");

  const auto diffs = compare_with_tabulated(frame);
  io::CsvWriter csv(out / "quantizer_diff.csv",
                    {"item", "index", "recomputed_re", "recomputed_im", "tabulated_re",
                     "tabulated_im", "abs_diff"});
  json table = json::object();
  for (const auto& d : diffs) {
    csv.row({d.item, std::to_string(d.index)},
            {d.recomputed.real(), d.recomputed.imag(), d.tabulated.real(), d.tabulated.imag(),
             d.abs_diff});
    double& worst = table[d.item].is_null() ? (table[d.item] = 0.0).get_ref<double&>()
                                            : table[d.item].get_ref<double&>();
    worst = std::max(worst, d.abs_diff);
  }
  m["tabulated_max_abs_diff"] = table;
}


void run_precess(const ScenarioConfig& c, const fs::path& out, Gates& gates, json& m) {
  const auto frame = make_frame(c);
  const Vec3 b = c.field.magnetic_field;
  const double hbar = c.grid.hbar;
  const double s = Spin::from_value(c.field.spin).value();
  const double larmor = std::abs(c.field.kappa) * b.norm() / (s * hbar);
  if (!(larmor > 0.0)) throw InvalidArgument("precession needs nonzero kappa and B");

  const int n = static_cast<int>(std::lround(c.precession.periods * c.precession.samples_per_period));
  const double duration = c.precession.periods * 2.0 * M_PI / larmor;
  std::vector<double> times(n + 1);
  for (int i = 0; i <= n; ++i) times[i] = duration * i / n;

  const SpinMatrix rho0 = initial_spin_state(c);
  const SpinCouplingMatrix sm = spin_coupling_matrix(*frame, b, c.field.kappa, hbar);
  const auto w = evolve_spin_weights(sm, frame->weights(rho0), times);
  const auto oracle = spin_oracle_weights(*frame, rho0, b, c.field.kappa, hbar, times);

  const SpinMatrix hz = -(c.field.kappa / s) * spin_operators(frame->spin()).along(b);
  double vs_oracle = 0.0;
  double norm_dev = 0.0;
  io::CsvWriter integrals(out / "component_integrals.csv", {"t", "series", "value"});
  io::CsvWriter conserved(out / "conserved.csv", {"t", "series", "value"});
  std::vector<Eigen::VectorXd> series(frame->size(), Eigen::VectorXd(n + 1));
  for (int i = 0; i <= n; ++i) {
    vs_oracle = std::max(vs_oracle, (w[i] - oracle[i]).cwiseAbs().maxCoeff());
    const double norm = frame->trace_weights().dot(w[i]);
    norm_dev = std::max(norm_dev, std::abs(norm - 1.0));
    double e = 0.0;
    for (std::size_t k = 0; k < frame->size(); ++k) {
      e += w[i](k) * (frame->quantizer()[k] * hz).trace().real();
      series[k](i) = w[i](k);
    }
    const std::string t = io::format_number(times[i]);
    for (std::size_t k = 0; k < frame->size(); ++k) {
      integrals.row({t, "w" + std::to_string(k + 1)}, {w[i](k)});
    }
    conserved.row({t, "norm_sum"}, {norm});
    conserved.row({t, "energy"}, {e});
  }
  const LarmorFit fit = fit_larmor(times, series, frame->spin().twice());

  m["larmor_expected"] = larmor;
  m["larmor_fitted"] = fit.omega;
  m["fit_rms_residual"] = fit.rms_residual;
  m["periods"] = c.precession.periods;
  m["samples"] = n + 1;
  m["s_rows_z_projectors_max"] = sm.entries.topRows(std::min<Eigen::Index>(3, sm.entries.rows()))
                                     .cwiseAbs()
                                     .maxCoeff();
  gates.at_most("spin_vs_oracle", vs_oracle, "spin_vs_oracle");
  gates.at_most("larmor_relative", std::abs(fit.omega - larmor) / larmor, "larmor_relative");
  gates.at_most("normalization", norm_dev, "normalization");
  gates.at_most("conservation_vector",
                (frame->trace_weights().transpose() * sm.entries).cwiseAbs().maxCoeff(),
                "conservation_vector");
}


void run_wavepacket(const ScenarioConfig& c, const fs::path& out, Gates& gates, json& m) {
  const auto frame = make_frame(c);
  const EMFieldConfig field = c.field_config();
  const Representation repr = representation_from_string(c.representation);
  const auto domain = make_domain(c, repr);
  const SpinorDensity rho0 = initial_state(c);
  PropagatorConfig prop{c.propagation.dt, c.propagation.n_steps,
                        scheme_from_string(c.propagation.scheme), c.propagation.record_every};
  const Trajectory traj = evolve_oracle(rho0, field, prop);

  VectorTrajectory vt;
  double trace_dev = 0.0, herm = 0.0, energy_dev = 0.0, norm_dev = 0.0, worst_audit = 0.0;
  const double e0 = energy(rho0, field, 0.0);
  AuditReport last_audit;
  for (std::size_t f = 0; f < traj.states.size(); ++f) {
    const SpinorDensity& rho = traj.states[f];
    VectorDistribution v = to_vector(rho, frame, repr, domain);
    v.time = traj.times[f];
    const StateCheck check = rho.check(c.seed);
    ConservedRecord rec;
    rec.t = v.time;
    rec.trace = check.trace;
    rec.energy = energy(rho, field, v.time);
    rec.norm_sum = v.normalization_sum();
    trace_dev = std::max(trace_dev, std::abs(check.trace - 1.0));
    herm = std::max(herm, check.hermiticity);
    energy_dev = std::max(energy_dev, std::abs(rec.energy - e0) / std::max(1.0, std::abs(e0)));
    norm_dev = std::max(norm_dev, std::abs(rec.norm_sum - 1.0));
    last_audit = audit(v);
    if (repr == Representation::Wigner) {
      worst_audit = std::max(worst_audit, v.max_imag_residue);
    } else {
      for (const auto& comp : last_audit.components) worst_audit = std::max(worst_audit, -comp.min_value);
    }
    vt.conserved.push_back(rec);
    vt.frames.push_back(std::move(v));
  }
  m["frames"] = vt.frames.size();
  m["initial_energy"] = e0;
  m["final_audit"] = audit_json(last_audit);
  gates.at_most("trace", trace_dev, "trace");
  gates.at_most("hermiticity", herm, "hermiticity");
  gates.at_most("energy_relative", energy_dev, "energy_relative");
  gates.at_most("normalization", norm_dev, "normalization");
  if (repr == Representation::Wigner) {
    gates.at_most("realness", worst_audit, "realness");
  } else {
    gates.at_most("negativity", std::max(0.0, worst_audit), "nonnegativity");
  }

  if (repr == Representation::Wigner && field.truncating() && traj.states.size() > 1) {
    const double frame_dt = c.propagation.dt * c.propagation.record_every;
    PropagatorConfig wp{frame_dt, static_cast<int>(traj.states.size()) - 1,
                        Scheme::WignerSpectral, 1};
    const VectorTrajectory direct = evolve_wigner_vector(vt.frames.front(), field, wp);
    double diff = 0.0;
    for (std::size_t f = 0; f < direct.frames.size(); ++f) {
      for (std::size_t j = 0; j < frame->size(); ++j) {
        diff = std::max(diff, (direct.frames[f].components[j] - vt.frames[f].components[j])
                                  .cwiseAbs()
                                  .maxCoeff());
      }
      norm_dev = std::max(norm_dev, std::abs(direct.conserved[f].norm_sum - 1.0));
    }
    gates.at_most("wigner_vs_oracle", diff, "wigner_vs_oracle");
    gates.at_most("direct_normalization", norm_dev, "normalization");
  }

  io::emit_plot_data(vt, io::PlotData::ComponentIntegrals, out / "component_integrals.csv");
  io::emit_plot_data(vt, io::PlotData::Conserved, out / "conserved.csv");
  io::emit_plot_data(vt, io::PlotData::Slice, out / "slice.csv");
  io::write_vector_distribution(out / "fields", "final", vt.frames.back());
  if (c.write_fields) {
    io::write_trajectory(out / "trajectory", vt, field_json(c), c.propagation.scheme);
  }
}


void run_roundtrip(const ScenarioConfig& c, const fs::path& out, Gates& gates, json& m) {
  const auto frame = make_frame(c);
  const Representation repr = representation_from_string(c.representation);
  const auto domain = make_domain(c, repr);
  const SpinorDensity rho = initial_state(c);
  const VectorDistribution v = to_vector(rho, frame, repr, domain);
  const AuditReport a = audit(v);
  m["audit"] = audit_json(a);
  add_audit_gates(gates, a, "");

  VectorTrajectory vt;
  vt.frames.push_back(v);
  io::emit_plot_data(vt, io::PlotData::ComponentIntegrals, out / "component_integrals.csv");
  io::write_vector_distribution(out / "fields", "vector", v);

  const SpinorDensity back = from_vector(v);
  double block_error = 0.0;
  for (int j = 0; j < rho.spin_dim(); ++j) {
    for (int k = 0; k < rho.spin_dim(); ++k) {
      block_error = std::max(block_error, (back.block(j, k) - rho.block(j, k)).cwiseAbs().maxCoeff());
    }
  }
  const double fid = fidelity(rho, back);
  m["max_block_error"] = block_error;
  m["fidelity"] = fid;
  m["reconstructed_trace"] = back.trace();
  if (repr == Representation::Wigner) {
    gates.at_most("roundtrip_block_error", block_error, "roundtrip_wigner");
  } else {
    gates.at_least("fidelity", fid, "fidelity");
  }
}


void run_residual(const ScenarioConfig& c, const fs::path& out, Gates& gates, json& m) {
  const auto frame = make_frame(c);
  io::CsvWriter csv(out / "residuals.csv",
                    {"representation", "level", "t", "dt", "dx", "max_norm", "l2_norm"});
  json studies = json::object();
  const double lo = gates.tol("ratio_min");
  const double hi = gates.tol("ratio_max");
  for (const auto& name : c.residual.representations) {
    const Representation repr = representation_from_string(name);
    ConvergenceOptions o;
    o.representation = repr;
    o.grid = c.grid;
    o.field = c.field_config();
    o.spin_state = initial_spin_state(c);
    o.packet = c.state.packet;
    o.dt = c.residual.dt;
    o.n_intervals = c.residual.n_intervals;
    o.oracle_substeps = c.residual.oracle_substeps;
    o.n_theta = c.residual.n_theta;
    o.symplectic_samples = c.tomography.symplectic;
    o.levels = c.residual.levels;
    const ConvergenceReport rep = convergence_study(o);
    json levels = json::array();
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
      const auto& r = rep.levels[l];
      levels.push_back({{"dt", rep.dt[l]}, {"dx", rep.dx[l]}, {"max_residual", r.max_residual},
                        {"l2_residual", r.l2_residual}, {"max_lhs", r.max_lhs}});
      for (std::size_t i = 0; i < r.times.size(); ++i) {
        csv.row({name, std::to_string(l)},
                {r.times[i], rep.dt[l], rep.dx[l], r.max_norm[i], r.l2_norm[i]});
      }
    }
    studies[name] = {{"levels", levels}, {"ratios", rep.ratios}};
    for (std::size_t l = 0; l < rep.ratios.size(); ++l) {
      gates.within("ratio_" + name + "_" + std::to_string(l), rep.ratios[l], lo, hi);
    }

    // Stationary check: oscillator ground state in its own potential, B = 0,
    // on a doubled lattice so the Husimi tails fit inside the momentum range.
    ScenarioConfig sc = c;
    sc.grid.n = 2 * c.grid.n;
    const double mw = c.grid.mass * c.grid.omega;
    sc.field.mass = c.grid.mass;
    sc.field.phi = Eigen::Vector3d(0.0, 0.0, mw * c.grid.omega / c.field.charge);
    sc.field.vector_potential = 0.0;
    sc.field.magnetic_field = Vec3::Zero();
    sc.state.packet = {0.0, 0.0, std::sqrt(c.grid.hbar / mw)};
    const SpinorDensity ground = initial_state(sc);
    Trajectory still{{0.0, c.residual.dt, 2.0 * c.residual.dt}, {ground, ground, ground}};
    ResidualOptions ro;
    ro.domain = make_domain(sc, repr);
    if (repr == Representation::Optical) {
      ro.domain = TomogramDomain::optical(sc.grid, c.residual.n_theta);
    }
    const ResidualReport r = residual_check(still, sc.field_config(), repr, frame, ro);
    studies[name]["static_residual"] = r.max_residual;
    gates.at_most("static_" + name, r.max_residual, "static_residual");
  }
  m["studies"] = studies;
}

}  // namespace

ScenarioResult run(const ScenarioConfig& config, const fs::path& out, double tolerance_scale) {
  if (!(tolerance_scale > 0.0) || !std::isfinite(tolerance_scale)) {
    throw InvalidArgument("tolerance scale must be positive");
  }
  fs::create_directories(out);
  Gates gates(config, tolerance_scale);
  json measurements = json::object();
  switch (config.scenario) {
    case ScenarioKind::AuditFrame: run_audit_frame(config, out, gates, measurements); break;
    case ScenarioKind::Precess: run_precess(config, out, gates, measurements); break;
    case ScenarioKind::Wavepacket: run_wavepacket(config, out, gates, measurements); break;
    case ScenarioKind::Roundtrip: run_roundtrip(config, out, gates, measurements); break;
    case ScenarioKind::Residual: run_residual(config, out, gates, measurements); break;
  }

  ScenarioResult result;
  result.gates = gates.gates;
  json gate_list = json::array();
  for (const auto& g : gates.gates) {
    json entry = {{"name", g.name}, {"measured", g.measured}, {"relation", g.relation},
                  {"limit", g.limit}, {"passed", g.passed}};
    if (g.relation == "in") entry["upper"] = g.upper;
    gate_list.push_back(entry);
    if (!g.passed && result.first_failed.empty()) result.first_failed = g.name;
  }
  result.exit_code = result.first_failed.empty() ? 0 : 1;
  result.report = {{"scenario", to_string(config.scenario)},
                   {"seed", config.seed},
                   {"tolerance_scale", tolerance_scale},
                   {"grid", grid_json(config.grid)},
                   {"field", field_json(config)},
                   {"representation", config.representation},
                   {"measurements", measurements},
                   {"gates", gate_list},
                   {"passed", result.exit_code == 0},
                   {"first_failed_gate",
                    result.first_failed.empty() ? json() : json(result.first_failed)}};
  io::write_json(out / "report.json", result.report);
  return result;
}

}  // namespace spintomo
