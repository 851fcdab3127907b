#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "spintomo/errors.hpp"
#include "spintomo/scenarios.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;
};

int run_scenario(spintomo::ScenarioKind kind, const Options& opt) {
  using namespace spintomo;
  ScenarioConfig config;
  try {
    if (opt.config.empty()) {
      config = default_config(kind);
    } else {
      std::ifstream in(opt.config);
      if (!in) throw ConfigError("", 0, "cannot open config file '" + opt.config + "'");
      std::stringstream text;
      text << in.rdbuf();
      config = parse_config(text.str(), kind);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (!opt.config.empty()) std::cerr << " in " << opt.config;
    if (e.line() > 0) std::cerr << " at line " << e.line();
    if (!e.field().empty()) std::cerr << " (field '" << e.field() << "')";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  }
  if (opt.seed) config.seed = *opt.seed;

  std::filesystem::path out = opt.out;
  if (out.empty()) out = config.output.empty() ? std::string("out/") + to_string(kind) : config.output;

  ScenarioResult result;
  try {
    result = run(config, out, opt.tolerance_scale);
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  for (const auto& g : result.gates) {
    std::cout << (g.passed ? "PASS " : "FAIL ") << g.name << "  measured " << g.measured;
    if (g.relation == "in") {
      std::cout << "  in [" << g.limit << ", " << g.upper << "]\n";
    } else {
      std::cout << "  " << g.relation << " " << g.limit << "\n";
    }
  }
  std::cout << "report: " << (out / "report.json").string() << "\n";
  if (result.exit_code != 0) {
    std::cerr << "gate '" << result.first_failed << "' failed, see "
              << (out / "report.json").string() << "\n";
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-resolved phase-space portraits of spin-1 particles"};
  app.require_subcommand(1);

  Options opt;
  int code = 0;
  const std::pair<spintomo::ScenarioKind, const char*> commands[] = {
      {spintomo::ScenarioKind::AuditFrame, "Check the spin frame and its dual"},
      {spintomo::ScenarioKind::Precess, "Spin precession in a uniform field"},
      {spintomo::ScenarioKind::Wavepacket, "Evolve a wave packet and its vector portrait"},
      {spintomo::ScenarioKind::Roundtrip, "Map a state to a portrait and back"},
      {spintomo::ScenarioKind::Residual, "Evolution-equation residuals and convergence"},
  };
  for (const auto& [kind, help] : commands) {
    CLI::App* sub = app.add_subcommand(spintomo::to_string(kind), help);
    sub->add_option("--config", opt.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Random seed");
    sub->add_option("--tolerance-scale", opt.tolerance_scale, "Multiplier for gate tolerances")
        ->check(CLI::PositiveNumber);
    sub->callback([&code, &opt, kind = kind] { code = run_scenario(kind, opt); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return code;
}
