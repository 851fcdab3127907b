#include <doctest.h>

#include <fstream>

#include "spintomo/errors.hpp"
#include "spintomo/io.hpp"

using namespace spintomo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spintomo_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("binary fields with sidecars") {
  const fs::path dir = scratch("field");
  Eigen::MatrixXd m(2, 3);
  m << 1.0, -2.5, 3.0e-300, 4.0, 0.1, -0.0;
  io::write_field(dir / "m", m, {{"kind", "test"}});
  CHECK(fs::file_size(dir / "m.bin") == 6 * sizeof(double));
  const std::string raw = slurp(dir / "m.bin");
  double second;
  std::memcpy(&second, raw.data() + sizeof(double), sizeof(double));
  CHECK(second == -2.5);  // row-major, host is little-endian
  io::json meta;
  const Eigen::MatrixXd back = io::read_field(dir / "m", &meta);
  CHECK(back == m);
  CHECK(meta["rows"] == 2);
  CHECK(meta["cols"] == 3);
  CHECK(meta["kind"] == "test");
  CHECK(meta["byte_order"] == "little");
}

TEST_CASE("frame JSON round trip and tamper detection") {
  const SpinFrame f = build_spin1_frame();
  io::json j = io::frame_to_json(f);
  const SpinFrame back = io::frame_from_json(j);
  CHECK((back.gram() - f.gram()).cwiseAbs().maxCoeff() < 1e-15);
  j["quantizer"][0][0][0] = io::complex_to_json({5.0, 0.0});
  CHECK_THROWS_AS(io::frame_from_json(j), InvalidArgument);
  io::json extra = io::frame_to_json(f);
  extra["colour"] = "blue";
  CHECK_THROWS_AS(io::frame_from_json(extra), InvalidArgument);
}

TEST_CASE("grid and domain JSON round trip") {
  PhaseSpaceGrid g;
  g.n = 128;
  g.q_min = -6.0;
  g.q_max = 7.0;
  CHECK(io::grid_from_json(io::grid_to_json(g)) == g);
  const TomogramDomain d = TomogramDomain::optical(g, 20, 64);
  const TomogramDomain e = io::domain_from_json(io::domain_to_json(d));
  CHECK((e.x - d.x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(e.theta == d.theta);
}

TEST_CASE("vector distributions on disk") {
  const fs::path dir = scratch("vector");
  PhaseSpaceGrid g;
  g.n = 32;
  const auto rho = random_spinor_density(Spin(2), g, 2, 8);
  const auto frame = std::make_shared<const SpinFrame>(build_spin1_frame());
  const VectorDistribution v =
      to_vector(rho, frame, Representation::Optical, TomogramDomain::optical(g, 16));
  io::write_vector_distribution(dir, "v", v);
  const VectorDistribution back = io::read_vector_distribution(dir / "v.json");
  CHECK(back.representation == Representation::Optical);
  REQUIRE(back.components.size() == 9);
  for (std::size_t j = 0; j < 9; ++j) CHECK(back.components[j] == v.components[j]);
  CHECK(back.domain.theta == v.domain.theta);
  io::write_vector_csv(dir / "v.csv", v);
  std::ifstream csv(dir / "v.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "X,theta,w1,w2,w3,w4,w5,w6,w7,w8,w9");
}

TEST_CASE("CSV numbers round trip exactly") {
  const fs::path dir = scratch("csv");
  {
    io::CsvWriter w(dir / "a.csv", {"name", "x"});
    w.row({"pi"}, {M_PI});
    CHECK_THROWS_AS(w.row({1.0, 2.0, 3.0}), InvalidArgument);
  }
  const std::string text = slurp(dir / "a.csv");
  CHECK(text.rfind("name,x\npi,", 0) == 0);
  CHECK(std::stod(text.substr(text.find("pi,") + 3)) == M_PI);
}

TEST_CASE("plot data and trajectories") {
  const fs::path dir = scratch("traj");
  CHECK_THROWS_AS(io::emit_plot_data({}, io::PlotData::Conserved, dir / "c.csv"), InvalidArgument);
  PhaseSpaceGrid g;
  g.n = 32;
  const auto rho = SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), 1.0), g,
                                          gaussian_packet(g, {}));
  VectorTrajectory vt;
  vt.frames.push_back(to_vector(rho, std::make_shared<const SpinFrame>(build_spin1_frame()),
                                Representation::Wigner));
  vt.conserved.push_back({0.0, 1.0, 0.5, 1.0, 0.0});
  io::emit_plot_data(vt, io::PlotData::ComponentIntegrals, dir / "i.csv");
  std::ifstream in(dir / "i.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,series,value");
  std::getline(in, line);
  CHECK(line.rfind("0,w1,", 0) == 0);
  io::write_trajectory(dir / "out", vt, {{"kind", "test"}}, "split-step-strang");
  const io::json manifest = io::read_json(dir / "out" / "manifest.json");
  CHECK(manifest["scheme"] == "split-step-strang");
  CHECK(fs::exists(dir / "out" / "conserved.csv"));
}
