#include <doctest.h>

#include "oracles.hpp"
#include "spintomo/errors.hpp"
#include "spintomo/vector_portrait.hpp"

using namespace spintomo;

namespace {

PhaseSpaceGrid grid_with(int n) {
  PhaseSpaceGrid g;
  g.n = n;
  return g;
}

std::shared_ptr<const SpinFrame> spin1() {
  return std::make_shared<const SpinFrame>(build_spin1_frame());
}

}  // namespace

TEST_CASE("product state Wigner components factor into spin weight times W") {
  const PhaseSpaceGrid grid = grid_with(64);
  const GaussianPacket g{-0.5, 0.7, 1.1};
  const SpinMatrix rho_s = eigenprojector(Spin(2), Direction(1, 1, 0), 1.0);
  const SpinorDensity rho = SpinorDensity::product(rho_s, grid, gaussian_packet(grid, g));
  const auto frame = spin1();
  const VectorDistribution v = to_vector(rho, frame, Representation::Wigner);
  REQUIRE(v.components.size() == 9);
  const oracle::Packet o{g.q0, g.p0, g.width, 1.0};
  const auto lat = grid.lattice();
  double err = 0.0;
  for (int j = 0; j < 9; ++j) {
    const double wj = (rho_s * frame->dequantizer()[j]).trace().real();
    for (int i = 0; i < lat.nq; ++i)
      for (int m = 0; m < lat.np; ++m)
        err = std::max(err, std::abs(v.components[j](i, m) -
                                     wj * oracle::wigner(o, lat.q(i), lat.p(m))));
  }
  CHECK(err < 1e-10);
  CHECK(v.normalization_sum() == doctest::Approx(1.0).epsilon(1e-10));
  const AuditReport a = audit(v);
  CHECK(a.passed());
}

TEST_CASE("mixed state round trip through the Wigner route") {
  const PhaseSpaceGrid grid = grid_with(64);
  const SpinorDensity rho = random_spinor_density(Spin(2), grid, 2, 99);
  CHECK_NOTHROW(rho.validate());
  const VectorDistribution v = to_vector(rho, spin1(), Representation::Wigner);
  CHECK(v.max_imag_residue < 1e-12);
  const SpinorDensity back = from_vector(v);
  CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fidelity(rho, back) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reduced spin state and contraction") {
  const PhaseSpaceGrid grid = grid_with(32);
  const SpinMatrix rho_s = eigenprojector(Spin(2), Direction::x(), 0.0);
  const SpinorDensity rho = SpinorDensity::product(rho_s, grid, gaussian_packet(grid, {}));
  CHECK((rho.spin_reduced() - rho_s).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rho.trace() == doctest::Approx(1.0));
  const SpinMatrix u = eigenprojector(Spin(2), Direction::z(), 1.0);
  const Eigen::MatrixXcd k = rho.contract(u);
  double tr = 0.0;
  for (int a = 0; a < grid.n; ++a) tr += k(a, a).real() * grid.dx();
  CHECK(tr == doctest::Approx((rho_s * u).trace().real()).epsilon(1e-12));
}

TEST_CASE("fidelity of orthogonal and identical states") {
  const PhaseSpaceGrid grid = grid_with(32);
  const Eigen::VectorXcd psi = gaussian_packet(grid, {});
  const auto up = SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), 1.0), grid, psi);
  const auto down =
      SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), -1.0), grid, psi);
  CHECK(fidelity(up, up) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fidelity(up, down) < 1e-10);
}

TEST_CASE("constructor checks") {
  const PhaseSpaceGrid grid = grid_with(32);
  CHECK_THROWS_AS(SpinorDensity(Spin(2), grid, Eigen::MatrixXcd::Identity(10, 10)),
                  InvalidArgument);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(96, 96);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(SpinorDensity(Spin(2), grid, m), InvalidState);
}

TEST_CASE("Husimi and optical vectors") {
  const PhaseSpaceGrid grid = grid_with(128);
  const SpinorDensity rho = random_spinor_density(Spin(2), grid, 2, 4);
  const auto frame = spin1();

  const VectorDistribution h = to_vector(rho, frame, Representation::Husimi);
  const AuditReport ah = audit(h);
  CHECK(ah.passed());
  for (const auto& c : ah.components) CHECK(c.min_value >= -1e-10);
  CHECK_THROWS_AS(from_vector(h), UnsupportedOperation);

  const TomogramDomain dom = TomogramDomain::optical(grid, 64);
  const VectorDistribution t = to_vector(rho, frame, Representation::Optical, dom);
  CHECK(t.normalization_sum() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(audit(t).passed());
  CHECK(fidelity(rho, from_vector(t)) > 0.99);
  CHECK_THROWS_AS(to_vector(rho, frame, Representation::Optical), InvalidArgument);
}

TEST_CASE("superpositions have negative Wigner values, recorded as expected") {
  const PhaseSpaceGrid grid = grid_with(64);
  Eigen::VectorXcd psi = gaussian_packet(grid, {-2.0, 0.0, 1.0}) + gaussian_packet(grid, {2.0, 0.0, 1.0});
  psi /= std::sqrt(psi.squaredNorm() * grid.dx());
  const auto rho = SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), 1.0), grid, psi);
  const AuditReport a = audit(to_vector(rho, spin1(), Representation::Wigner));
  CHECK(a.negativity_expected);
  CHECK(a.passed());
}
