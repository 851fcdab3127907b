#include <doctest.h>

#include "spintomo/errors.hpp"
#include "spintomo/residuals.hpp"

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

Trajectory stationary(const PhaseSpaceGrid& grid) {
  const auto rho = SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), 1.0), grid,
                                          gaussian_packet(grid, {0.0, 0.0, 1.0}));
  return {{0.0, 0.05, 0.1}, {rho, rho, rho}};
}

}  // namespace

TEST_CASE("stationary oscillator state has zero residual in every representation") {
  const PhaseSpaceGrid grid = grid_with(128);
  const EMFieldConfig field = EMFieldConfig::harmonic(1.0, 1.0);
  const Trajectory tr = stationary(grid);
  for (auto repr : {Representation::Wigner, Representation::Husimi, Representation::Optical,
                    Representation::SymplecticSection}) {
    ResidualOptions o;
    if (repr == Representation::Optical) o.domain = TomogramDomain::optical(grid, 32);
    if (repr == Representation::SymplecticSection)
      o.domain = TomogramDomain::symplectic_samples(grid, {{1.0, 0.0}, {0.8, 0.4}, {0.6, -0.7}});
    const ResidualReport r = residual_check(tr, field, repr, spin1(), o);
    CAPTURE(to_string(repr));
    CHECK(r.max_residual <= 1e-12);
    CHECK(r.times.size() == 1);
  }
}

TEST_CASE("Wigner residual converges at second order") {
  ConvergenceOptions o;
  o.representation = Representation::Wigner;
  o.grid = grid_with(64);
  o.field = EMFieldConfig::constant({0.0, 0.0, 1.0}, 0.0, Vec3(0.3, 0.0, 0.7));
  o.spin_state = eigenprojector(Spin(2), Direction::x(), 1.0);
  o.packet = {1.0, 0.5, 1.0};
  const ConvergenceReport r = convergence_study(o);
  REQUIRE(r.ratios.size() == 1);
  CHECK(r.ratios[0] >= 3.0);
  CHECK(r.ratios[0] <= 5.0);
  CHECK(r.dt[1] == doctest::Approx(0.5 * r.dt[0]));
  CHECK(r.dx[1] == doctest::Approx(0.5 * r.dx[0]));
}

TEST_CASE("residual preconditions") {
  const PhaseSpaceGrid grid = grid_with(32);
  Trajectory tr = stationary(grid);
  EMFieldConfig field = EMFieldConfig::harmonic(1.0, 1.0);
  Trajectory two{{0.0, 0.1}, {tr.states[0], tr.states[1]}};
  CHECK_THROWS_AS(residual_check(two, field, Representation::Wigner, spin1()), InvalidArgument);
  Trajectory uneven{{0.0, 0.1, 0.3}, tr.states};
  CHECK_THROWS_AS(residual_check(uneven, field, Representation::Wigner, spin1()), InvalidArgument);
  CHECK_THROWS_AS(residual_check(tr, field, Representation::Optical, spin1()), InvalidArgument);
  field.phi_extra = [](double q, double) { return q * q * q; };
  CHECK_THROWS_AS(residual_check(tr, field, Representation::Wigner, spin1()), UnsupportedOperation);
}
