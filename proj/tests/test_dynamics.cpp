#include <doctest.h>

#include "oracles.hpp"
#include "spintomo/dynamics.hpp"
#include "spintomo/errors.hpp"

using namespace spintomo;

namespace {

PhaseSpaceGrid grid_with(int n, double half = 8.0) {
  PhaseSpaceGrid g;
  g.n = n;
  g.q_min = -half;
  g.q_max = half;
  return g;
}

double mean_position(const SpinorDensity& rho) {
  const auto& g = rho.grid();
  double q = 0.0;
  for (int j = 0; j < rho.spin_dim(); ++j) {
    const Eigen::MatrixXcd b = rho.block(j, j);
    for (int a = 0; a < g.n; ++a) q += g.position(a) * b(a, a).real() * g.dx();
  }
  return q;
}

}  // namespace

TEST_CASE("scheme names and field validation") {
  for (auto s : {Scheme::SplitStepStrang, Scheme::Rk4, Scheme::WignerSpectral})
    CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scheme_from_string("leapfrog"), InvalidArgument);
  EMFieldConfig f = EMFieldConfig::harmonic(1.0, 1.0);
  CHECK_NOTHROW(f.validate());
  f.mass = 0.0;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
}

TEST_CASE("oscillator ground state is stationary with energy hbar omega / 2") {
  const PhaseSpaceGrid grid = grid_with(64);
  const EMFieldConfig field = EMFieldConfig::harmonic(1.0, 1.0);
  const auto rho0 = SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), 1.0), grid,
                                           gaussian_packet(grid, {0.0, 0.0, 1.0}));
  CHECK(energy(rho0, field, 0.0) == doctest::Approx(0.5).epsilon(1e-8));
  const Trajectory tr = evolve_oracle(rho0, field, {1e-3, 2000, Scheme::SplitStepStrang, 1000});
  REQUIRE(tr.states.size() == 3);
  CHECK((tr.states.back().matrix() - rho0.matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("coherent state follows the classical orbit") {
  const PhaseSpaceGrid grid = grid_with(64);
  const EMFieldConfig field = EMFieldConfig::harmonic(1.0, 1.0);
  const double q0 = 1.5, p0 = -0.5;
  const auto rho0 = SpinorDensity::product(eigenprojector(Spin(2), Direction::x(), 1.0), grid,
                                           gaussian_packet(grid, {q0, p0, 1.0}));
  const double dt = 2.0 * M_PI / 4000.0;
  const Trajectory tr = evolve_oracle(rho0, field, {dt, 1000, Scheme::SplitStepStrang, 250});
  for (std::size_t f = 0; f < tr.states.size(); ++f) {
    const double t = tr.times[f];
    CHECK(mean_position(tr.states[f]) ==
          doctest::Approx(q0 * std::cos(t) + p0 * std::sin(t)).epsilon(1e-6));
    CHECK(tr.states[f].trace() == doctest::Approx(1.0).epsilon(1e-10));
  }
  const Trajectory rk = evolve_oracle(rho0, field, {dt, 1000, Scheme::Rk4, 1000});
  CHECK((rk.states.back().matrix() - tr.states.back().matrix()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("Zeeman rotation of the reduced spin state") {
  const PhaseSpaceGrid grid = grid_with(32);
  const Vec3 b(0.2, -0.5, 0.9);
  EMFieldConfig field = EMFieldConfig::constant(Eigen::Vector3d::Zero(), 0.0, b, 0.8);
  const SpinMatrix rho_s = eigenprojector(Spin(2), Direction(1, 0, 1), 0.0);
  const auto rho0 = SpinorDensity::product(rho_s, grid, gaussian_packet(grid, {}));
  const Trajectory tr = evolve_oracle(rho0, field, {0.01, 100, Scheme::SplitStepStrang, 100});
  Eigen::MatrixXcd sx, sy, sz;
  oracle::spin_matrices(2, sx, sy, sz);
  const Eigen::MatrixXcd h = -0.8 * (b.x() * sx + b.y() * sy + b.z() * sz);
  const Eigen::MatrixXcd expected = oracle::heisenberg(h, rho_s, tr.times.back());
  CHECK((tr.states.back().spin_reduced() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spin coupling matrix reproduces the unitary spin evolution") {
  const SpinFrame frame = build_spin1_frame();
  const Vec3 b(0.3, 0.7, -0.4);
  const double kappa = 1.3;
  const SpinCouplingMatrix s = spin_coupling_matrix(frame, b, kappa);
  CHECK((frame.trace_weights().transpose() * s.entries).cwiseAbs().maxCoeff() < 1e-12);

  const SpinMatrix rho0 = eigenprojector(Spin(2), Direction(0, 1, 1), 1.0);
  std::vector<double> times{0.0, 0.4, 1.7, 5.0};
  const auto w = evolve_spin_weights(s, frame.weights(rho0), times);
  Eigen::MatrixXcd sx, sy, sz;
  oracle::spin_matrices(2, sx, sy, sz);
  const Eigen::MatrixXcd h = -kappa * (b.x() * sx + b.y() * sy + b.z() * sz);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::MatrixXcd rho = oracle::heisenberg(h, rho0, times[i]);
    for (std::size_t j = 0; j < frame.size(); ++j)
      CHECK(w[i](j) == doctest::Approx((rho * frame.dequantizer()[j]).trace().real()).epsilon(1e-10));
  }
}

TEST_CASE("Larmor fit recovers a synthetic frequency") {
  const double omega = 1.2345;
  std::vector<double> t;
  Eigen::VectorXd a(801), b(801);
  for (int i = 0; i <= 800; ++i) {
    t.push_back(0.02 * i);
    a(i) = 0.3 + 0.2 * std::cos(omega * t.back()) - 0.1 * std::sin(2 * omega * t.back());
    b(i) = 0.5 * std::sin(omega * t.back() + 0.3);
  }
  const LarmorFit fit = fit_larmor(t, {a, b}, 2);
  CHECK(fit.omega == doctest::Approx(omega).epsilon(1e-9));
  CHECK(fit.rms_residual < 1e-9);
}

TEST_CASE("vector Wigner solver: free shear against the closed form") {
  const PhaseSpaceGrid grid = grid_with(128, 12.0);
  const GaussianPacket g{-1.0, 0.8, 1.0};
  const SpinMatrix rho_s = eigenprojector(Spin(2), Direction::y(), 1.0);
  const auto rho0 = SpinorDensity::product(rho_s, grid, gaussian_packet(grid, g));
  const auto frame = std::make_shared<const SpinFrame>(build_spin1_frame());
  const VectorDistribution v0 = to_vector(rho0, frame, Representation::Wigner);
  const EMFieldConfig field = EMFieldConfig::constant(Eigen::Vector3d::Zero(), 0.0, Vec3::Zero());
  const VectorTrajectory vt = evolve_wigner_vector(v0, field, {0.1, 20, Scheme::WignerSpectral, 10});
  const oracle::Packet o{g.q0, g.p0, g.width, 1.0};
  const auto lat = grid.lattice();
  double err = 0.0;
  for (const auto& fr : vt.frames) {
    for (std::size_t j = 0; j < 9; ++j) {
      const double wj = (rho_s * frame->dequantizer()[j]).trace().real();
      for (int i = 0; i < lat.nq; ++i)
        for (int m = 0; m < lat.np; ++m)
          err = std::max(err, std::abs(fr.components[j](i, m) -
                                       wj * oracle::free_wigner(o, lat.q(i), lat.p(m), fr.time, 1.0)));
    }
  }
  CHECK(err < 1e-6);
  CHECK(vt.frames.back().time == doctest::Approx(2.0));
}

TEST_CASE("vector Wigner solver preconditions") {
  const PhaseSpaceGrid grid = grid_with(32);
  const auto rho0 = SpinorDensity::product(eigenprojector(Spin(2), Direction::z(), 1.0), grid,
                                           gaussian_packet(grid, {}));
  const auto v0 = to_vector(rho0, std::make_shared<const SpinFrame>(build_spin1_frame()),
                            Representation::Wigner);
  EMFieldConfig field = EMFieldConfig::harmonic(1.0, 1.0);
  CHECK_THROWS_AS(evolve_wigner_vector(v0, field, {0.1, 2, Scheme::SplitStepStrang, 1}),
                  SchemeMismatch);
  CHECK_THROWS_AS(evolve_oracle(rho0, field, {0.1, 2, Scheme::WignerSpectral, 1}), SchemeMismatch);
  field.phi_extra = [](double q, double) { return 0.1 * q * q * q * q; };
  CHECK_THROWS_AS(evolve_wigner_vector(v0, field, {0.1, 2, Scheme::WignerSpectral, 1}),
                  UnsupportedOperation);
  field.phi_extra = nullptr;
  field.a_profile = [](double q, double) { return 0.1 * q; };
  CHECK_THROWS_AS(evolve_oracle(rho0, field, {0.1, 2, Scheme::SplitStepStrang, 1}), SchemeMismatch);
}
