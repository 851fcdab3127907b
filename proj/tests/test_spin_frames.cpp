#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spintomo/errors.hpp"
#include "spintomo/spin_frames.hpp"

using namespace spintomo;

namespace {

SpinMatrix random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = {n(rng), n(rng)};
  SpinMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("spin operators satisfy the angular momentum algebra") {
  for (int twice : {1, 2, 3, 4}) {
    const auto s = spin_operators(Spin(twice));
    const double v = 0.5 * twice;
    const Complex i(0.0, 1.0);
    CHECK((s.sx * s.sy - s.sy * s.sx - i * s.sz).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((s.sy * s.sz - s.sz * s.sy - i * s.sx).cwiseAbs().maxCoeff() < 1e-13);
    const SpinMatrix casimir = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
    CHECK((casimir - v * (v + 1) * SpinMatrix::Identity(twice + 1, twice + 1))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    Eigen::MatrixXcd ox, oy, oz;
    oracle::spin_matrices(twice, ox, oy, oz);
    CHECK((s.sx - ox).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((s.sy - oy).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("eigenprojectors are rank-one eigenspace projectors") {
  const Spin spin(2);
  const Direction n(0.3, -0.4, 0.8);
  const SpinMatrix ns = spin_operators(spin).along(n.vec());
  for (double m : {1.0, 0.0, -1.0}) {
    const SpinMatrix p = eigenprojector(spin, n, m);
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(p.trace() - 1.0) < 1e-13);
    CHECK((ns * p - m * p).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK_THROWS_AS(eigenprojector(spin, n, 0.5), InvalidArgument);
  CHECK_THROWS_AS(Direction(0, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(Spin::from_value(0.3), InvalidArgument);
}

TEST_CASE("standard spin-1 frame: duality, completeness, dual by least squares") {
  const SpinFrame f = build_spin1_frame();
  REQUIRE(f.size() == 9);
  CHECK(f.duality_residual() <= 1e-12);
  CHECK(f.completeness_residual() <= 1e-12);
  CHECK(f.quantizer_hermiticity_residual() <= 1e-12);

  // Independent dual: rows vec(U_j^T), solve A X = I column by column.
  Eigen::MatrixXcd a(9, 9);
  for (int j = 0; j < 9; ++j) {
    const SpinMatrix ut = f.dequantizer()[j].transpose();
    for (int e = 0; e < 9; ++e) a(j, e) = ut(e % 3, e / 3);
  }
  const Eigen::MatrixXcd x = a.fullPivLu().solve(Eigen::MatrixXcd::Identity(9, 9));
  for (int k = 0; k < 9; ++k) {
    SpinMatrix d(3, 3);
    for (int e = 0; e < 9; ++e) d(e % 3, e / 3) = x(e, k);
    CHECK((d - f.quantizer()[k]).cwiseAbs().maxCoeff() < 1e-12);
  }

  Eigen::VectorXd expected = Eigen::VectorXd::Zero(9);
  expected.head(3).setOnes();
  CHECK((f.trace_weights() - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.gram_condition_number() < 1e3);
}

TEST_CASE("D(kk) quantizer vectors are unit vectors and tabulated projectors agree") {
  const SpinFrame f = build_spin1_frame();
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(9);
    e(k) = 1.0;
    CHECK((f.quantizer_vector(k, k) - e).cwiseAbs().maxCoeff() <= 1e-12);
  }
  double worst_u = 0.0;
  for (const auto& d : compare_with_tabulated(f)) {
    if (d.item.rfind("U", 0) == 0) worst_u = std::max(worst_u, d.abs_diff);
  }
  CHECK(worst_u <= 1e-12);
}

TEST_CASE("spin-only round trip through the frame") {
  const SpinFrame f = build_spin1_frame();
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const SpinMatrix rho = random_density(3, rng);
    worst = std::max(worst, (f.reconstruct(f.weights(rho)) - rho).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("random frames for other spins") {
  for (int twice : {1, 3}) {
    const SpinFrame f = random_frame(Spin(twice), 11);
    CHECK(f.size() == std::size_t((twice + 1) * (twice + 1)));
    CHECK(f.duality_residual() < 1e-9);
    CHECK(f.gram_condition_number() < 1e6);
    std::mt19937_64 rng(3);
    const SpinMatrix rho = random_density(twice + 1, rng);
    CHECK((f.reconstruct(f.weights(rho)) - rho).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(f.trace_weights().dot(f.weights(rho)) - 1.0) < 1e-9);
  }
  const SpinFrame a = random_frame(Spin(2), 5);
  const SpinFrame b = random_frame(Spin(2), 5);
  CHECK((a.gram() - b.gram()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate frames are rejected") {
  std::vector<Direction> dirs(9, Direction::z());
  std::vector<double> eig{1, 0, -1, 1, 0, -1, 1, 0, -1};
  CHECK_THROWS_AS(SpinFrame(Spin(2), dirs, eig), DegenerateFrame);
  CHECK_THROWS_AS(SpinFrame(Spin(2), std::vector<Direction>(3, Direction::z()), {1, 0, -1}),
                  InvalidArgument);
}
