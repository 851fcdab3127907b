// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spintomo/dynamics.hpp"
#include "spintomo/residuals.hpp"

using namespace spintomo;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  std::vector<std::string> notes;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 for none
  Outcome outcome;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::shared_ptr<const SpinFrame> spin1() {
  static const auto f = std::make_shared<const SpinFrame>(build_spin1_frame());
  return f;
}

PhaseSpaceGrid grid_with(int n, double half = 8.0) {
  PhaseSpaceGrid g;
  g.n = n;
  g.q_min = -half;
  g.q_max = half;
  return g;
}

// Worst |sum of the s_z-projector integrals - 1| over every frame produced
// by the dynamical criteria.
double g_norm_dev = 0.0;
int g_norm_frames = 0;

void track(const VectorDistribution& v) {
  g_norm_dev = std::max(g_norm_dev, std::abs(v.integral(0) + v.integral(1) + v.integral(2) - 1.0));
  ++g_norm_frames;
}

void track(const Eigen::VectorXd& w) {
  g_norm_dev = std::max(g_norm_dev, std::abs(w(0) + w(1) + w(2) - 1.0));
  ++g_norm_frames;
}

double max_diff(const VectorDistribution& a, const VectorDistribution& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.components.size(); ++j)
    d = std::max(d, (a.components[j] - b.components[j]).cwiseAbs().maxCoeff());
  return d;
}

Outcome frame_duality() {
  const SpinFrame f = build_spin1_frame();
  const double dual = f.duality_residual();
  const double comp = f.completeness_residual();
  return {dual <= 1e-12 && comp <= 1e-12,
          fmt("duality %.2e, completeness %.2e (limit 1e-12)", dual, comp)};
}

Outcome quantizer_vectors() {
  const SpinFrame f = build_spin1_frame();
  double unit = 0.0;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(9);
    e(k) = 1.0;
    unit = std::max(unit, (f.quantizer_vector(k, k) - e).cwiseAbs().maxCoeff());
  }
  std::map<std::string, double> worst;
  for (const auto& d : compare_with_tabulated(f)) worst[d.item] = std::max(worst[d.item], d.abs_diff);
  Outcome out{unit <= 1e-12, fmt("D(11), D(22), D(33) vs unit vectors %.2e (limit %.0e)", unit, 1e-12)};
  out.notes.push_back("tabulated vs recomputed, max |diff| per item:");
  for (const auto& [item, diff] : worst) out.notes.push_back(item + " " + fmt("%.3e", diff));
  return out;
}

Outcome spin_round_trip() {
  const SpinFrame f = build_spin1_frame();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    Eigen::MatrixXcd a(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = {n(rng), n(rng)};
    SpinMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    worst = std::max(worst, (f.reconstruct(f.weights(rho)) - rho).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, fmt("200 states, max entry error %.2e (limit %.0e)", worst, 1e-12)};
}

Outcome joint_round_trip() {
  const PhaseSpaceGrid grid = grid_with(128);
  const SpinorDensity rho = random_spinor_density(Spin(2), grid, 2, 31);
  const SpinorDensity back = from_vector(to_vector(rho, spin1(), Representation::Wigner));
  double worst = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      worst = std::max(worst, (back.block(j, k) - rho.block(j, k)).cwiseAbs().maxCoeff());
  return {worst <= 1e-10, fmt("rank 2, n = 128, max block error %.2e (limit %.0e)", worst, 1e-10)};
}

Outcome optical_reconstruction() {
  const PhaseSpaceGrid grid = grid_with(128);
  const SpinMatrix rho_s = eigenprojector(Spin(2), Direction(1, 1, 1), 1.0);
  const SpinorDensity rho =
      SpinorDensity::product(rho_s, grid, gaussian_packet(grid, {0.8, -0.6, 1.0}));
  const VectorDistribution v =
      to_vector(rho, spin1(), Representation::Optical, TomogramDomain::optical(grid, 128));
  const double f = fidelity(rho, from_vector(v));
  return {f >= 0.999, fmt("256 x 256 lattice, 128 angles, fidelity %.6f (limit %.3f)", f, 0.999)};
}

Outcome larmor() {
  const SpinFrame& frame = *spin1();
  const Vec3 b(0.8, 0.0, 0.0);
  const double kappa = 1.25, hbar = 1.0, s = 1.0;
  const double omega = kappa * b.norm() / (s * hbar);
  const int per = 200;
  const int n = 10 * per;
  std::vector<double> times(n + 1);
  for (int i = 0; i <= n; ++i) times[i] = 10.0 * 2.0 * M_PI / omega * i / n;
  const SpinMatrix rho0 = eigenprojector(Spin(2), Direction(0.2, 0.3, 1.0), 1.0);
  const auto w = evolve_spin_weights(spin_coupling_matrix(frame, b, kappa, hbar),
                                     frame.weights(rho0), times);

  Eigen::MatrixXcd sx, sy, sz;
  oracle::spin_matrices(2, sx, sy, sz);
  const Eigen::MatrixXcd h = -(kappa / s) * b.x() * sx;
  double vs_oracle = 0.0;
  std::vector<Eigen::VectorXd> series(9, Eigen::VectorXd(n + 1));
  for (int i = 0; i <= n; ++i) {
    const Eigen::MatrixXcd rho = oracle::heisenberg(h, rho0, times[i], hbar);
    for (int j = 0; j < 9; ++j) {
      vs_oracle = std::max(vs_oracle, std::abs(w[i](j) - (rho * frame.dequantizer()[j]).trace().real()));
      series[j](i) = w[i](j);
    }
    track(w[i]);
  }
  const double rel = std::abs(fit_larmor(times, series, 2).omega - omega) / omega;
  return {rel <= 1e-6 && vs_oracle <= 1e-8,
          fmt("frequency rel. error %.2e (limit 1e-6), S w vs exp oracle %.2e (limit 1e-8)", rel,
              vs_oracle)};
}

Outcome moyal_dynamics() {
  // Free shear against the closed-form sheared Gaussian.
  double shear = 0.0;
  {
    const PhaseSpaceGrid grid = grid_with(128, 12.0);
    const GaussianPacket g{-1.0, 0.8, 1.0};
    const SpinMatrix rho_s = eigenprojector(Spin(2), Direction::y(), 1.0);
    const auto rho0 = SpinorDensity::product(rho_s, grid, gaussian_packet(grid, g));
    const auto field = EMFieldConfig::constant(Eigen::Vector3d::Zero(), 0.0, Vec3::Zero());
    const auto vt = evolve_wigner_vector(to_vector(rho0, spin1(), Representation::Wigner), field,
                                         {0.05, 40, Scheme::WignerSpectral, 4});
    const oracle::Packet o{g.q0, g.p0, g.width, 1.0};
    const auto lat = grid.lattice();
    for (const auto& fr : vt.frames) {
      track(fr);
      for (int j = 0; j < 9; ++j) {
        const double wj = (rho_s * spin1()->dequantizer()[j]).trace().real();
        for (int i = 0; i < lat.nq; ++i)
          for (int m = 0; m < lat.np; ++m)
            shear = std::max(shear, std::abs(fr.components[j](i, m) -
                                             wj * oracle::free_wigner(o, lat.q(i), lat.p(m), fr.time, 1.0)));
      }
    }
  }

  const PhaseSpaceGrid grid = grid_with(64);
  const GaussianPacket g{1.0, 0.5, 1.0};
  const auto rho0 = SpinorDensity::product(eigenprojector(Spin(2), Direction::x(), 1.0), grid,
                                           gaussian_packet(grid, g));
  const VectorDistribution v0 = to_vector(rho0, spin1(), Representation::Wigner);

  // One oscillator period returns to the initial distribution.
  double period = 0.0;
  {
    const auto field = EMFieldConfig::harmonic(1.0, 1.0);
    const auto vt = evolve_wigner_vector(v0, field, {2.0 * M_PI / 64, 64, Scheme::WignerSpectral, 8});
    for (const auto& fr : vt.frames) track(fr);
    period = max_diff(vt.frames.back(), v0);
  }

  // Oscillator plus B_z against the spinor oracle mapped frame by frame.
  double combined = 0.0;
  {
    const auto field = EMFieldConfig::harmonic(1.0, 1.0, Vec3(0.0, 0.0, 0.7));
    const auto vt = evolve_wigner_vector(v0, field, {2.0 * M_PI / 64, 64, Scheme::WignerSpectral, 8});
    const Trajectory tr =
        evolve_oracle(rho0, field, {2.0 * M_PI / 6400, 6400, Scheme::SplitStepStrang, 800});
    for (std::size_t f = 0; f < tr.states.size(); ++f) {
      const VectorDistribution ref = to_vector(tr.states[f], spin1(), Representation::Wigner);
      track(ref);
      track(vt.frames[f]);
      combined = std::max(combined, max_diff(vt.frames[f], ref));
      if (f % 4 == 0) {
        track(to_vector(tr.states[f], spin1(), Representation::Husimi));
        track(to_vector(tr.states[f], spin1(), Representation::Optical,
                        TomogramDomain::optical(grid, 64)));
      }
    }
  }
  const bool ok = shear <= 1e-6 && period <= 1e-5 && combined <= 1e-5;
  return {ok, fmt("free shear %.2e (1e-6), period return %.2e (1e-5), ", shear, period) +
                  fmt("oscillator + B_z vs oracle %.2e (1e-5)", combined)};
}

Outcome normalization() {
  return {g_norm_dev <= 1e-8 && g_norm_frames > 0,
          fmt("%.0f frames, max |w1 + w2 + w3 - 1| %.2e (limit 1e-8)", g_norm_frames, g_norm_dev)};
}

Outcome convergence() {
  std::string detail;
  bool ok = true;
  for (auto repr : {Representation::Optical, Representation::SymplecticSection,
                    Representation::Wigner, Representation::Husimi}) {
    ConvergenceOptions o;
    o.representation = repr;
    o.grid = grid_with(64);
    o.field = EMFieldConfig::constant({0.0, 0.0, 1.0}, 0.0, Vec3(0.3, 0.0, 0.7));
    o.spin_state = eigenprojector(Spin(2), Direction::x(), 1.0);
    o.packet = {1.0, 0.5, 1.0};
    o.symplectic_samples = {{1.0, 0.0}, {0.8, 0.4}, {0.6, -0.7}};
    const ConvergenceReport r = convergence_study(o);
    const double ratio = r.ratios.at(0);
    ok = ok && ratio >= 3.0 && ratio <= 5.0;
    detail += std::string(to_string(repr)) + " " + fmt("%.3f", ratio) + ", ";
  }
  return {ok, detail + "window [3, 5]"};
}

Outcome sanity() {
  const PhaseSpaceGrid grid = grid_with(128);
  const SpinorDensity rho = random_spinor_density(Spin(2), grid, 2, 77);
  const VectorDistribution w = to_vector(rho, spin1(), Representation::Wigner);
  const VectorDistribution h = to_vector(rho, spin1(), Representation::Husimi);
  double husimi_min = 0.0, husimi_int = 0.0;
  for (int j = 0; j < 9; ++j) {
    husimi_min = std::min(husimi_min, h.components[j].minCoeff());
    double weight = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        weight += (spin1()->dequantizer()[j](l, k) * rho.block(k, l).trace()).real() * grid.dx();
    husimi_int = std::max(husimi_int, std::abs(h.integral(j) - weight));
  }

  const PhaseSpaceGrid g64 = grid_with(64);
  const SpinMatrix rho_s = eigenprojector(Spin(2), Direction(1, 0, 1), 1.0);
  const auto ground = SpinorDensity::product(rho_s, g64, gaussian_packet(g64, {0.0, 0.0, 1.0}));
  const TomogramDomain dom = TomogramDomain::optical(g64, 64);
  const VectorDistribution t = to_vector(ground, spin1(), Representation::Optical, dom);
  double theta_dev = 0.0;
  for (int j = 0; j < 9; ++j) {
    const double wj = (rho_s * spin1()->dequantizer()[j]).trace().real();
    for (int i = 0; i < dom.theta.size(); ++i)
      for (int m = 0; m < dom.x.size(); ++m)
        theta_dev = std::max(theta_dev, std::abs(t.components[j](m, i) -
                                                 wj * std::exp(-dom.x(m) * dom.x(m)) / std::sqrt(M_PI)));
  }
  const bool ok = w.max_imag_residue <= 1e-12 && husimi_min >= -1e-10 && husimi_int <= 1e-8 &&
                  theta_dev <= 1e-8;
  return {ok, fmt("Wigner imag %.2e (1e-12), Husimi min %.2e (-1e-10), ", w.max_imag_residue, husimi_min) +
                  fmt("Husimi integral error %.2e (1e-8), ground tomogram vs Gaussian %.2e (1e-8)",
                      husimi_int, theta_dev)};
}

}  // namespace

int main() {
  std::vector<std::pair<Criterion, std::function<Outcome()>>> plan = {
      {{1, "frame duality and completeness", 1.0, {}}, frame_duality},
      {{2, "quantizer unit vectors", 1.0, {}}, quantizer_vectors},
      {{3, "spin-only round trip", 1.0, {}}, spin_round_trip},
      {{4, "joint round trip, Wigner route", 5.0, {}}, joint_round_trip},
      {{5, "optical route reconstruction", 30.0, {}}, optical_reconstruction},
      {{7, "Larmor precession", 5.0, {}}, larmor},
      {{8, "vector Moyal dynamics", 120.0, {}}, moyal_dynamics},
      {{6, "normalization conservation", 0.0, {}}, normalization},
      {{9, "residual convergence", 600.0, {}}, convergence},
      {{10, "representation sanity", 0.0, {}}, sanity},
  };
  std::vector<Criterion> done;
  for (auto& [c, fn] : plan) {
    const auto start = std::chrono::steady_clock::now();
    c.outcome = fn();
    c.outcome.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && c.outcome.seconds > c.time_limit) c.outcome.passed = false;
    done.push_back(c);
  }
  std::sort(done.begin(), done.end(), [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failed = 0;
  for (const auto& c : done) {
    std::printf("%s AC%-2d %s: %s; %.2f s", c.outcome.passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.outcome.detail.c_str(), c.outcome.seconds);
    if (c.time_limit > 0.0) std::printf(" (limit %.0f s)", c.time_limit);
    std::printf("\n");
    for (const auto& note : c.outcome.notes) std::printf("      %s\n", note.c_str());
    failed += c.outcome.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", int(done.size()) - failed, done.size());
  return failed == 0 ? 0 : 1;
}
