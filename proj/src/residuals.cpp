#include "spintomo/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "spintomo/fft.hpp"

namespace spintomo {

namespace {

using Complex = std::complex<double>;

struct Coefficients {
  double e, m, c1, c2, a;  // a = eA/c
};

Coefficients coefficients(const EMFieldConfig& field, double t) {
  const Eigen::Vector3d phi = field.phi_at(t);
  return {field.charge, field.mass, phi(1), phi(2),
          field.charge / field.light_speed * field.a_at(t)};
}

std::vector<Eigen::MatrixXd> mix(const Eigen::MatrixXd& s, const std::vector<Eigen::MatrixXd>& v) {
  std::vector<Eigen::MatrixXd> out(v.size(), Eigen::MatrixXd::Zero(v[0].rows(), v[0].cols()));
  for (std::size_t j = 0; j < v.size(); ++j) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double w = s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      if (w != 0.0) out[j] += w * v[k];
    }
  }
  return out;
}

Eigen::MatrixXd d_dx_columns(const Eigen::MatrixXd& f, double step) {
  Eigen::MatrixXd out(f.rows(), f.cols());
  for (Eigen::Index c = 0; c < f.cols(); ++c) out.col(c) = ddX(f.col(c), step);
  return out;
}

// d/dtheta of an optical table on a uniform [0, pi) grid via the mirrored
// extension w(X, theta + pi) = w(-X, theta).
Eigen::MatrixXd d_dtheta(const Eigen::MatrixXd& w) {
  const auto nx = w.rows();
  const auto nt = w.cols();
  Eigen::MatrixXcd ext(nx, 2 * nt);
  ext.leftCols(nt) = w.cast<Complex>();
  for (Eigen::Index m = 0; m < nx; ++m) {
    for (Eigen::Index i = 0; i < nt; ++i) ext(m, nt + i) = w(nx - 1 - m, i);
  }
  fft::transform_rows(ext, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(static_cast<int>(2 * nt), 2.0 * M_PI);
  for (Eigen::Index i = 0; i < 2 * nt; ++i) {
    const Complex f = i == nt ? Complex(0.0) : Complex(0.0, k(i)) / static_cast<double>(2 * nt);
    ext.col(i) *= f;
  }
  fft::transform_rows(ext, fft::kBackward);
  return ext.leftCols(nt).real();
}

std::vector<Eigen::MatrixXd> wigner_rhs(const VectorDistribution& v, const Coefficients& k,
                                        const Eigen::MatrixXd& s) {
  const WignerLattice lat = v.grid.lattice();
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::VectorXd ps = lat.ps();
  const Eigen::RowVectorXd vel = ((ps.array() - k.a) / k.m).matrix().transpose();
  const Eigen::VectorXd force = (k.e * (k.c1 + k.c2 * qs.array())).matrix();
  std::vector<Eigen::MatrixXd> out = mix(s, v.components);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const Eigen::MatrixXd& w = v.components[j];
    out[j] -= (lattice_d_dq(lat, w).array().rowwise() * vel.array()).matrix();
    out[j] += (lattice_d_dp(lat, w).array().colwise() * force.array()).matrix();
  }
  return out;
}

std::vector<Eigen::MatrixXd> husimi_rhs(const VectorDistribution& v, const Coefficients& k,
                                        const Eigen::MatrixXd& s) {
  const WignerLattice lat = v.grid.lattice();
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::RowVectorXd ps = lat.ps().transpose();
  const double mw = v.grid.mass * v.grid.omega;
  const double var_q = v.grid.hbar / (2.0 * mw);
  const double var_p = 0.5 * v.grid.hbar * mw;
  std::vector<Eigen::MatrixXd> out = mix(s, v.components);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const Eigen::MatrixXd& w = v.components[j];
    const Eigen::MatrixXd dq = lattice_d_dq(lat, w);
    const Eigen::MatrixXd dp = lattice_d_dp(lat, w);
    const Eigen::MatrixXd dqp = lattice_d_dp(lat, dq);
    out[j] -= (dq.array().rowwise() * (ps.array() / k.m)).matrix();
    out[j] -= (var_p / k.m) * dqp;
    out[j] += (k.e * k.c1) * dp;
    out[j] += (k.e * k.c2) * ((dp.array().colwise() * qs.array()).matrix() + var_q * dqp);
    out[j] += (k.a / k.m) * dq;
  }
  return out;
}

std::vector<Eigen::MatrixXd> optical_rhs(const VectorDistribution& v, const Coefficients& k,
                                         const Eigen::MatrixXd& s) {
  const TomogramDomain& dom = v.domain;
  const double mw = v.grid.mass * v.grid.omega;
  const double step = dom.dx();
  std::vector<Eigen::MatrixXd> out = mix(s, v.components);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const Eigen::MatrixXd& w = v.components[j];
    const Eigen::MatrixXd wx = d_dx_columns(w, step);
    const Eigen::MatrixXd wt = d_dtheta(w);
    const Eigen::MatrixXd euler = w + (wx.array().colwise() * dom.x.array()).matrix();
    for (Eigen::Index i = 0; i < w.cols(); ++i) {
      const double c = std::cos(dom.theta(i));
      const double sn = std::sin(dom.theta(i));
      out[j].col(i) += (mw / k.m) * (c * c * wt.col(i) - sn * c * euler.col(i));
      out[j].col(i) += (k.e / mw) * (k.c1 * sn * wx.col(i) +
                                     k.c2 * (sn * c * euler.col(i) + sn * sn * wt.col(i)));
      out[j].col(i) += (k.a * c / k.m) * wx.col(i);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> symplectic_rhs(const VectorDistribution& v,
                                            const std::vector<Eigen::MatrixXd>& wigner,
                                            const Coefficients& k, const Eigen::MatrixXd& s) {
  const TomogramDomain& dom = v.domain;
  const WignerLattice lat = v.grid.lattice();
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::RowVectorXd ps = lat.ps().transpose();
  std::vector<Eigen::MatrixXd> out = mix(s, v.components);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const PhaseSpaceField qw{v.grid, FieldKind::Wigner,
                             (wigner[j].array().colwise() * qs.array()).matrix()};
    const PhaseSpaceField pw{v.grid, FieldKind::Wigner,
                             (wigner[j].array().rowwise() * ps.array()).matrix()};
    for (std::size_t i = 0; i < dom.symplectic.size(); ++i) {
      const auto [mu, nu] = dom.symplectic[i];
      const auto col = static_cast<Eigen::Index>(i);
      const Eigen::VectorXd d_mu = -ddX(symplectic_section(qw, mu, nu, dom.x).values, dom.dx());
      const Eigen::VectorXd d_nu = -ddX(symplectic_section(pw, mu, nu, dom.x).values, dom.dx());
      const Eigen::VectorXd d_x = ddX(v.components[j].col(col), dom.dx());
      out[j].col(col) += (mu / k.m) * d_nu + (k.e * nu * k.c1 + k.a * mu / k.m) * d_x -
                         (k.e * k.c2 * nu) * d_mu;
    }
  }
  return out;
}

double cell_measure(const VectorDistribution& v) {
  switch (v.representation) {
    case Representation::Wigner:
    case Representation::Husimi: {
      const WignerLattice lat = v.grid.lattice();
      return lat.dq * lat.dp;
    }
    case Representation::Optical:
      return v.domain.dx() * M_PI / static_cast<double>(v.domain.theta.size());
    case Representation::SymplecticSection:
      return v.domain.dx();
  }
  return 1.0;
}

void require_uniform_theta(const TomogramDomain& dom) {
  const auto n = dom.theta.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(dom.theta(i) - M_PI * static_cast<double>(i) / static_cast<double>(n)) > 1e-12) {
      throw InvalidArgument("optical residuals need the uniform angle grid theta_i = pi i / n");
    }
  }
}

}  // namespace

ResidualReport residual_check(const Trajectory& traj, const EMFieldConfig& field,
                              Representation repr, std::shared_ptr<const SpinFrame> frame,
                              const ResidualOptions& options) {
  const std::size_t n_frames = traj.states.size();
  if (n_frames < 3 || traj.times.size() != n_frames) {
    throw InvalidArgument("residual check needs at least 3 frames with matching times");
  }
  const double dt = traj.times[1] - traj.times[0];
  if (!(dt > 0.0)) throw InvalidArgument("frame times must increase");
  for (std::size_t f = 1; f < n_frames; ++f) {
    if (std::abs(traj.times[f] - traj.times[f - 1] - dt) > 1e-9 * dt) {
      throw InvalidArgument("frames must be sampled at a uniform time step");
    }
  }
  if (!field.truncating()) {
    throw UnsupportedOperation(
        "residual operators are exact only for quadratic phi and uniform A, B");
  }
  if (!frame) throw InvalidArgument("residual check needs a frame");
  const bool tomographic =
      repr == Representation::Optical || repr == Representation::SymplecticSection;
  if (tomographic && !options.domain) {
    throw InvalidArgument("tomographic residuals need a domain");
  }
  if (repr == Representation::Optical) require_uniform_theta(*options.domain);

  std::vector<VectorDistribution> v;
  v.reserve(n_frames);
  for (const auto& rho : traj.states) v.push_back(to_vector(rho, frame, repr, options.domain));
  const double cell = cell_measure(v.front());

  ResidualReport report;
  report.representation = repr;
  for (std::size_t f = 1; f + 1 < n_frames; ++f) {
    const double t = traj.times[f];
    const Coefficients k = coefficients(field, t);
    const Eigen::MatrixXd s =
        spin_coupling_matrix(*frame, field.b_at(t), field.kappa, traj.states[f].grid().hbar)
            .entries;
    std::vector<Eigen::MatrixXd> rhs;
    switch (repr) {
      case Representation::Wigner: rhs = wigner_rhs(v[f], k, s); break;
      case Representation::Husimi: rhs = husimi_rhs(v[f], k, s); break;
      case Representation::Optical: rhs = optical_rhs(v[f], k, s); break;
      case Representation::SymplecticSection: {
        const VectorDistribution w = to_vector(traj.states[f], frame, Representation::Wigner);
        rhs = symplectic_rhs(v[f], w.components, k, s);
        break;
      }
    }
    double max_norm = 0.0;
    double sq = 0.0;
    for (std::size_t j = 0; j < rhs.size(); ++j) {
      const Eigen::MatrixXd lhs = (v[f + 1].components[j] - v[f - 1].components[j]) / (2.0 * dt);
      report.max_lhs = std::max(report.max_lhs, lhs.cwiseAbs().maxCoeff());
      const Eigen::MatrixXd r = lhs - rhs[j];
      max_norm = std::max(max_norm, r.cwiseAbs().maxCoeff());
      sq += r.squaredNorm() * cell;
    }
    report.times.push_back(t);
    report.max_norm.push_back(max_norm);
    report.l2_norm.push_back(std::sqrt(sq));
    report.max_residual = std::max(report.max_residual, max_norm);
    report.l2_residual = std::max(report.l2_residual, std::sqrt(sq));
  }
  return report;
}

ConvergenceReport convergence_study(const ConvergenceOptions& options) {
  if (options.levels < 2) throw InvalidArgument("a convergence study needs two levels");
  if (options.n_intervals < 2 || options.oracle_substeps < 1) {
    throw InvalidArgument("need at least two intervals and one oracle substep");
  }
  auto frame = std::make_shared<const SpinFrame>(
      options.field.spin == Spin(2) ? build_spin1_frame() : random_frame(options.field.spin, 0));
  ConvergenceReport report;
  report.representation = options.representation;
  for (int level = 0; level < options.levels; ++level) {
    const int scale = 1 << level;
    PhaseSpaceGrid grid = options.grid;
    grid.n *= scale;
    const double dt = options.dt / scale;
    const SpinorDensity rho0 =
        SpinorDensity::product(options.spin_state, grid, gaussian_packet(grid, options.packet));
    PropagatorConfig prop;
    prop.dt = dt / options.oracle_substeps;
    prop.n_steps = options.n_intervals * scale * options.oracle_substeps;
    prop.record_every = options.oracle_substeps;
    const Trajectory traj = evolve_oracle(rho0, options.field, prop);
    ResidualOptions ro;
    if (options.representation == Representation::Optical) {
      ro.domain = TomogramDomain::optical(grid, options.n_theta * scale);
    } else if (options.representation == Representation::SymplecticSection) {
      ro.domain = TomogramDomain::symplectic_samples(grid, options.symplectic_samples);
    }
    report.dt.push_back(dt);
    report.dx.push_back(grid.dx());
    report.levels.push_back(residual_check(traj, options.field, options.representation, frame, ro));
  }
  for (int level = 0; level + 1 < options.levels; ++level) {
    const ResidualReport& coarse = report.levels[level];
    const ResidualReport& fine = report.levels[level + 1];
    double fine_max = 0.0;
    for (double t : coarse.times) {
      for (std::size_t i = 0; i < fine.times.size(); ++i) {
        if (std::abs(fine.times[i] - t) < 1e-9) fine_max = std::max(fine_max, fine.max_norm[i]);
      }
    }
    report.ratios.push_back(fine_max > 0.0 ? coarse.max_residual / fine_max
                                           : std::numeric_limits<double>::infinity());
  }
  return report;
}

}  // namespace spintomo
