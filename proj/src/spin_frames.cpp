#include "spintomo/spin_frames.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace spintomo {

namespace {

constexpr double kEigenvalueMatchTol = 1e-9;
constexpr double kMaxDualCondition = 1e12;
constexpr double kRandomFrameCondition = 1e6;
constexpr int kRandomFrameAttempts = 1000;

}  // namespace

Spin Spin::from_value(double s) {
  const double twice = 2.0 * s;
  if (!std::isfinite(s) || s < 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
    std::ostringstream msg;
    msg << "spin must be a non-negative half-integer, got " << s;
    throw InvalidArgument(msg.str());
  }
  return Spin(static_cast<int>(std::lround(twice)));
}

Direction::Direction(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw InvalidArgument("direction must be a finite nonzero 3-vector");
  }
  v_ = v / n;
}

SpinOperators spin_operators(Spin s) {
  if (s.twice() < 0) throw InvalidArgument("negative spin");
  const int d = s.dim();
  const double sv = s.value();
  SpinMatrix raise = SpinMatrix::Zero(d, d);
  SpinMatrix sz = SpinMatrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    const double m = sv - a;
    sz(a, a) = m;
    if (a > 0) raise(a - 1, a) = std::sqrt(sv * (sv + 1.0) - m * (m + 1.0));
  }
  const SpinMatrix lower = raise.adjoint();
  SpinOperators ops;
  ops.sx = 0.5 * (raise + lower);
  ops.sy = Complex(0.0, -0.5) * (raise - lower);
  ops.sz = sz;
  return ops;
}

SpinMatrix eigenprojector(Spin s, const Direction& n, double m) {
  const double sv = s.value();
  const double steps = sv - m;
  if (!std::isfinite(m) || m < -sv - kEigenvalueMatchTol || m > sv + kEigenvalueMatchTol ||
      std::abs(steps - std::round(steps)) > kEigenvalueMatchTol) {
    std::ostringstream msg;
    msg << "spin projection " << m << " is not in {-" << sv << ", ..., " << sv << "}";
    throw InvalidArgument(msg.str());
  }
  const SpinMatrix ns = spin_operators(s).along(n.vec());
  Eigen::SelfAdjointEigenSolver<SpinMatrix> eig(ns);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < vals.size(); ++i) {
    if (std::abs(vals(i) - m) < std::abs(vals(best) - m)) best = i;
  }
  if (std::abs(vals(best) - m) > kEigenvalueMatchTol) {
    throw InvalidArgument("no eigenvalue of n.s matches the requested projection");
  }
  Eigen::VectorXcd v = eig.eigenvectors().col(best);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = Complex(v(i).real(), 0.0);
      break;
    }
  }
  v.normalize();
  return v * v.adjoint();
}

Eigen::MatrixXd frame_gram(const std::vector<SpinMatrix>& dequantizer) {
  const auto n = static_cast<Eigen::Index>(dequantizer.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j; k < n; ++k) {
      g(j, k) = g(k, j) = (dequantizer[j] * dequantizer[k]).trace().real();
    }
  }
  return g;
}

namespace {

double condition_number(const Eigen::MatrixXd& g) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<SpinMatrix> solve_dual_frame(const std::vector<SpinMatrix>& dequantizer) {
  if (dequantizer.empty()) throw InvalidArgument("empty frame");
  const auto d = dequantizer.front().rows();
  if (static_cast<Eigen::Index>(dequantizer.size()) != d * d) {
    std::ostringstream msg;
    msg << "a frame for " << d << "x" << d << " matrices needs " << d * d
        << " elements, got " << dequantizer.size();
    throw InvalidArgument(msg.str());
  }
  for (const auto& u : dequantizer) {
    if (u.rows() != d || u.cols() != d) throw InvalidArgument("frame matrices differ in size");
  }

  const Eigen::MatrixXd g = frame_gram(dequantizer);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxDualCondition)) {
    const Eigen::VectorXd null = svd.matrixV().col(sv.size() - 1);
    std::vector<Eigen::Index> order(null.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return std::abs(null(a)) > std::abs(null(b)); });
    std::ostringstream msg;
    msg << "degenerate frame: Gram condition number " << cond
        << "; near-dependency among elements";
    for (Eigen::Index i = 0; i < null.size() && std::abs(null(order[i])) > 1e-3; ++i) {
      msg << ' ' << order[i] + 1 << " (" << null(order[i]) << ')';
    }
    throw DegenerateFrame(msg.str());
  }

  const Eigen::MatrixXd ginv = g.inverse();
  std::vector<SpinMatrix> dual(dequantizer.size(), SpinMatrix::Zero(d, d));
  for (std::size_t k = 0; k < dequantizer.size(); ++k) {
    for (std::size_t j = 0; j < dequantizer.size(); ++j) {
      dual[k] += ginv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) *
                 dequantizer[j].adjoint();
    }
  }
  return dual;
}

SpinFrame::SpinFrame(Spin s, std::vector<Direction> directions, std::vector<double> eigenvalues)
    : spin_(s), directions_(std::move(directions)), eigenvalues_(std::move(eigenvalues)) {
  const auto n = static_cast<std::size_t>(s.dim() * s.dim());
  if (directions_.size() != n || eigenvalues_.size() != n) {
    std::ostringstream msg;
    msg << "spin " << s.value() << " frame needs " << n << " (direction, eigenvalue) pairs";
    throw InvalidArgument(msg.str());
  }
  dequantizer_.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    dequantizer_.push_back(eigenprojector(s, directions_[j], eigenvalues_[j]));
  }
  quantizer_ = solve_dual_frame(dequantizer_);
  gram_ = frame_gram(dequantizer_);
  trace_weights_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    trace_weights_(static_cast<Eigen::Index>(j)) = quantizer_[j].trace().real();
  }
}

Eigen::VectorXd SpinFrame::weights(const SpinMatrix& rho) const {
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw InvalidArgument("density matrix dimension does not match the frame");
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) {
    w(static_cast<Eigen::Index>(j)) = (rho * dequantizer_[j]).trace().real();
  }
  return w;
}

SpinMatrix SpinFrame::reconstruct(const Eigen::VectorXd& w) const {
  if (w.size() != static_cast<Eigen::Index>(size())) {
    throw InvalidArgument("weight vector length does not match the frame");
  }
  SpinMatrix rho = SpinMatrix::Zero(dim(), dim());
  for (std::size_t j = 0; j < size(); ++j) rho += w(static_cast<Eigen::Index>(j)) * quantizer_[j];
  return rho;
}

Eigen::VectorXcd SpinFrame::quantizer_vector(int k, int l) const {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) v(static_cast<Eigen::Index>(j)) = quantizer_[j](k, l);
  return v;
}

double SpinFrame::duality_residual() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    for (std::size_t k = 0; k < size(); ++k) {
      const Complex t = (dequantizer_[j] * quantizer_[k]).trace();
      worst = std::max(worst, std::abs(t - Complex(j == k ? 1.0 : 0.0, 0.0)));
    }
  }
  return worst;
}

double SpinFrame::completeness_residual() const {
  const int d = dim();
  double worst = 0.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int kp = 0; kp < d; ++kp)
        for (int lp = 0; lp < d; ++lp) {
          Complex sum = 0.0;
          for (std::size_t j = 0; j < size(); ++j) sum += dequantizer_[j](k, l) * quantizer_[j](kp, lp);
          const double target = (l == kp && k == lp) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(sum - target));
        }
  return worst;
}

double SpinFrame::quantizer_hermiticity_residual() const {
  double worst = 0.0;
  for (const auto& dq : quantizer_) worst = std::max(worst, (dq - dq.adjoint()).cwiseAbs().maxCoeff());
  return worst;
}

double SpinFrame::gram_condition_number() const { return condition_number(gram_); }

SpinFrame build_spin1_frame() {
  const double h = 1.0 / std::sqrt(2.0);
  const Direction z = Direction::z();
  const Direction x = Direction::x();
  const Direction xy(h, h, 0.0);
  const Direction yz(0.0, h, h);
  const Direction xz(h, 0.0, h);
  return SpinFrame(Spin(2), {z, z, z, x, x, xy, xy, yz, xz},
                   {1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0});
}

SpinFrame random_frame(Spin s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, s.twice());
  const int n = s.dim() * s.dim();
  for (int attempt = 0; attempt < kRandomFrameAttempts; ++attempt) {
    std::vector<Direction> dirs;
    std::vector<double> eigs;
    dirs.reserve(n);
    eigs.reserve(n);
    for (int j = 0; j < n; ++j) {
      Vec3 v;
      do {
        v = Vec3(normal(rng), normal(rng), normal(rng));
      } while (v.norm() < 1e-6);
      dirs.emplace_back(v);
      eigs.push_back(s.value() - level(rng));
    }
    std::vector<SpinMatrix> projectors;
    projectors.reserve(n);
    for (int j = 0; j < n; ++j) projectors.push_back(eigenprojector(s, dirs[j], eigs[j]));
    if (condition_number(frame_gram(projectors)) < kRandomFrameCondition) {
      return SpinFrame(s, std::move(dirs), std::move(eigs));
    }
  }
  throw FrameSearchFailure("no well-conditioned random frame found in 1000 draws");
}

const TabulatedSpin1Frame& tabulated_spin1_frame() {
  static const TabulatedSpin1Frame table = [] {
    const Complex i(0.0, 1.0);
    const double r2 = std::sqrt(2.0);
    auto m3 = [](std::initializer_list<Complex> e, double scale) {
      SpinMatrix m(3, 3);
      auto it = e.begin();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = scale * *it++;
      return m;
    };
    TabulatedSpin1Frame t;
    t.dequantizer = {
        m3({1, 0, 0, 0, 0, 0, 0, 0, 0}, 1.0),
        m3({0, 0, 0, 0, 1, 0, 0, 0, 0}, 1.0),
        m3({0, 0, 0, 0, 0, 0, 0, 0, 1}, 1.0),
        m3({1, r2, 1, r2, 2, r2, 1, r2, 1}, 0.25),
        m3({1, 0, -1, 0, 0, 0, -1, 0, 1}, 0.5),
        m3({1, 1.0 - i, -i, i + 1.0, 2, 1.0 - i, i, 1.0 + i, 1}, 0.25),
        m3({1, 0, i, 0, 0, 0, -i, 0, 1}, 0.5),
        m3({1, i * r2, 1, -i * r2, 2, -i * r2, 1, i * r2, 1}, 0.25),
        m3({1, -r2, -1, -r2, 2, r2, -1, r2, 1}, 0.25),
    };
    auto vec9 = [](std::initializer_list<Complex> e) {
      Eigen::VectorXcd v(9);
      Eigen::Index k = 0;
      for (const auto& x : e) v(k++) = x;
      return v;
    };
    const double a = (1.0 - r2) / 2.0;
    const double b = 1.0 / (2.0 * r2);
    t.quantizer_vectors = {
        {{0, 0}, vec9({1, 0, 0, 0, 0, 0, 0, 0, 0})},
        {{0, 1}, vec9({-b + i * a, i * a, -b + i * a, (1.0 + i) / r2, (1.0 + i) / r2, -i,
                       -i / 2.0, i / r2, -1.0 / r2})},
        {{0, 2}, vec9({(1.0 - i) / 2.0, 0, (1.0 - i) / 2.0, 0, -1, 0, i, 0, 0})},
        {{1, 1}, vec9({0, 1, 0, 0, 0, 0, 0, 0, 0})},
        {{1, 2}, vec9({-b + i / 2.0, -1.0 / r2 + i / 2.0, -b + i / 2.0, (1.0 + i) / r2, 0, -i,
                       -i / 2.0, -i / r2, 1.0 / r2})},
        {{2, 2}, vec9({0, 0, 1, 0, 0, 0, 0, 0, 0})},
    };
    return t;
  }();
  return table;
}

std::vector<FrameDiffEntry> compare_with_tabulated(const SpinFrame& frame) {
  if (frame.dim() != 3) throw InvalidArgument("tabulated comparison needs a spin-1 frame");
  const auto& tab = tabulated_spin1_frame();
  std::vector<FrameDiffEntry> out;
  for (std::size_t j = 0; j < tab.dequantizer.size(); ++j) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        FrameDiffEntry e;
        e.item = "U" + std::to_string(j + 1);
        e.index = r * 3 + c;
        e.recomputed = frame.dequantizer()[j](r, c);
        e.tabulated = tab.dequantizer[j](r, c);
        e.abs_diff = std::abs(e.recomputed - e.tabulated);
        out.push_back(e);
      }
  }
  for (const auto& [kl, vec] : tab.quantizer_vectors) {
    const Eigen::VectorXcd mine = frame.quantizer_vector(kl.first, kl.second);
    for (Eigen::Index j = 0; j < vec.size(); ++j) {
      FrameDiffEntry e;
      e.item = "D(" + std::to_string(kl.first + 1) + "," + std::to_string(kl.second + 1) + ")";
      e.index = static_cast<int>(j);
      e.recomputed = mine(j);
      e.tabulated = vec(j);
      e.abs_diff = std::abs(e.recomputed - e.tabulated);
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace spintomo
