#include "spintomo/fft.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

namespace spintomo::fft {

namespace {

// Geometry of a (possibly batched) transform: rank, sizes, howmany, stride, dist.
using PlanKey = std::tuple<int, int, int, int, int, int, int>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const auto [rank, n0, n1, howmany, stride, dist, sign] = key;
    const std::size_t span =
        rank == 2 ? static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1)
                  : static_cast<std::size_t>((howmany - 1) * dist + (n0 - 1) * stride + 1);
    auto* scratch = fftw_alloc_complex(span);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (rank == 2) {
      plan = fftw_plan_dft_2d(n0, n1, scratch, scratch, sign, flags);
    } else {
      int n[] = {n0};
      plan = fftw_plan_many_dft(1, n, howmany, scratch, nullptr, stride, dist, scratch, nullptr,
                                stride, dist, sign, flags);
    }
    fftw_free(scratch);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void transform(Eigen::VectorXcd& v, int sign) {
  if (v.size() == 0) return;
  const int n = static_cast<int>(v.size());
  fftw_plan plan = cache().get({1, n, 0, 1, 1, n, sign});
  fftw_execute_dft(plan, as_fftw(v.data()), as_fftw(v.data()));
}

void transform_columns(Eigen::MatrixXcd& m, int sign) {
  if (m.size() == 0) return;
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  fftw_plan plan = cache().get({1, rows, 0, cols, 1, rows, sign});
  fftw_execute_dft(plan, as_fftw(m.data()), as_fftw(m.data()));
}

void transform_rows(Eigen::MatrixXcd& m, int sign) {
  if (m.size() == 0) return;
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  fftw_plan plan = cache().get({1, cols, 0, rows, rows, 1, sign});
  fftw_execute_dft(plan, as_fftw(m.data()), as_fftw(m.data()));
}

void transform_2d(Eigen::MatrixXcd& m, int sign) {
  if (m.size() == 0) return;
  // Column-major rows x cols is row-major cols x rows; a 2-D DFT does not care.
  fftw_plan plan =
      cache().get({2, static_cast<int>(m.cols()), static_cast<int>(m.rows()), 1, 1, 1, sign});
  fftw_execute_dft(plan, as_fftw(m.data()), as_fftw(m.data()));
}

Eigen::VectorXd wavenumbers(int n, double length) {
  Eigen::VectorXd k(n);
  const double base = 2.0 * M_PI / length;
  for (int j = 0; j < n; ++j) k(j) = base * (j < (n + 1) / 2 ? j : j - n);
  return k;
}

Eigen::VectorXcd derivative(const Eigen::VectorXcd& f, double length) {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXcd g = f;
  transform(g, kForward);
  const Eigen::VectorXd k = wavenumbers(n, length);
  for (int j = 0; j < n; ++j) g(j) *= std::complex<double>(0.0, k(j)) / static_cast<double>(n);
  if (n % 2 == 0) g(n / 2) = 0.0;
  transform(g, kBackward);
  return g;
}

}  // namespace spintomo::fft
