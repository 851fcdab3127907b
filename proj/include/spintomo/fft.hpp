#pragma once

// Thin FFTW wrappers over Eigen storage.  Transforms are in place and
// unnormalized; sign = -1 is the forward (e^{-ikx}) direction.

#include <complex>

#include <Eigen/Dense>

namespace spintomo::fft {

constexpr int kForward = -1;
constexpr int kBackward = +1;

void transform(Eigen::VectorXcd& v, int sign);
/// Transforms every column independently.
void transform_columns(Eigen::MatrixXcd& m, int sign);
/// Transforms every row independently.
void transform_rows(Eigen::MatrixXcd& m, int sign);
void transform_2d(Eigen::MatrixXcd& m, int sign);

/// Angular wavenumbers 2*pi*j/length in FFT order (0, 1, ..., n/2-1, -n/2, ..., -1).
Eigen::VectorXd wavenumbers(int n, double length);

/// Spectral derivative of a periodic sampled profile; the Nyquist mode is dropped.
Eigen::VectorXcd derivative(const Eigen::VectorXcd& f, double length);

}  // namespace spintomo::fft
