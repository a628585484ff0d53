#pragma once

#include <Eigen/Dense>
#include <complex>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "alap/field.hpp"

namespace alap {

/// Fourier diagonalization of the centered-difference Laplacian on a periodic
/// grid.
///
/// The operator -div grad has symbol sum_k sin^2(2 pi j_k / N_k) / h^2. Its
/// null modes (j_k in {0, N_k/2}) are exactly the parity-class constants
/// removed by remove_periodic_kernel; solves return zero in those modes.
/// Holds an FFT plan cache, so an instance must not be shared across threads.
class PeriodicSpectral {
 public:
  explicit PeriodicSpectral(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const Eigen::ArrayXd& symbol() const { return symbol_; }

  /// u with -div grad u = f, in the gauge of remove_periodic_kernel.
  Eigen::ArrayXd solve_laplacian(const Eigen::ArrayXd& f) const;

  std::vector<std::complex<double>> forward(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd inverse(const std::vector<std::complex<double>>& spectrum) const;

 private:
  void transform(std::vector<std::complex<double>>& data, bool inverse) const;

  Grid grid_;
  Eigen::ArrayXd symbol_;
  double null_threshold_ = 0.0;
  mutable Eigen::FFT<double> fft_;
};

}  // namespace alap
