#include "alap/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace alap {

PeriodicSpectral::PeriodicSpectral(const Grid& grid) : grid_(grid) {
  if (grid.topology() != Topology::periodic) {
    throw std::invalid_argument("PeriodicSpectral needs a periodic grid");
  }
  symbol_.resize(grid.size());
  const double h2 = grid.h() * grid.h();
  for (Index i = 0; i < grid.size(); ++i) {
    const auto c = grid.coords(i);
    double s = 0.0;
    for (int k = 0; k < grid.n(); ++k) {
      const double w = std::sin(2.0 * std::numbers::pi * c[k] / grid.shape()[k]);
      s += w * w;
    }
    symbol_[i] = s / h2;
  }
  null_threshold_ = 1e-12 * symbol_.maxCoeff();
}

void PeriodicSpectral::transform(std::vector<std::complex<double>>& data,
                                 bool inverse) const {
  std::vector<std::complex<double>> line;
  std::vector<std::complex<double>> out;
  for (int axis = 0; axis < grid_.n(); ++axis) {
    const int len = grid_.shape()[axis];
    const Index stride = grid_.stride(axis);
    line.resize(len);
    for (Index base = 0; base < grid_.size(); ++base) {
      if (grid_.coords(base)[axis] != 0) continue;
      for (int j = 0; j < len; ++j) line[j] = data[base + j * stride];
      if (inverse) {
        fft_.inv(out, line);
      } else {
        fft_.fwd(out, line);
      }
      for (int j = 0; j < len; ++j) data[base + j * stride] = out[j];
    }
  }
}

std::vector<std::complex<double>> PeriodicSpectral::forward(
    const Eigen::ArrayXd& f) const {
  std::vector<std::complex<double>> data(f.data(), f.data() + f.size());
  transform(data, false);
  return data;
}

Eigen::ArrayXd PeriodicSpectral::inverse(
    const std::vector<std::complex<double>>& spectrum) const {
  std::vector<std::complex<double>> data = spectrum;
  transform(data, true);
  Eigen::ArrayXd out(grid_.size());
  for (Index i = 0; i < grid_.size(); ++i) out[i] = data[i].real();
  return out;
}

Eigen::ArrayXd PeriodicSpectral::solve_laplacian(const Eigen::ArrayXd& f) const {
  if (f.size() != grid_.size()) throw std::invalid_argument("size mismatch");
  auto spec = forward(f);
  for (Index i = 0; i < grid_.size(); ++i) {
    spec[i] = symbol_[i] > null_threshold_ ? spec[i] / symbol_[i] : 0.0;
  }
  return inverse(spec);
}

}  // namespace alap
