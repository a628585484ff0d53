#include "alap/forcing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace alap {

void ForcingSpec::validate() const {
  if (bumps < 0) throw std::invalid_argument("bump count must be >= 0");
  if (!(min_width > 0.0 && min_width <= max_width && max_width <= 0.5)) {
    throw std::invalid_argument("bump widths must satisfy 0 < min <= max <= 1/2");
  }
}

namespace {

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double f = std::exp(-1.0 / x);
  const double g = std::exp(-1.0 / (1.0 - x));
  return f / (f + g);
}

struct Bump {
  Vec center;
  double amplitude;
  double width;
};

std::vector<Bump> draw_bumps(int n, double L, const ForcingSpec& spec,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.25 * L, 0.75 * L);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> wid(spec.min_width * L, spec.max_width * L);
  std::vector<Bump> out;
  for (int k = 0; k < spec.bumps; ++k) {
    Bump b{Vec(n), 0.0, 0.0};
    for (int i = 0; i < n; ++i) b.center[i] = pos(rng);
    b.amplitude = amp(rng);
    b.width = wid(rng);
    out.push_back(std::move(b));
  }
  return out;
}

double evaluate(const std::vector<Bump>& bumps, const Vec& x) {
  double s = 0.0;
  for (const Bump& b : bumps) {
    s += b.amplitude * std::exp(-(x - b.center).squaredNorm() / (2.0 * b.width * b.width));
  }
  return s;
}

double box_length(const Grid& grid) {
  if (grid.topology() != Topology::periodic) {
    throw std::invalid_argument("forcing fields live on periodic grids");
  }
  return grid.min_length();
}

}  // namespace

double smooth_cutoff(const Grid& grid, const Vec& x) {
  const double L = box_length(grid);
  double c = 1.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double t = (x[i] - 0.25 * L) / (0.125 * L);
    c *= smooth_step(t) * smooth_step(4.0 - t);
  }
  return c;
}

VectorField bump_forcing(const Grid& grid, const ForcingSpec& spec) {
  spec.validate();
  const double L = box_length(grid);
  std::mt19937_64 rng(spec.seed);
  Eigen::MatrixXd values(grid.n(), grid.size());
  for (int c = 0; c < grid.n(); ++c) {
    const auto bumps = draw_bumps(grid.n(), L, spec, rng);
    for (Index i = 0; i < grid.size(); ++i) {
      const Vec x = grid.position(i);
      values(c, i) = evaluate(bumps, x) * smooth_cutoff(grid, x);
    }
  }
  return VectorField(grid, std::move(values));
}

ScalarField bump_potential(const Grid& grid, const ForcingSpec& spec) {
  spec.validate();
  const double L = box_length(grid);
  std::mt19937_64 rng(spec.seed);
  auto bumps = draw_bumps(grid.n(), L, spec, rng);
  for (Bump& b : bumps) b.amplitude *= b.width;
  Eigen::ArrayXd values(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Vec x = grid.position(i);
    values[i] = evaluate(bumps, x) * smooth_cutoff(grid, x);
  }
  return ScalarField(grid, std::move(values));
}

}  // namespace alap
