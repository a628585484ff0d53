#include "alap/maximal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace alap {

namespace {

constexpr double kContainSlack = 1e-12;  // same as ball_nodes

}  // namespace

RadiusSet RadiusSet::geometric(double r_min, double r_max, double ratio) {
  if (!(r_min > 0.0) || !(ratio > 1.0) || !(r_max > r_min)) {
    throw std::invalid_argument("RadiusSet: need 0 < r_min < r_max and ratio > 1");
  }
  RadiusSet out;
  for (double r = r_min; r < r_max; r *= ratio) out.radii_.push_back(r);
  return out;
}

RadiusSet RadiusSet::for_grid(const Grid& grid) {
  const double r_max = grid.topology() == Topology::periodic ? 0.5 * grid.min_length()
                                                             : grid.radius();
  return geometric(2.0 * grid.h(), r_max);
}

BallStencils::BallStencils(const Grid& grid, const RadiusSet& radii)
    : grid_(grid), radii_(radii) {
  if (grid.topology() != Topology::periodic) {
    throw std::invalid_argument("BallStencils needs a periodic grid");
  }
  const int n = grid.n();
  const double h = grid.h();
  for (double r : radii.radii()) {
    if (!(r < 0.5 * grid.min_length())) {
      throw std::invalid_argument("periodic ball radius must be below L/2");
    }
    const int m = static_cast<int>(std::ceil(r / h));
    const double r2 = r * r * (1.0 + kContainSlack);
    std::vector<std::array<int, 3>> list;
    std::array<int, 3> o{0, 0, 0};
    const int m2 = n == 3 ? m : 0;
    for (o[0] = -m; o[0] <= m; ++o[0]) {
      for (o[1] = -m; o[1] <= m; ++o[1]) {
        for (o[2] = -m2; o[2] <= m2; ++o[2]) {
          double d2 = 0.0;
          for (int k = 0; k < n; ++k) {
            const double d = o[k] * h;
            d2 += d * d;
          }
          if (d2 <= r2) list.push_back(o);
        }
      }
    }
    offsets_.push_back(std::move(list));
  }
}

namespace {

template <typename Visit>
void for_ball(const Grid& g, const std::vector<std::array<int, 3>>& offsets,
              Index node, Visit&& visit) {
  const auto c = g.coords(node);
  const int n = g.n();
  for (const auto& o : offsets) {
    Index idx = 0;
    for (int k = 0; k < n; ++k) {
      int q = c[k] + o[k];
      const int N = g.shape()[k];
      if (q < 0) q += N;
      else if (q >= N) q -= N;
      idx += q * g.stride(k);
    }
    visit(idx);
  }
}

}  // namespace

double BallStencils::maximal_at(const Eigen::ArrayXd& abs_f, Index node) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& offsets : offsets_) {
    double s = 0.0;
    for_ball(grid_, offsets, node, [&](Index i) { s += abs_f[i]; });
    best = std::max(best, s / static_cast<double>(offsets.size()));
  }
  return best;
}

double BallStencils::sharp_at(const Eigen::ArrayXd& f, Index node) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& offsets : offsets_) {
    const auto count = static_cast<double>(offsets.size());
    double s = 0.0;
    for_ball(grid_, offsets, node, [&](Index i) { s += f[i]; });
    const double mean = s / count;
    double dev = 0.0;
    for_ball(grid_, offsets, node, [&](Index i) { dev += std::abs(f[i] - mean); });
    best = std::max(best, dev / count);
  }
  return best;
}

ScalarField maximal_fn(const ScalarField& f, const RadiusSet& radii) {
  const BallStencils st(f.grid(), radii);
  const Eigen::ArrayXd abs_f = f.values().abs();
  Eigen::ArrayXd out(f.grid().size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < out.size(); ++i) out[i] = st.maximal_at(abs_f, i);
  return ScalarField(f.grid(), std::move(out));
}

ScalarField sharp_fn(const ScalarField& f, const RadiusSet& radii) {
  const BallStencils st(f.grid(), radii);
  Eigen::ArrayXd out(f.grid().size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < out.size(); ++i) out[i] = st.sharp_at(f.values(), i);
  return ScalarField(f.grid(), std::move(out));
}

namespace {

void check_window(const Grid& g, const Vec& x0, double r) {
  if (g.topology() != Topology::ball) return;
  if ((x0 - g.center()).norm() + r > g.radius() * (1.0 + kContainSlack)) {
    throw std::invalid_argument("ball does not fit inside the ball grid");
  }
}

}  // namespace

double maximal_at(const ScalarField& f, const Vec& x0, const RadiusSet& radii) {
  const ScalarField abs_f(f.grid(), f.values().abs());
  double best = -std::numeric_limits<double>::infinity();
  for (double r : radii.radii()) {
    check_window(f.grid(), x0, r);
    best = std::max(best, ball_average(abs_f, x0, r));
  }
  return best;
}

double sharp_at(const ScalarField& f, const Vec& x0, const RadiusSet& radii) {
  double best = -std::numeric_limits<double>::infinity();
  for (double r : radii.radii()) {
    check_window(f.grid(), x0, r);
    const double mean = ball_average(f, x0, r);
    const auto nodes = ball_nodes(f.grid(), x0, r);
    double dev = 0.0;
    for (Index i : nodes) dev += std::abs(f[i] - mean);
    best = std::max(best, dev / static_cast<double>(nodes.size()));
  }
  return best;
}

SharpExponents sharp_exponents(const NFunction& nf, int n, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const double a0 = nf.a0();
  const double a1 = nf.a1();
  const double q = a1 * (1.0 + a1);
  SharpExponents e;
  e.alpha = alpha;
  e.m = n + (alpha + n) * (1.0 + q) / a0;
  e.kappa = q + e.m * (q + a0 + 1.0) / alpha;
  return e;
}

bool PointwiseReport::finite() const { return std::isfinite(gamma_emp); }

PointwiseReport verify_pointwise_sharp(const NFunction& nf, const ScalarField& u,
                                       const VectorField& F, double delta,
                                       double alpha, const std::vector<Index>& nodes,
                                       const RadiusSet& radii) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(u.grid() == F.grid())) throw std::invalid_argument("u and F on different grids");
  const Grid& g = u.grid();
  PointwiseReport rep;
  rep.delta = delta;
  rep.exponents = sharp_exponents(nf, g.n(), alpha);

  const Eigen::ArrayXd grad_mod = gradient(u).magnitude();
  const Eigen::ArrayXd forcing_mod = F.magnitude();
  Eigen::ArrayXd A_grad(g.size());
  Eigen::ArrayXd A_forcing(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    A_grad[i] = eval_A(nf, grad_mod[i]);
    A_forcing[i] = eval_A(nf, forcing_mod[i]);
  }
  const BallStencils st(g, radii);
  const double c_forcing = std::pow(delta, -rep.exponents.kappa);
  const double c_grad = 2.0 * std::pow(delta, nf.a0() + 1.0);
  for (Index node : nodes) {
    PointwiseSample s;
    s.node = node;
    s.lhs = st.sharp_at(A_grad, node);
    s.maximal_forcing = st.maximal_at(A_forcing, node);
    s.maximal_gradient = st.maximal_at(A_grad, node);
    s.rhs_unit = c_forcing * s.maximal_forcing + c_grad * s.maximal_gradient;
    if (s.rhs_unit > 0.0) {
      s.gamma = s.lhs / s.rhs_unit;
    } else {
      s.gamma = s.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    rep.gamma_emp = std::max(rep.gamma_emp, s.gamma);
    rep.samples.push_back(s);
  }
  return rep;
}

bool MaximalModularReport::finite() const {
  return !inconsistent && std::isfinite(ratio);
}

MaximalModularReport verify_maximal_modular(const NFunctionPair& pair,
                                            const ScalarField& f,
                                            const RadiusSet& radii) {
  if (!pair.admissible) throw std::invalid_argument("N-function pair is not admissible");
  const Grid& g = f.grid();
  Eigen::ArrayXd A_f(g.size());
  for (Index i = 0; i < g.size(); ++i) A_f[i] = eval_A(pair.A, std::abs(f[i]));
  const ScalarField M = maximal_fn(ScalarField(g, std::move(A_f)), radii);
  MaximalModularReport rep;
  double num = 0.0;
  double den = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    num += eval_A(pair.B, eval_A_inverse(pair.A, M[i]));
    den += eval_A(pair.B, std::abs(f[i]));
  }
  rep.numerator = g.cell_volume() * num;
  rep.denominator = g.cell_volume() * den;
  if (rep.denominator > 0.0) {
    rep.ratio = rep.numerator / rep.denominator;
  } else {
    rep.inconsistent = rep.numerator > 0.0;
    rep.ratio = rep.inconsistent ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return rep;
}

}  // namespace alap
