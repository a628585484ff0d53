#include "alap/flux.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "alap/quadrature.hpp"

namespace alap {

namespace {

const quad::GaussLegendreRule& cached_rule(int points) {
  thread_local std::map<int, quad::GaussLegendreRule> cache;
  auto it = cache.find(points);
  if (it == cache.end()) {
    it = cache.emplace(points, quad::gauss_legendre(points)).first;
  }
  return it->second;
}

// int_0^1 f(|t xi + (1 - t) zeta|) dt for an integrand that is smooth in r > 0
// but may be singular at r = 0.
template <typename F>
double segment_integral(F&& f, const Vec& xi, const Vec& zeta,
                        int quad_points) {
  if (quad_points < 1) throw std::invalid_argument("quad_points must be >= 1");
  if (!xi.allFinite() || !zeta.allFinite()) {
    throw std::domain_error("segment integral: non-finite input");
  }
  if (xi.norm() == 0.0 && zeta.norm() == 0.0) {
    throw std::domain_error("segment integral: both endpoints are zero");
  }
  const Vec d = xi - zeta;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return f(zeta.norm());

  const double t_proj = -zeta.dot(d) / dd;
  const double dist = (zeta + t_proj * d).norm();
  const double dist2 = dist * dist;
  const double speed = std::sqrt(dd);
  const double tc = std::clamp(t_proj, 0.0, 1.0);
  const double shift = tc - t_proj;
  // Panels are parametrized by the offset s from tc so that panels far
  // smaller than ulp(tc) keep their resolution.
  auto radius = [&](double s) {
    const double u = shift + s;
    return std::sqrt(dist2 + dd * u * u);
  };

  const auto& rule = cached_rule(quad_points);
  // Distance in t from tc to the complex singularities t_proj +- i dist/|d|.
  const double sigma = std::hypot(dist / speed, shift);
  constexpr double kRatio = 0.5;
  constexpr double kFloor = 1e-30;

  double total = 0.0;
  for (int side : {-1, 1}) {
    const double w = side < 0 ? tc : 1.0 - tc;
    if (w <= 0.0) continue;
    auto g = [&](double s) { return f(radius(side * s)); };
    double outer = w;
    while (outer > sigma && outer > kFloor * w) {
      const double inner = outer * kRatio;
      total += quad::gauss_panel(g, inner, outer, rule);
      outer = inner;
    }
    total += quad::gauss_panel(g, 0.0, outer, rule);
  }
  return total;
}

}  // namespace

FluxSample monotonicity_ratio(const NFunction& nf, const Vec& X, const Vec& Y) {
  if (X.size() != Y.size()) throw std::invalid_argument("dimension mismatch");
  if ((X - Y).norm() == 0.0) {
    throw std::invalid_argument("monotonicity_ratio: X == Y is degenerate");
  }
  FluxSample out;
  out.X = X;
  out.Y = Y;
  const Vec diff = X - Y;
  out.lhs = (theta(nf, X) - theta(nf, Y)).dot(diff);
  const double s = std::sqrt(X.squaredNorm() + Y.squaredNorm());
  out.rhs_structural = diff.squaredNorm() * nf.a(s) / s;
  out.ratio = out.lhs / out.rhs_structural;
  const double s1 = X.norm() + Y.norm();
  out.rhs_sum_norm = diff.squaredNorm() * nf.a(s1) / s1;
  out.ratio_sum_norm = out.lhs / out.rhs_sum_norm;
  return out;
}

double kernel_G(const NFunction& nf, const Vec& xi, const Vec& zeta,
                int quad_points) {
  return segment_integral([&nf](double r) { return nf.a(r) / r; }, xi, zeta,
                          quad_points);
}

double kernel_Fp(double p, const Vec& xi, const Vec& zeta, int quad_points) {
  if (!(p > 1.0)) throw std::invalid_argument("kernel_Fp needs p > 1");
  if (p == 2.0) {
    if (xi.norm() == 0.0 && zeta.norm() == 0.0) {
      throw std::domain_error("kernel_Fp: both endpoints are zero");
    }
    return 1.0;
  }
  return segment_integral([p](double r) { return std::pow(r, p - 2.0); }, xi,
                          zeta, quad_points);
}

PairSampler::PairSampler(int n, std::uint64_t seed) : n_(n), rng_(seed) {
  if (n < 1) throw std::invalid_argument("PairSampler: n must be >= 1");
}

Vec PairSampler::random_vector(double R) {
  std::uniform_real_distribution<double> unif(-R, R);
  Vec v(n_);
  for (int i = 0; i < n_; ++i) v[i] = unif(rng_);
  return v;
}

std::pair<Vec, Vec> PairSampler::next() {
  static constexpr double kRadii[] = {0.1, 1.0, 10.0};
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::uint64_t k = counter_++;
  const double R1 = kRadii[pick(rng_)];
  const double R2 = kRadii[pick(rng_)];
  for (;;) {
    Vec xi = random_vector(R1);
    Vec zeta = random_vector(R2);
    switch (k % 8) {
      case 2: {  // axis aligned
        const int axis = static_cast<int>(k / 8 % static_cast<std::uint64_t>(n_));
        const double x = xi[axis];
        const double z = zeta[axis];
        xi.setZero();
        zeta.setZero();
        xi[axis] = x;
        zeta[axis] = z;
        break;
      }
      case 3:  // antiparallel
        zeta = -(k % 16 == 3 ? 1.0 : 2.0 * unit(rng_)) * xi;
        break;
      case 4:
        (k % 16 == 4 ? zeta : xi).setZero();
        break;
      case 5:
        zeta = xi;
        break;
      default:
        break;
    }
    if (xi.norm() > 0.0 || zeta.norm() > 0.0) return {xi, zeta};
  }
}

namespace {

void widen(Band& b, double v) {
  if (b.samples == 0) {
    b.min = b.max = v;
  } else {
    b.min = std::min(b.min, v);
    b.max = std::max(b.max, v);
  }
  ++b.samples;
}

}  // namespace

KernelBand kernel_g_band(const NFunction& nf, int n, int trials,
                         std::uint64_t seed) {
  PairSampler sampler(n, seed);
  KernelBand band;
  for (int k = 0; k < trials; ++k) {
    const auto [xi, zeta] = sampler.next();
    const double G = kernel_G(nf, xi, zeta);
    const double s1 = xi.norm() + zeta.norm();
    const double s2 = std::sqrt(xi.squaredNorm() + zeta.squaredNorm());
    widen(band.primary, G / (nf.a(s1) / s1));
    widen(band.alternate, G / (nf.a(s2) / s2));
  }
  return band;
}

KernelBand kernel_fp_band(double p, int n, int trials, std::uint64_t seed) {
  PairSampler sampler(n, seed);
  KernelBand band;
  for (int k = 0; k < trials; ++k) {
    const auto [xi, zeta] = sampler.next();
    const double F = kernel_Fp(p, xi, zeta);
    const double s2sq = xi.squaredNorm() + zeta.squaredNorm();
    const double s1 = xi.norm() + zeta.norm();
    widen(band.primary, F / std::pow(s2sq, 0.5 * (p - 2.0)));
    widen(band.alternate, F / std::pow(s1, p - 2.0));
  }
  return band;
}

KernelBand monotonicity_band(const NFunction& nf, int n, int trials,
                             std::uint64_t seed) {
  PairSampler sampler(n, seed);
  KernelBand band;
  for (int k = 0; k < trials;) {
    const auto [X, Y] = sampler.next();
    if ((X - Y).norm() == 0.0) continue;
    const FluxSample s = monotonicity_ratio(nf, X, Y);
    widen(band.primary, s.ratio);
    widen(band.alternate, s.ratio_sum_norm);
    ++k;
  }
  return band;
}

double tangent_gap(const NFunction& nf, const Vec& X, const Vec& Y) {
  return eval_A(nf, X.norm()) - eval_A(nf, Y.norm()) - theta(nf, Y).dot(X - Y);
}

TangentGapReport tangent_gap_check(const NFunction& nf, int n, int trials,
                                   std::uint64_t seed) {
  PairSampler sampler(n, seed);
  TangentGapReport out;
  out.min_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    const auto [X, Y] = sampler.next();
    const double slack = tangent_gap(nf, X, Y) / (1.0 + eval_A(nf, X.norm()));
    out.min_slack = std::min(out.min_slack, slack);
    ++out.samples;
    if (slack < -1e-9) out.violations.emplace_back(X, Y);
  }
  return out;
}

SplitConstants split_constants(const NFunction& nf, double kernel_upper) {
  const double a1 = nf.a1();
  const double c3 = (1.0 + a1) * kernel_upper;
  return {c3, (1.0 + a1) * std::pow(2.0, a1) * c3};
}

SplitSample difference_split_sample(const NFunction& nf, const Vec& X,
                                    const Vec& Y, double delta,
                                    double kernel_upper) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  const double a0 = nf.a0();
  const double a1 = nf.a1();
  const SplitConstants c = split_constants(nf, kernel_upper);
  const double AX = eval_A(nf, X.norm());
  const double AY = eval_A(nf, Y.norm());
  SplitSample s;
  s.lhs = std::abs(AX - AY);
  s.difference_term = std::pow(delta, -a1 * (1.0 + a1)) * eval_A(nf, (X - Y).norm());
  s.size_term = std::pow(delta, a0 + 1.0) * (AX + AY);
  auto needed = [&](double rest, double term) {
    const double excess = s.lhs - rest;
    if (excess <= 0.0) return 0.0;
    return term > 0.0 ? excess / term : std::numeric_limits<double>::infinity();
  };
  s.c3_needed = needed(c.c4 * s.size_term, s.difference_term);
  s.c4_needed = needed(c.c3 * s.difference_term, s.size_term);
  return s;
}

SplitReport difference_split_check(const NFunction& nf, int n, double delta,
                                   int trials, double kernel_upper,
                                   std::uint64_t seed) {
  PairSampler sampler(n, seed);
  SplitReport out;
  out.formula = split_constants(nf, kernel_upper);
  for (int k = 0; k < trials; ++k) {
    const auto [X, Y] = sampler.next();
    const SplitSample s = difference_split_sample(nf, X, Y, delta, kernel_upper);
    out.worst_c3_needed = std::max(out.worst_c3_needed, s.c3_needed);
    out.worst_c4_needed = std::max(out.worst_c4_needed, s.c4_needed);
    ++out.samples;
  }
  return out;
}

}  // namespace alap
