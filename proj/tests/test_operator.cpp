#include <doctest.h>

#include <cmath>

#include "alap/flux.hpp"

using namespace alap;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// Plain composite midpoint rule with many panels.
template <typename F>
double brute_segment(F f, const Vec& xi, const Vec& zeta, int panels = 1000000) {
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double t = (i + 0.5) / panels;
    s += f((t * xi + (1 - t) * zeta).norm());
  }
  return s / panels;
}

}  // namespace

TEST_CASE("theta") {
  const NFunction p2 = NFunction::power(2), p3 = NFunction::power(3);
  CHECK((theta(p2, v2(3, 4)) - v2(3, 4)).norm() == 0.0);
  CHECK(theta(p3, v2(0, 0)).norm() == 0.0);
  CHECK((theta(p3, v2(1, 0)) - v2(1, 0)).norm() < 1e-15);
  CHECK((theta(p3, v2(2, 0)) - v2(4, 0)).norm() < 1e-14);
  CHECK(theta(p3, v2(1e-20, 0), 1e-14).norm() == 0.0);
  CHECK_THROWS_AS(theta(p3, v2(NAN, 0)), std::domain_error);
  const NFunction pl = NFunction::plog(2, 1);
  for (double r : {1e-3, 0.5, 7.0}) {
    const Vec X = v2(0.6 * r, -0.8 * r);
    CHECK(theta(pl, X).norm() == doctest::Approx(pl.a(r)).epsilon(1e-12));
    CHECK(theta(pl, X).dot(X) > 0.0);
  }
}

TEST_CASE("monotonicity ratio by hand") {
  const NFunction p3 = NFunction::power(3);
  CHECK(monotonicity_ratio(p3, v2(1, 0), v2(0, 1)).ratio ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  for (double r : {0.1, 1.0, 5.0}) {
    const FluxSample s = monotonicity_ratio(p3, v2(r, 0), v2(-r, 0));
    CHECK(s.lhs == doctest::Approx(4 * r * r * r).epsilon(1e-12));
    CHECK(s.ratio == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  }
  CHECK(monotonicity_ratio(NFunction::power(2), v2(0.3, 2), v2(-5, 1)).ratio ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(monotonicity_ratio(p3, v2(1, 1), v2(1, 1)), std::invalid_argument);
}

TEST_CASE("kernel G values") {
  const NFunction p3 = NFunction::power(3);
  CHECK(kernel_G(NFunction::power(2), v2(1, 2), v2(-3, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kernel_G(p3, v2(1, 0), v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  // int_0^1 sqrt(t^2 + (1-t)^2) dt = 1/2 + asinh(1) / (2 sqrt 2).
  const double closed = 0.5 + std::asinh(1.0) / (2.0 * std::sqrt(2.0));
  CHECK(closed == doctest::Approx(0.8116).epsilon(1e-4));
  CHECK(kernel_G(p3, v2(1, 0), v2(0, 1)) == doctest::Approx(closed).epsilon(1e-12));
  // Through the origin: int_0^1 |2t - 1| dt = 1/2.
  CHECK(kernel_G(p3, v2(1, 0), v2(-1, 0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_G(p3, v2(0, 0), v2(0, 0)), std::domain_error);

  // Singular integrand r^{a0 - 1} for p = 1.5 against a brute-force oracle.
  const NFunction p15 = NFunction::power(1.5);
  const Vec xi = v2(0.7, 0.2), zeta = v2(-0.3, 0.1);
  const double brute = brute_segment([](double r) { return std::pow(r, -0.5); }, xi, zeta);
  CHECK(kernel_G(p15, xi, zeta) == doctest::Approx(brute).epsilon(1e-5));
}

TEST_CASE("kernel F_p values") {
  CHECK(kernel_Fp(2.0, v2(1, 0), v2(-1, 0)) == 1.0);
  CHECK(kernel_Fp(4.0, v2(1, 0), v2(0, 1)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(kernel_Fp(3.5, v2(2, 0), v2(2, 0)) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-13));
  CHECK_THROWS_AS(kernel_Fp(3.0, v2(0, 0), v2(0, 0)), std::domain_error);
  // Antiparallel through zero with p < 2: int_0^1 |2t - 1|^{-1/2} dt = 2.
  CHECK(kernel_Fp(1.5, v2(1, 0), v2(-1, 0)) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("kernel quadrature converges in the node count") {
  const NFunction pl = NFunction::plog(2, 1);
  PairSampler sampler(2, 5);
  for (int k = 0; k < 200; ++k) {
    const auto [xi, zeta] = sampler.next();
    const double a = kernel_G(pl, xi, zeta, 16);
    const double b = kernel_G(pl, xi, zeta, 32);
    CHECK(std::abs(a - b) <= 1e-9 * std::abs(b));
  }
}

TEST_CASE("kernel bands") {
  const KernelBand one = kernel_g_band(NFunction::power(2), 2, 2000);
  CHECK(one.primary.min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.primary.max == doctest::Approx(1.0).epsilon(1e-12));
  const KernelBand p3 = kernel_g_band(NFunction::power(3), 2, 10000);
  CHECK(p3.primary.min > 0.2);
  CHECK(p3.primary.max <= 1.0 + 1e-12);
  const KernelBand fp = kernel_fp_band(3.0, 3, 2000);
  CHECK(fp.primary.min > 0.0);
  CHECK(std::isfinite(fp.primary.max));
}

TEST_CASE("monotone flux on random pairs") {
  for (const NFunction& nf : {NFunction::power(1.5), NFunction::power(4), NFunction::plog(2, 1)}) {
    const KernelBand b = monotonicity_band(nf, 3, 20000, 9);
    CHECK(b.primary.min > 0.0);
    CHECK(b.alternate.min > 0.0);
  }
}

TEST_CASE("tangent gap") {
  const NFunction p2 = NFunction::power(2);
  CHECK(tangent_gap(p2, v2(0, 1), v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tangent_gap(p2, v2(0.3, 1), v2(0.3, 1)) == doctest::Approx(0.0));
  CHECK(tangent_gap(NFunction::power(3), v2(2, -1), v2(0, 0)) ==
        doctest::Approx(eval_A(NFunction::power(3), std::sqrt(5.0))));
  for (const NFunction& nf : {NFunction::power(1.5), NFunction::power(3), NFunction::plog(2, 1)}) {
    CHECK(tangent_gap_check(nf, 2, 20000).pass());
  }
}

TEST_CASE("difference split") {
  const NFunction p2 = NFunction::power(2);
  const SplitSample same = difference_split_sample(p2, v2(1, 2), v2(1, 2), 0.5, 1.0);
  CHECK(same.lhs == 0.0);
  CHECK(same.c3_needed == 0.0);
  // Y = 0: the inequality holds once delta^{-a1(1+a1)} C3 >= 1.
  const SplitSample zero = difference_split_sample(p2, v2(3, 0), v2(0, 0), 0.5, 1.0);
  CHECK(zero.c3_needed <= std::pow(0.5, p2.a1() * (1 + p2.a1())) * (1 + 1e-12));

  double worst = 0.0;
  for (double t = 0.0; t <= 2.0; t += 0.01) {
    worst = std::max(worst, difference_split_sample(p2, v2(1, 0), v2(0, t), 0.5, 1.0).c3_needed);
  }
  CHECK(std::isfinite(worst));
  const SplitReport rep = difference_split_check(NFunction::power(3), 2, 0.5, 5000, 1.0);
  CHECK(rep.finite());
  CHECK_THROWS_AS(difference_split_sample(p2, v2(1, 0), v2(0, 1), 1.0, 1.0), std::invalid_argument);
}
