#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "alap/nfunction.hpp"

namespace alap {

using Vec = Eigen::VectorXd;

/// Theta(X) = a(|X|) X / |X|, extended by 0 for |X| <= floor.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1> theta(
    const NFunction& nf, const Eigen::MatrixBase<Derived>& X,
    double floor = 0.0) {
  using Out = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>;
  if (!X.allFinite()) throw std::domain_error("theta: non-finite input");
  const double r = X.norm();
  if (r <= floor || r == 0.0) return Out::Zero(X.rows());
  return (nf.a(r) / r) * X;
}

/// Both sides of the monotonicity inequality for one pair (X, Y).
///
/// lhs = (Theta(X) - Theta(Y)).(X - Y). The structural right-hand side uses
/// s = (|X|^2 + |Y|^2)^{1/2}; the sum-norm variant uses s = |X| + |Y|.
struct FluxSample {
  Vec X;
  Vec Y;
  double lhs = 0.0;
  double rhs_structural = 0.0;
  double ratio = 0.0;
  double rhs_sum_norm = 0.0;
  double ratio_sum_norm = 0.0;
};

FluxSample monotonicity_ratio(const NFunction& nf, const Vec& X, const Vec& Y);

/// int_0^1 a(|theta_t|) / |theta_t| dt along theta_t = t xi + (1 - t) zeta.
///
/// Panels are graded geometrically toward the point of closest approach to
/// the origin, which keeps the integrable r^{a0 - 1} singularity under
/// control when the segment passes through 0. quad_points is the Gauss rule
/// size per panel.
double kernel_G(const NFunction& nf, const Vec& xi, const Vec& zeta,
                int quad_points = 16);

/// int_0^1 |t xi + (1 - t) zeta|^{p - 2} dt.
double kernel_Fp(double p, const Vec& xi, const Vec& zeta,
                 int quad_points = 16);

/// Observed extremes of a sampled ratio.
struct Band {
  double min = 0.0;
  double max = 0.0;
  int samples = 0;
};

/// Ratio bands of the line kernel against its structural scale.
struct KernelBand {
  /// G / [a(|xi| + |zeta|) / (|xi| + |zeta|)], or F_p against
  /// (|xi|^2 + |zeta|^2)^{(p-2)/2} for the power kernel.
  Band primary;
  /// Same kernel against the other norm.
  Band alternate;
};

/// Deterministic sampler of vector pairs: components uniform on [-R, R] with R
/// cycling through {0.1, 1, 10}, interleaved with axis-aligned, antiparallel,
/// equal and one-sided-zero configurations.
class PairSampler {
 public:
  PairSampler(int n, std::uint64_t seed);
  std::pair<Vec, Vec> next();

 private:
  Vec random_vector(double R);
  int n_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 rng_;
};

KernelBand kernel_g_band(const NFunction& nf, int n, int trials,
                         std::uint64_t seed = 1);
KernelBand kernel_fp_band(double p, int n, int trials, std::uint64_t seed = 1);

/// Infimum (and supremum) of the monotonicity ratio; primary uses the
/// Euclidean scale, alternate the sum norm.
KernelBand monotonicity_band(const NFunction& nf, int n, int trials,
                             std::uint64_t seed = 1);

/// A(|X|) - A(|Y|) - <Theta(Y), X - Y> >= 0 (supporting hyperplane of the
/// convex map X -> A(|X|)).
struct TangentGapReport {
  /// Smallest gap divided by (1 + A(|X|)).
  double min_slack = 0.0;
  int samples = 0;
  std::vector<std::pair<Vec, Vec>> violations;
  bool pass() const { return violations.empty(); }
};

double tangent_gap(const NFunction& nf, const Vec& X, const Vec& Y);
TangentGapReport tangent_gap_check(const NFunction& nf, int n, int trials,
                                   std::uint64_t seed = 1);

/// One sample of the split
///   |A(|X|) - A(|Y|)| <= C3 delta^{-a1(1+a1)} A(|X-Y|)
///                        + C4 delta^{a0+1} (A(|X|) + A(|Y|)),
/// with C3 = (1 + a1) C and C4 = (1 + a1) 2^a1 C3 for the kernel constant C.
struct SplitSample {
  double lhs = 0.0;
  double difference_term = 0.0;  // delta^{-a1(1+a1)} A(|X-Y|)
  double size_term = 0.0;        // delta^{a0+1} (A(|X|) + A(|Y|))
  double c3_needed = 0.0;        // smallest C3 given the formula C4
  double c4_needed = 0.0;        // smallest C4 given the formula C3
};

struct SplitConstants {
  double c3 = 0.0;
  double c4 = 0.0;
};

SplitConstants split_constants(const NFunction& nf, double kernel_upper);

SplitSample difference_split_sample(const NFunction& nf, const Vec& X,
                                    const Vec& Y, double delta,
                                    double kernel_upper);

struct SplitReport {
  SplitConstants formula;
  double worst_c3_needed = 0.0;
  double worst_c4_needed = 0.0;
  int samples = 0;
  bool finite() const {
    return std::isfinite(worst_c3_needed) && std::isfinite(worst_c4_needed);
  }
};

/// kernel_upper is the empirical upper constant of kernel_g_band (primary).
SplitReport difference_split_check(const NFunction& nf, int n, double delta,
                                   int trials, double kernel_upper,
                                   std::uint64_t seed = 1);

}  // namespace alap
