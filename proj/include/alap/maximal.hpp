#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "alap/field.hpp"
#include "alap/nfunction.hpp"

namespace alap {

/// Finite set of radii standing in for "all r > 0".
class RadiusSet {
 public:
  /// r_min * ratio^k for every k with r < r_max.
  static RadiusSet geometric(double r_min, double r_max, double ratio = 1.4142135623730951);
  /// From 2h up to (excluding) L/2 on a periodic grid, or the ball radius on
  /// a ball grid.
  static RadiusSet for_grid(const Grid& grid);

  const std::vector<double>& radii() const { return radii_; }
  std::size_t size() const { return radii_.size(); }

 private:
  std::vector<double> radii_;
};

/// Node offsets of every ball in a RadiusSet on a periodic grid, each list in
/// lexicographic order. Membership matches ball_nodes.
class BallStencils {
 public:
  BallStencils(const Grid& grid, const RadiusSet& radii);

  const Grid& grid() const { return grid_; }
  const RadiusSet& radii() const { return radii_; }

  /// max over radii of the mean of |f| on the ball around node.
  double maximal_at(const Eigen::ArrayXd& abs_f, Index node) const;
  /// max over radii of the mean of |f - mean f| on the ball around node.
  double sharp_at(const Eigen::ArrayXd& f, Index node) const;

 private:
  Grid grid_;
  RadiusSet radii_;
  std::vector<std::vector<std::array<int, 3>>> offsets_;
};

ScalarField maximal_fn(const ScalarField& f, const RadiusSet& radii);
ScalarField sharp_fn(const ScalarField& f, const RadiusSet& radii);

/// Single-point versions built on ball_average, valid on any grid. On a ball
/// grid every ball must fit inside the domain.
double maximal_at(const ScalarField& f, const Vec& x0, const RadiusSet& radii);
double sharp_at(const ScalarField& f, const Vec& x0, const RadiusSet& radii);

/// Exponents of the pointwise sharp-function estimate:
///   m     = n + (alpha + n)(1 + a1(1 + a1)) / a0
///   kappa = a1(1 + a1) + m (a1(1 + a1) + a0 + 1) / alpha
struct SharpExponents {
  double alpha = 1.0;
  double m = 0.0;
  double kappa = 0.0;
};
SharpExponents sharp_exponents(const NFunction& nf, int n, double alpha);

struct PointwiseSample {
  Index node = 0;
  double lhs = 0.0;            // (A(|grad u|))#(x)
  double maximal_forcing = 0.0;  // M[A(|F|)](x)
  double maximal_gradient = 0.0; // M[A(|grad u|)](x)
  double rhs_unit = 0.0;       // delta^-kappa M_F + 2 delta^(a0+1) M_grad
  double gamma = 0.0;          // lhs / rhs_unit
};

struct PointwiseReport {
  SharpExponents exponents;
  double delta = 0.5;
  std::vector<PointwiseSample> samples;
  /// Smallest gamma with lhs <= gamma * rhs_unit at every sample.
  double gamma_emp = 0.0;
  bool finite() const;
};

/// Checks (A(|grad u|))# <= gamma (delta^-kappa M[A(|F|)] + 2 delta^(a0+1)
/// M[A(|grad u|)]) at the given nodes of a periodic grid.
PointwiseReport verify_pointwise_sharp(const NFunction& nf, const ScalarField& u,
                                       const VectorField& F, double delta,
                                       double alpha, const std::vector<Index>& nodes,
                                       const RadiusSet& radii);

struct MaximalModularReport {
  double numerator = 0.0;    // h^n sum B(A^-1(M[A(|f|)]))
  double denominator = 0.0;  // h^n sum B(|f|)
  double ratio = 0.0;        // 0 when both vanish
  bool inconsistent = false; // numerator > 0 while denominator == 0
  bool finite() const;
};

MaximalModularReport verify_maximal_modular(const NFunctionPair& pair,
                                            const ScalarField& f,
                                            const RadiusSet& radii);

}  // namespace alap
