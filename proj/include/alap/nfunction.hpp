#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace alap {

/// Lower and upper bounds on t a'(t) / a(t).
struct IndexPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// An N-function A(t) = int_0^t a(s) ds described by its density a.
///
/// Two index pairs are kept: the declared one, as supplied by the caller, and
/// the normalized one, widened if necessary so that lower < 1 < upper. Every
/// downstream constant (exponents, explicit factors) uses the normalized pair.
///
/// Optional closed forms replace the numerical routes for A, A^{-1}, the
/// Young conjugate and the density inverse. Instances are immutable and safe
/// to share between threads.
class NFunction {
 public:
  using ScalarFn = std::function<double(double)>;

  struct ClosedForms {
    ScalarFn A;
    ScalarFn A_inverse;
    ScalarFn conjugate;
    ScalarFn density_inverse;
  };

  /// Width of the band forced around 1 by index normalization.
  static constexpr double kIndexMargin = 1e-6;

  NFunction(std::string label, ScalarFn density, ScalarFn density_derivative,
            IndexPair declared, ClosedForms closed = {});

  /// a(t) = t^{p-1}, A(t) = t^p / p.
  static NFunction power(double p);

  /// a(t) = t^{p-1} log(e + t)^q. Admitted only if the sampled index ratio
  /// stays inside [p - 1, p - 1 + q].
  static NFunction plog(double p, double q);

  const std::string& label() const { return label_; }
  double a(double t) const { return density_(t); }
  double a_prime(double t) const { return density_derivative_(t); }

  const IndexPair& declared_indices() const { return declared_; }
  const IndexPair& indices() const { return indices_; }
  double a0() const { return indices_.lower; }
  double a1() const { return indices_.upper; }

  const ClosedForms& closed_forms() const { return closed_; }

  /// Copy of this function with every closed form dropped, forcing the
  /// quadrature and root-finding routes.
  NFunction without_closed_forms() const;

 private:
  std::string label_;
  ScalarFn density_;
  ScalarFn density_derivative_;
  IndexPair declared_;
  IndexPair indices_;
  ClosedForms closed_;
};

/// A(t). Closed form if available, else adaptive Simpson on a with relative
/// tolerance 1e-10. Throws std::domain_error for negative or non-finite t.
double eval_A(const NFunction& nf, double t);

/// Quadrature route for A regardless of closed forms.
double eval_A_quadrature(const NFunction& nf, double t);

/// t >= 0 with A(t) = y, by doubling bracket, bisection and Newton polish.
double eval_A_inverse(const NFunction& nf, double y);

/// a^{-1}(s), the inverse density.
double density_inverse(const NFunction& nf, double s);

/// Young conjugate int_0^t a^{-1}(s) ds.
double eval_conjugate(const NFunction& nf, double t);

struct IndexCheck {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool pass = false;
  /// Set when a(t) vanished at a sampled t > 0.
  bool structural_failure = false;
  double failure_t = 0.0;
};

/// Samples r(t) = t a'(t) / a(t) on a log grid of [t_min, t_max] and checks it
/// against the declared indices with absolute slack 1e-8.
IndexCheck check_index_condition(const NFunction& nf, double t_min,
                                 double t_max, int samples);

struct InequalityViolation {
  double s = 0.0;
  double t = 0.0;
  double slack = 0.0;
};

struct InequalityOutcome {
  std::string id;
  /// Smallest (rhs - lhs) / (|lhs| + |rhs|) seen; 0 when both sides vanish.
  double worst_slack = 0.0;
  int checks = 0;
  std::vector<InequalityViolation> violations;
  bool pass() const { return violations.empty(); }
};

struct InequalityReport {
  std::vector<InequalityOutcome> outcomes;
  bool pass() const;
  const InequalityOutcome& find(const std::string& id) const;
};

/// Random (s, t) in [0, range]^2 checked against the consequences of the
/// index condition: two-sided bound of A by t a(t), the density Young bound,
/// density and A scaling, and the doubling bound A(s + t) <= (1 + a1) 2^a1
/// (A(s) + A(t)). Declared indices are used, which gives the sharpest form.
InequalityReport check_structural_inequalities(const NFunction& nf, int trials,
                                               double range,
                                               std::uint64_t seed = 1,
                                               double rel_tol = 1e-9);

/// A pair (A, B) used by the higher-integrability experiments, together with
/// the observed indices of the composite g = B o A^{-1} regarded as an
/// N-function (index ratio t g''(t) / g'(t)).
struct NFunctionPair {
  NFunction A;
  NFunction B;
  IndexPair composite;
  bool admissible = false;
};

/// Observed (min, max) of t g''(t) / g'(t) for g = B o A^{-1}, where
/// g'(t) = b(A^{-1}(t)) / a(A^{-1}(t)) and g'' is a central difference with
/// relative step 1e-5, sampled on a log grid of [t_min, t_max].
IndexPair composite_indices(const NFunction& A, const NFunction& B,
                            int samples = 200, double t_min = 1e-4,
                            double t_max = 1e4);

/// Builds the pair; admissible iff the composite indices are positive and
/// finite.
NFunctionPair make_pair(NFunction A, NFunction B, int samples = 200);

/// g(s) = B(A^{-1}(s)).
double eval_composite(const NFunctionPair& pair, double s);

/// int_1^T g(1/t) dt.
double composite_tail_integral(const NFunctionPair& pair, double T);

}  // namespace alap
