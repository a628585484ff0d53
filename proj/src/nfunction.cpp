#include "alap/nfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "alap/quadrature.hpp"

namespace alap {

namespace {

void require_finite_nonneg(double t, const char* what) {
  if (!std::isfinite(t) || t < 0.0) {
    std::ostringstream os;
    os << what << ": argument must be finite and nonnegative, got " << t;
    throw std::domain_error(os.str());
  }
}

IndexPair normalize(IndexPair declared) {
  return {std::min(declared.lower, 1.0 - NFunction::kIndexMargin),
          std::max(declared.upper, 1.0 + NFunction::kIndexMargin)};
}

// Inverts an increasing function f with f(0) = 0 and derivative df.
template <typename F, typename DF>
double invert_increasing(F&& f, DF&& df, double y) {
  if (y == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (f(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2000) throw std::domain_error("inverse: bracket overflow");
  }
  if (lo == 0.0) {
    guard = 0;
    while (f(0.5 * hi) >= y && hi > std::numeric_limits<double>::min()) {
      hi *= 0.5;
      if (++guard > 2000) break;
    }
    lo = 0.5 * hi;
  }
  for (int it = 0; it < 40 && (hi - lo) > 1e-4 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    const double r = f(t) - y;
    if (r == 0.0) break;
    (r < 0.0 ? lo : hi) = t;
    const double d = df(t);
    double next = (d > 0.0) ? t - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * t) break;
  }
  return t;
}

double relative_slack(double lhs, double rhs) {
  const double scale = std::abs(lhs) + std::abs(rhs);
  if (scale == 0.0) return 0.0;
  return (rhs - lhs) / scale;
}

}  // namespace

NFunction::NFunction(std::string label, ScalarFn density,
                     ScalarFn density_derivative, IndexPair declared,
                     ClosedForms closed)
    : label_(std::move(label)),
      density_(std::move(density)),
      density_derivative_(std::move(density_derivative)),
      declared_(declared),
      indices_(normalize(declared)),
      closed_(std::move(closed)) {
  if (!density_ || !density_derivative_) {
    throw std::invalid_argument("NFunction: density and derivative required");
  }
  if (!(declared.lower > 0.0) || !(declared.upper >= declared.lower) ||
      !std::isfinite(declared.upper)) {
    throw std::invalid_argument(
        "NFunction: indices must satisfy 0 < lower <= upper < inf");
  }
}

NFunction NFunction::power(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("power N-function needs 1 < p < inf");
  }
  std::ostringstream label;
  label << "power(p=" << p << ")";
  const double q = p / (p - 1.0);
  ClosedForms closed;
  if (p == 2.0) {
    closed.A = [](double t) { return 0.5 * t * t; };
    closed.A_inverse = [](double y) { return std::sqrt(2.0 * y); };
    closed.conjugate = [](double t) { return 0.5 * t * t; };
    closed.density_inverse = [](double s) { return s; };
    return NFunction(
        label.str(), [](double t) { return t; }, [](double) { return 1.0; },
        {1.0, 1.0}, std::move(closed));
  }
  closed.A = [p](double t) { return std::pow(t, p) / p; };
  closed.A_inverse = [p](double y) { return std::pow(p * y, 1.0 / p); };
  closed.conjugate = [q](double t) { return std::pow(t, q) / q; };
  closed.density_inverse = [p](double s) { return std::pow(s, 1.0 / (p - 1.0)); };
  return NFunction(
      label.str(), [p](double t) { return std::pow(t, p - 1.0); },
      [p](double t) { return (p - 1.0) * std::pow(t, p - 2.0); },
      {p - 1.0, p - 1.0}, std::move(closed));
}

NFunction NFunction::plog(double p, double q) {
  if (!(p > 1.0) || !(q >= 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
    throw std::invalid_argument("plog N-function needs p > 1 and q >= 0");
  }
  std::ostringstream label;
  label << "plog(p=" << p << ",q=" << q << ")";
  constexpr double e = std::numbers::e;
  NFunction nf(
      label.str(),
      [p, q](double t) {
        return std::pow(t, p - 1.0) * std::pow(std::log(e + t), q);
      },
      [p, q](double t) {
        const double L = std::log(e + t);
        return (p - 1.0) * std::pow(t, p - 2.0) * std::pow(L, q) +
               std::pow(t, p - 1.0) * q * std::pow(L, q - 1.0) / (e + t);
      },
      {p - 1.0, p - 1.0 + q});
  const IndexCheck check = check_index_condition(nf, 1e-8, 1e8, 400);
  if (!check.pass) {
    throw std::invalid_argument("plog N-function rejected: index condition fails");
  }
  return nf;
}

NFunction NFunction::without_closed_forms() const {
  return NFunction(label_ + "[numeric]", density_, density_derivative_,
                   declared_);
}

double eval_A_quadrature(const NFunction& nf, double t) {
  require_finite_nonneg(t, "eval_A");
  if (t == 0.0) return 0.0;
  return quad::adaptive_simpson([&nf](double s) { return nf.a(s); }, 0.0, t,
                                1e-10);
}

double eval_A(const NFunction& nf, double t) {
  require_finite_nonneg(t, "eval_A");
  if (nf.closed_forms().A) return nf.closed_forms().A(t);
  return eval_A_quadrature(nf, t);
}

double eval_A_inverse(const NFunction& nf, double y) {
  require_finite_nonneg(y, "eval_A_inverse");
  if (nf.closed_forms().A_inverse) return nf.closed_forms().A_inverse(y);
  return invert_increasing([&nf](double t) { return eval_A(nf, t); },
                           [&nf](double t) { return nf.a(t); }, y);
}

double density_inverse(const NFunction& nf, double s) {
  require_finite_nonneg(s, "density_inverse");
  if (nf.closed_forms().density_inverse) {
    return nf.closed_forms().density_inverse(s);
  }
  return invert_increasing([&nf](double t) { return nf.a(t); },
                           [&nf](double t) { return nf.a_prime(t); }, s);
}

double eval_conjugate(const NFunction& nf, double t) {
  require_finite_nonneg(t, "eval_conjugate");
  if (nf.closed_forms().conjugate) return nf.closed_forms().conjugate(t);
  if (t == 0.0) return 0.0;
  return quad::adaptive_simpson(
      [&nf](double s) { return density_inverse(nf, s); }, 0.0, t, 1e-10);
}

IndexCheck check_index_condition(const NFunction& nf, double t_min,
                                 double t_max, int samples) {
  if (!(t_min > 0.0) || !(t_max > t_min) || samples < 2) {
    throw std::invalid_argument(
        "check_index_condition: need 0 < t_min < t_max and samples >= 2");
  }
  constexpr double kSlack = 1e-8;
  IndexCheck out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();
  const double lmin = std::log(t_min);
  const double step = (std::log(t_max) - lmin) / (samples - 1);
  bool within = true;
  for (int i = 0; i < samples; ++i) {
    const double t = std::exp(lmin + i * step);
    const double at = nf.a(t);
    if (!(at > 0.0)) {
      out.structural_failure = true;
      out.failure_t = t;
      out.pass = false;
      return out;
    }
    const double r = t * nf.a_prime(t) / at;
    if (!std::isfinite(r)) {
      within = false;
      out.max_ratio = std::numeric_limits<double>::infinity();
      continue;
    }
    out.min_ratio = std::min(out.min_ratio, r);
    out.max_ratio = std::max(out.max_ratio, r);
    if (r < nf.declared_indices().lower - kSlack ||
        r > nf.declared_indices().upper + kSlack) {
      within = false;
    }
  }
  out.pass = within;
  return out;
}

bool InequalityReport::pass() const {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const InequalityOutcome& o) { return o.pass(); });
}

const InequalityOutcome& InequalityReport::find(const std::string& id) const {
  for (const auto& o : outcomes) {
    if (o.id == id) return o;
  }
  throw std::out_of_range("no inequality outcome named " + id);
}

InequalityReport check_structural_inequalities(const NFunction& nf, int trials,
                                               double range,
                                               std::uint64_t seed,
                                               double rel_tol) {
  if (trials < 1 || !(range > 0.0)) {
    throw std::invalid_argument(
        "check_structural_inequalities: need trials >= 1 and range > 0");
  }
  const double a0 = nf.declared_indices().lower;
  const double a1 = nf.declared_indices().upper;

  InequalityReport report;
  const char* ids[] = {"A_vs_ta",        "density_young", "density_scaling",
                       "A_scaling",      "doubling"};
  for (const char* id : ids) {
    report.outcomes.push_back({id, std::numeric_limits<double>::infinity(), 0, {}});
  }
  auto record = [&](int which, double s, double t, double lhs, double rhs) {
    auto& o = report.outcomes[which];
    const double slack = relative_slack(lhs, rhs);
    o.worst_slack = std::min(o.worst_slack, slack);
    ++o.checks;
    if (slack < -rel_tol) o.violations.push_back({s, t, slack});
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, range);
  for (int k = 0; k < trials; ++k) {
    double s = unif(rng);
    double t = unif(rng);
    // A few fixed pairs exercise the degenerate and equality cases.
    if (k == 0) { s = 1.0; t = 1.0; }
    if (k == 1) { s = 0.0; }
    if (k == 2) { t = 0.0; }

    const double at = nf.a(t);
    const double as = nf.a(s);
    const double At = eval_A(nf, t);
    const double As = eval_A(nf, s);
    const double Ast = eval_A(nf, s * t);
    const double ast = nf.a(s * t);

    record(0, s, t, t * at / (1.0 + a1), At);
    record(0, s, t, At, t * at);

    record(1, s, t, s * at, s * as + t * at);

    const double lo_d = std::min(std::pow(s, a0), std::pow(s, a1));
    const double hi_d = std::max(std::pow(s, a0), std::pow(s, a1));
    record(2, s, t, lo_d * at, ast);
    record(2, s, t, ast, hi_d * at);

    const double lo_A = std::min(std::pow(s, 1.0 + a0), std::pow(s, 1.0 + a1));
    const double hi_A = std::max(std::pow(s, 1.0 + a0), std::pow(s, 1.0 + a1));
    record(3, s, t, lo_A * At / (1.0 + a1), Ast);
    record(3, s, t, Ast, (1.0 + a1) * hi_A * At);

    record(4, s, t, eval_A(nf, s + t),
           (1.0 + a1) * std::pow(2.0, a1) * (As + At));
  }
  return report;
}

IndexPair composite_indices(const NFunction& A, const NFunction& B,
                            int samples, double t_min, double t_max) {
  if (samples < 2 || !(t_min > 0.0) || !(t_max > t_min)) {
    throw std::invalid_argument("composite_indices: bad sampling range");
  }
  constexpr double kStep = 1e-5;
  auto density = [&](double t) {
    const double s = eval_A_inverse(A, t);
    return B.a(s) / A.a(s);
  };
  IndexPair out{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  const double lmin = std::log(t_min);
  const double step = (std::log(t_max) - lmin) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double t = std::exp(lmin + i * step);
    const double g1 = density(t);
    const double r =
        (density(t * (1.0 + kStep)) - density(t * (1.0 - kStep))) /
        (2.0 * kStep * g1);
    if (!std::isfinite(r)) {
      out.upper = std::numeric_limits<double>::infinity();
      continue;
    }
    out.lower = std::min(out.lower, r);
    out.upper = std::max(out.upper, r);
  }
  return out;
}

NFunctionPair make_pair(NFunction A, NFunction B, int samples) {
  const IndexPair idx = composite_indices(A, B, samples);
  // Below this lower index the composite is numerically indistinguishable
  // from a linear function, whose tail integral diverges.
  constexpr double kMinIndex = 1e-6;
  const bool ok = idx.lower > kMinIndex && std::isfinite(idx.upper);
  return {std::move(A), std::move(B), idx, ok};
}

double eval_composite(const NFunctionPair& pair, double s) {
  return eval_A(pair.B, eval_A_inverse(pair.A, s));
}

double composite_tail_integral(const NFunctionPair& pair, double T) {
  if (!(T >= 1.0) || !std::isfinite(T)) {
    throw std::domain_error("composite_tail_integral: need finite T >= 1");
  }
  // t = e^u turns the slowly decaying tail into a compact integrand.
  return quad::adaptive_simpson(
      [&pair](double u) {
        const double t = std::exp(u);
        return eval_composite(pair, 1.0 / t) * t;
      },
      0.0, std::log(T), 1e-12);
}

}  // namespace alap
