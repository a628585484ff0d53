#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "alap/config.hpp"
#include "alap/field.hpp"
#include "alap/maximal.hpp"
#include "alap/nfunction.hpp"
#include "alap/solver.hpp"

namespace alap {

/// One CSV row. ratio = lhs / rhs when rhs > 0, 0 when both vanish, inf
/// when only rhs does.
struct ExperimentRecord {
  std::string lemma_id;
  std::string nf_label;
  int n = 0;  // cells per axis, 0 when no grid is involved
  std::string params;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  bool hard = false;
  bool pass = true;
  std::string flag;
};

ExperimentRecord make_record(std::string lemma_id, std::string nf_label, int n,
                             std::string params, double lhs, double rhs);

void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& rows);

struct SuiteResult {
  std::vector<ExperimentRecord> records;
  /// Fields worth dumping, keyed by file stem.
  std::vector<std::pair<std::string, ScalarField>> fields;
  /// Extra text outputs (such as solver traces), keyed by file name.
  std::vector<std::pair<std::string, std::string>> files;
  int hard_failures = 0;
  bool ok() const { return hard_failures == 0; }
  void add(ExperimentRecord r);
};

// ---------------------------------------------------------------- balls

struct BallSample {
  Index center = 0;  // node of the periodic grid
  double radius = 0.0;
};

/// Centers uniform in [3L/8, 5L/8]^n rounded to multiples of L/64, radii
/// uniform in the configured range, so that one seed picks the same
/// continuum balls at every resolution that is a multiple of 64.
std::vector<BallSample> sample_balls(const Grid& grid, const BallSampling& spec,
                                     std::uint64_t seed);

struct OscillationFit {
  std::vector<double> x;  // r / R
  std::vector<double> y;  // oscillation at r over oscillation at R
  double slope = 0.0;
  double r_squared = 0.0;
  double alpha = 0.0;  // min(1, slope)
  double c2 = 0.0;     // max y / x^alpha
  bool valid = false;  // at least two points and nonzero oscillation
};

/// Log-log fit of r -> avg_{B_r} A(|grad v - (grad v)_r|) on a ball grid,
/// over radii 2h, 2h sqrt2, ... up to R/2.
OscillationFit fit_oscillation_decay(const NFunction& nf, const ScalarField& v);

struct BallComparison {
  BallSample ball;
  SolverReport replacement;
  double energy_v = 0.0;         // int a(|grad v|)|grad v|
  double energy_u = 0.0;         // int a(|grad u|)|grad u|
  double modular_v = 0.0;        // int A(|grad v|)
  double modular_u = 0.0;        // int A(|grad u|)
  double c1 = 0.0;               // sup_{R/2} A(|grad v|) R^n / int A(|grad v|)
  double oscillation_v = 0.0;    // avg A(|grad v - (grad v)_R|)
  double average_A_u = 0.0;      // avg A(|grad u|)
  OscillationFit decay;
};

/// Replaces u on the ball by its A-harmonic extension and measures both.
/// Integrals run over the interior nodes of the ball grid.
BallComparison compare_on_ball(const NFunction& nf, const ScalarField& u,
                               const BallSample& ball, const SolverConfig& cfg);

/// Explicit constants of the comparison inequalities.
double replacement_energy_constant(const NFunction& nf);    // 2^{a1+2}
double replacement_modular_constant(const NFunction& nf);   // (1+a1) 2^{a1+2}
double oscillation_chain_constant(const NFunction& nf);     // (1+a1)^2 2^{2a1+3}

// ---------------------------------------------------------------- oscillation of A

struct OscillationOfA {
  double lhs = 0.0;  // avg_{B_r} |A(|grad u|) - (A(|grad u|))_r|
  double forcing_term = 0.0;   // delta^{-a1(1+a1)} (R/r)^m avg_{B_R} A(|F|)
  double gradient_term = 0.0;  // (delta^{a0+1} + delta^{-a1(1+a1)} (r/R)^alpha) avg_{B_R} A(|grad u|)
  double gamma = 0.0;          // lhs / (forcing_term + gradient_term)
};

OscillationOfA oscillation_of_A(const NFunction& nf, const ScalarField& u,
                                const VectorField& F, Index center, double R,
                                double r, double delta, double alpha);

// ---------------------------------------------------------------- integrability

struct IntegrabilityRatio {
  double modular_gradient = 0.0;  // int B(|grad u|)
  double modular_forcing = 0.0;   // int B(|F|)
  double ratio = 0.0;
  bool converged = false;
  int iters = 0;
};

IntegrabilityRatio integrability_ratio(const NFunctionPair& pair, const VectorField& F,
                                       const SolverConfig& cfg);

// ---------------------------------------------------------------- suites

SuiteResult run_inequality_suite(const ExperimentConfig& cfg);
SuiteResult run_solve(const ExperimentConfig& cfg);
SuiteResult run_comparison_suite(const ExperimentConfig& cfg);
SuiteResult run_lemma24(const ExperimentConfig& cfg);
SuiteResult run_theorem11(const ExperimentConfig& cfg);
SuiteResult run_maximal(const ExperimentConfig& cfg);

}  // namespace alap
