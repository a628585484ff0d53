#pragma once

#include <iosfwd>
#include <vector>

#include "alap/field.hpp"
#include "alap/nfunction.hpp"

namespace alap {

struct LineSearchParams {
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 40;
};

struct SolverConfig {
  int max_iters = 10000;
  /// Relative to a reference norm (absolute when that vanishes): the load
  /// norm for periodic solves, the initial flux norm over h on balls.
  double residual_tol = 1e-6;
  /// When > 0, |X| is replaced by (|X|^2 + eps^2)^{1/2} for a first solve,
  /// which is then polished with eps = 0. Measured in units of the field scale
  /// (max |F| for periodic solves, max |boundary data| / h on balls).
  double regularization_eps = 0.0;
  LineSearchParams line_search;
  /// |X| at or below this maps to Theta = 0.
  double theta_floor = 1e-14;
  /// Restart the conjugate direction every this many iterations.
  int restart_every = 50;

  void validate() const;
};

/// Relative tolerance 1e-8 for the linear (p = 2) case, 1e-6 otherwise;
/// regularization 1e-8 when a(t)/t blows up at 0.
SolverConfig default_solver_config(const NFunction& nf);

struct SolverReport {
  ScalarField u;
  double residual_norm = 0.0;
  /// Norm the tolerance is relative to (0 means absolute).
  double reference_norm = 0.0;
  std::vector<double> energy_trace;
  std::vector<double> residual_trace;
  int iters = 0;
  bool converged = false;
};

/// J(u) = h^n sum [A(|grad u|) - Theta(F).grad u] on a periodic grid.
double energy(const NFunction& nf, const ScalarField& u, const VectorField& F);

/// r(u) = -div(Theta(grad u) - Theta(F)); the gradient of J in the grid inner
/// product.
ScalarField energy_gradient(const NFunction& nf, const ScalarField& u,
                            const VectorField& F);

/// Minimizes J by nonlinear conjugate gradients (Polak-Ribiere+) with a
/// spectral inverse-Laplacian preconditioner and backtracking line search.
/// The starting point is the spectral solution of the linear problem with the
/// same F; every iterate is projected to the gauge of remove_periodic_kernel.
SolverReport solve_periodic(const NFunction& nf, const VectorField& F,
                            const SolverConfig& cfg);

/// Same, starting from the given guess instead.
SolverReport solve_periodic(const NFunction& nf, const VectorField& F,
                            const SolverConfig& cfg, const ScalarField& initial);

/// h^n sum over interior nodes of A(|grad v|) on a ball grid.
double dirichlet_energy(const NFunction& nf, const ScalarField& v);

/// A-harmonic replacement on a ball grid. Free nodes are interior nodes whose
/// axis neighbors are all interior; every other domain node keeps its value
/// from boundary_data (a ring two nodes deep), and the free values minimize
/// dirichlet_energy. The free values of boundary_data are the starting point,
/// so the returned energy never exceeds the energy of boundary_data.
SolverReport solve_dirichlet_ball(const NFunction& nf,
                                  const ScalarField& boundary_data,
                                  const SolverConfig& cfg);

/// Writes "iter,energy,residual" rows.
void write_trace_csv(std::ostream& os, const SolverReport& report);

}  // namespace alap
