#include "alap/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "alap/spectral.hpp"

namespace alap {

void SolverConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (restart_every < 1) throw std::invalid_argument("restart_every must be >= 1");
  if (line_search.max_backtracks < 0) {
    throw std::invalid_argument("max_backtracks must be >= 0");
  }
  if (!(residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be > 0");
  if (!(regularization_eps >= 0.0)) {
    throw std::invalid_argument("regularization_eps must be >= 0");
  }
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw std::invalid_argument("line search shrink factor must lie in (0, 1)");
  }
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw std::invalid_argument("sufficient decrease constant must lie in (0, 1)");
  }
}

SolverConfig default_solver_config(const NFunction& nf) {
  SolverConfig cfg;
  const auto& d = nf.declared_indices();
  cfg.residual_tol = (d.lower == 1.0 && d.upper == 1.0) ? 1e-8 : 1e-6;
  if (d.lower < 1.0) cfg.regularization_eps = 1e-8;
  return cfg;
}

namespace {

// Minimization problem over the free entries of a node-value array.
struct Problem {
  const NFunction& nf;
  const CenteredDifference& D;
  Eigen::MatrixXd theta_load;     // n x |eval|, may be empty
  Eigen::ArrayXd free_mask;       // 1 on unknowns, 0 on pinned nodes
  std::function<Eigen::ArrayXd(const Eigen::ArrayXd&)> precondition;
  std::function<void(Eigen::ArrayXd&)> gauge;
  double eps = 0.0;
  double floor = 0.0;

  double weight() const { return D.grid().cell_volume(); }

  double dot(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) const {
    return weight() * (a * b * free_mask).sum();
  }
  double norm(const Eigen::ArrayXd& a) const { return std::sqrt(dot(a, a)); }

  // Returns J and writes |A part| + |load part| to scale.
  double energy(const Eigen::ArrayXd& u, double* scale = nullptr) const {
    const Eigen::MatrixXd G = D.apply(u);
    double a_part = 0.0;
    double load_part = 0.0;
    for (Index e = 0; e < G.cols(); ++e) {
      const double r = G.col(e).norm();
      a_part += eval_A(nf, eps > 0.0 ? std::hypot(r, eps) : r);
      if (theta_load.size() > 0) load_part += theta_load.col(e).dot(G.col(e));
    }
    if (scale) *scale = weight() * (std::abs(a_part) + std::abs(load_part));
    return weight() * (a_part - load_part);
  }

  Eigen::ArrayXd residual(const Eigen::ArrayXd& u) const {
    Eigen::MatrixXd W = D.apply(u);
    for (Index e = 0; e < W.cols(); ++e) {
      const double r = W.col(e).norm();
      const double s = eps > 0.0 ? std::hypot(r, eps) : r;
      const double factor = (s <= floor || s == 0.0) ? 0.0 : nf.a(s) / s;
      W.col(e) *= factor;
    }
    if (theta_load.size() > 0) W -= theta_load;
    return D.adjoint(W) * free_mask;
  }
};

struct Outcome {
  Eigen::ArrayXd u;
  double residual_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

Outcome minimize(const Problem& P, Eigen::ArrayXd u, double abs_tol,
                 const SolverConfig& cfg, SolverReport& trace) {
  const auto& ls = cfg.line_search;
  P.gauge(u);
  Eigen::ArrayXd r = P.residual(u);
  Eigen::ArrayXd z = P.precondition(r);
  Eigen::ArrayXd d = -z;
  double rz = P.dot(r, z);
  double scale = 0.0;
  double J = P.energy(u, &scale);
  double alpha_prev = 1.0;
  Outcome out;
  out.residual_norm = P.norm(r);
  trace.energy_trace.push_back(J);
  trace.residual_trace.push_back(out.residual_norm);

  for (int it = 0;; ++it) {
    out.residual_norm = P.norm(r);
    out.iters = it;
    if (out.residual_norm <= abs_tol) {
      out.converged = true;
      break;
    }
    if (it >= cfg.max_iters) break;

    double slope = P.dot(r, d);
    if (!(slope < 0.0)) {
      d = -z;
      slope = -rz;
    }
    if (!(slope < 0.0)) break;

    // Secant estimate of the minimizer along d from a probe step.
    const double probe = alpha_prev;
    Eigen::ArrayXd r_probe = P.residual(u + probe * d);
    const double s_probe = P.dot(r_probe, d);
    double alpha = s_probe > slope ? probe * (-slope) / (s_probe - slope)
                                   : 2.0 * probe;
    if (!std::isfinite(alpha)) throw std::runtime_error("solver: NaN in line search");

    bool accepted = false;
    Eigen::ArrayXd u_new;
    double J_new = 0.0;
    double scale_new = 0.0;
    for (int bt = 0; bt <= ls.max_backtracks; ++bt) {
      u_new = u + alpha * d;
      J_new = P.energy(u_new, &scale_new);
      if (!std::isfinite(J_new)) throw std::runtime_error("solver: NaN in line search");
      if (J_new <= J + ls.sufficient_decrease * alpha * slope ||
          J_new <= J + 1e-14 * scale) {
        accepted = true;
        break;
      }
      alpha *= ls.shrink;
    }
    if (!accepted) break;

    const bool reuse = (alpha == probe);
    P.gauge(u_new);
    u = std::move(u_new);
    J = J_new;
    scale = scale_new;
    Eigen::ArrayXd r_new = reuse ? std::move(r_probe) : P.residual(u);
    Eigen::ArrayXd z_new = P.precondition(r_new);
    double beta = 0.0;
    if ((it + 1) % cfg.restart_every != 0 && rz > 0.0) {
      beta = std::max(0.0, P.dot(r_new, z_new - z) / rz);
    }
    d = -z_new + beta * d;
    r = std::move(r_new);
    z = std::move(z_new);
    rz = P.dot(r, z);
    alpha_prev = alpha;
    trace.energy_trace.push_back(J);
    trace.residual_trace.push_back(P.norm(r));
  }
  out.u = std::move(u);
  return out;
}

Eigen::MatrixXd theta_matrix(const NFunction& nf, const Eigen::MatrixXd& X,
                             double floor) {
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Index i = 0; i < X.cols(); ++i) {
    const double r = X.col(i).norm();
    out.col(i) = (r <= floor || r == 0.0) ? Eigen::VectorXd::Zero(X.rows())
                                          : Eigen::VectorXd(nf.a(r) / r * X.col(i));
  }
  return out;
}

SolverReport run(Problem& P, Eigen::ArrayXd u0, double reference,
                 double field_scale, const SolverConfig& cfg, const Grid& grid) {
  SolverReport report{ScalarField::zeros(grid), 0.0, 0.0, {}, {}, 0, false};
  const double abs_tol = reference > 0.0 ? cfg.residual_tol * reference : cfg.residual_tol;
  int iters = 0;
  if (cfg.regularization_eps > 0.0) {
    P.eps = cfg.regularization_eps * field_scale;
    Outcome pre = minimize(P, std::move(u0), abs_tol, cfg, report);
    iters += pre.iters;
    u0 = std::move(pre.u);
    P.eps = 0.0;
  }
  Outcome fin = minimize(P, std::move(u0), abs_tol, cfg, report);
  report.u = ScalarField(grid, std::move(fin.u));
  report.residual_norm = fin.residual_norm;
  report.reference_norm = reference;
  report.iters = iters + fin.iters;
  report.converged = fin.converged;
  return report;
}

}  // namespace

double energy(const NFunction& nf, const ScalarField& u, const VectorField& F) {
  if (!(u.grid() == F.grid()) || u.grid().topology() != Topology::periodic) {
    throw std::invalid_argument("energy: u and F must share a periodic grid");
  }
  const CenteredDifference D(u.grid());
  const Problem P{nf, D, theta_matrix(nf, F.values(), 0.0),
                  Eigen::ArrayXd::Ones(u.grid().size()), {}, {}};
  return P.energy(u.values());
}

ScalarField energy_gradient(const NFunction& nf, const ScalarField& u,
                            const VectorField& F) {
  if (!(u.grid() == F.grid()) || u.grid().topology() != Topology::periodic) {
    throw std::invalid_argument("energy_gradient: u and F must share a periodic grid");
  }
  const CenteredDifference D(u.grid());
  const Problem P{nf, D, theta_matrix(nf, F.values(), 0.0),
                  Eigen::ArrayXd::Ones(u.grid().size()), {}, {}};
  return ScalarField(u.grid(), P.residual(u.values()));
}

static SolverReport periodic_solve(const NFunction& nf, const VectorField& F,
                                   const SolverConfig& cfg,
                                   const ScalarField* initial) {
  cfg.validate();
  const Grid& grid = F.grid();
  if (grid.topology() != Topology::periodic) {
    throw std::invalid_argument("solve_periodic needs a periodic grid");
  }
  const CenteredDifference D(grid);
  const PeriodicSpectral spectral(grid);
  const double field_scale = std::max(1.0, F.values().cwiseAbs().maxCoeff());
  Problem P{nf,
            D,
            theta_matrix(nf, F.values(), cfg.theta_floor * field_scale),
            Eigen::ArrayXd::Ones(grid.size()),
            [&spectral](const Eigen::ArrayXd& r) { return spectral.solve_laplacian(r); },
            [&grid](Eigen::ArrayXd& u) { remove_periodic_kernel(grid, u); }};
  P.floor = cfg.theta_floor * field_scale;

  const Eigen::ArrayXd load = D.adjoint(P.theta_load);
  const double reference = std::sqrt(grid.cell_volume() * load.square().sum());
  Eigen::ArrayXd u0 = initial ? initial->values()
                              : spectral.solve_laplacian(D.adjoint(F.values()));
  return run(P, std::move(u0), reference, field_scale, cfg, grid);
}

SolverReport solve_periodic(const NFunction& nf, const VectorField& F,
                            const SolverConfig& cfg) {
  return periodic_solve(nf, F, cfg, nullptr);
}

SolverReport solve_periodic(const NFunction& nf, const VectorField& F,
                            const SolverConfig& cfg, const ScalarField& initial) {
  if (!(initial.grid() == F.grid())) {
    throw std::invalid_argument("solve_periodic: initial guess on a different grid");
  }
  return periodic_solve(nf, F, cfg, &initial);
}

double dirichlet_energy(const NFunction& nf, const ScalarField& v) {
  const CenteredDifference D(v.grid());
  const Problem P{nf, D, {}, Eigen::ArrayXd::Ones(v.grid().size()), {}, {}};
  return P.energy(v.values());
}

SolverReport solve_dirichlet_ball(const NFunction& nf,
                                  const ScalarField& boundary_data,
                                  const SolverConfig& cfg) {
  cfg.validate();
  const Grid& grid = boundary_data.grid();
  if (grid.topology() != Topology::ball) {
    throw std::invalid_argument("solve_dirichlet_ball needs a ball grid");
  }
  const CenteredDifference D(grid);
  // A node is free when every centered difference touching it is evaluated,
  // so affine data solves the discrete problem exactly. The pinned ring is
  // two nodes deep, matching the stencil width.
  std::vector<std::uint8_t> evaluated(static_cast<std::size_t>(grid.size()), 0);
  for (Index e : D.eval_nodes()) evaluated[static_cast<std::size_t>(e)] = 1;
  std::vector<Index> interior;
  for (Index e : D.eval_nodes()) {
    bool all = true;
    for (int k = 0; k < grid.n() && all; ++k) {
      all = evaluated[static_cast<std::size_t>(grid.neighbor(e, k, 1))] &&
            evaluated[static_cast<std::size_t>(grid.neighbor(e, k, -1))];
    }
    if (all) interior.push_back(e);
  }
  if (interior.empty()) throw std::invalid_argument("ball has no free node");

  Eigen::ArrayXd mask = Eigen::ArrayXd::Zero(grid.size());
  std::vector<Index> column(static_cast<std::size_t>(grid.size()), -1);
  for (std::size_t j = 0; j < interior.size(); ++j) {
    mask[interior[j]] = 1.0;
    column[static_cast<std::size_t>(interior[j])] = static_cast<Index>(j);
  }

  // Constant-coefficient Hessian D^T D on the unknowns.
  const double c = 0.5 / grid.h();
  std::vector<Eigen::Triplet<double>> trip;
  for (Index e : D.eval_nodes()) {
    for (int k = 0; k < grid.n(); ++k) {
      const Index nodes[2] = {grid.neighbor(e, k, 1), grid.neighbor(e, k, -1)};
      const double w[2] = {c, -c};
      for (int a = 0; a < 2; ++a) {
        const Index ca = column[static_cast<std::size_t>(nodes[a])];
        if (ca < 0) continue;
        for (int b = 0; b < 2; ++b) {
          const Index cb = column[static_cast<std::size_t>(nodes[b])];
          if (cb >= 0) trip.emplace_back(ca, cb, w[a] * w[b]);
        }
      }
    }
  }
  const auto m = static_cast<Index>(interior.size());
  Eigen::SparseMatrix<double> K(m, m);
  K.setFromTriplets(trip.begin(), trip.end());
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(K);
  if (ldlt->info() != Eigen::Success) {
    throw std::runtime_error("solve_dirichlet_ball: preconditioner factorization failed");
  }

  Problem P{nf,
            D,
            {},
            mask,
            [ldlt, interior, &grid](const Eigen::ArrayXd& r) {
              Eigen::VectorXd b(static_cast<Index>(interior.size()));
              for (std::size_t j = 0; j < interior.size(); ++j) b[static_cast<Index>(j)] = r[interior[j]];
              const Eigen::VectorXd x = ldlt->solve(b);
              Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid.size());
              for (std::size_t j = 0; j < interior.size(); ++j) out[interior[j]] = x[static_cast<Index>(j)];
              return out;
            },
            [](Eigen::ArrayXd&) {}};
  const double scale = std::max(1.0, boundary_data.values().abs().maxCoeff() / grid.h());
  P.floor = cfg.theta_floor * scale;

  // Flux magnitude over h: the size of residual entries before cancellation.
  const Eigen::MatrixXd flux =
      theta_matrix(nf, D.apply(boundary_data.values()), P.floor);
  const double reference =
      std::sqrt(grid.cell_volume() * flux.squaredNorm()) / grid.h();
  return run(P, boundary_data.values(), reference, scale, cfg, grid);
}

void write_trace_csv(std::ostream& os, const SolverReport& report) {
  os << "iter,energy,residual\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.energy_trace.size(); ++i) {
    os << i << ',' << report.energy_trace[i] << ',' << report.residual_trace[i] << '\n';
  }
}

}  // namespace alap
