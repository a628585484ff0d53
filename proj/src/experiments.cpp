#include "alap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "alap/flux.hpp"
#include "alap/forcing.hpp"

namespace alap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Relative slack for comparing two rounded sums.
constexpr double kRoundoff = 1e-12;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string stem(const std::string& label) {
  std::string out;
  for (char c : label) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' ? c : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

template <typename V, typename... Rest>
void put_params(std::ostream& os, const char* key, const V& v, const Rest&... rest) {
  os << key << '=' << v;
  if constexpr (sizeof...(rest) > 0) {
    os << ' ';
    put_params(os, rest...);
  }
}

// "k1=v1 k2=v2 ..."
template <typename... Kv>
std::string params(const Kv&... kv) {
  std::ostringstream os;
  os << std::setprecision(17);
  put_params(os, kv...);
  return os.str();
}

bool within(double lhs, double rhs) { return lhs <= rhs * (1.0 + kRoundoff); }

}  // namespace

ExperimentRecord make_record(std::string lemma_id, std::string nf_label, int n,
                             std::string params, double lhs, double rhs) {
  ExperimentRecord r;
  r.lemma_id = std::move(lemma_id);
  r.nf_label = std::move(nf_label);
  r.n = n;
  r.params = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  if (rhs > 0.0) {
    r.ratio = lhs / rhs;
  } else if (rhs == 0.0) {
    r.ratio = lhs == 0.0 ? 0.0 : kInf;
  } else {
    r.ratio = kNaN;
  }
  return r;
}

void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& rows) {
  os << "lemma_id,nf_label,n,params,lhs,rhs,ratio,seed,hard,pass,flag\n";
  for (const auto& r : rows) {
    os << csv_field(r.lemma_id) << ',' << csv_field(r.nf_label) << ',' << r.n << ','
       << csv_field(r.params) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ','
       << fmt(r.ratio) << ',' << r.seed << ',' << (r.hard ? 1 : 0) << ','
       << (r.pass ? 1 : 0) << ',' << csv_field(r.flag) << '\n';
  }
}

void SuiteResult::add(ExperimentRecord r) {
  if (r.hard && !r.pass) ++hard_failures;
  records.push_back(std::move(r));
}

namespace {

ExperimentRecord hard(ExperimentRecord r, bool pass) {
  r.hard = true;
  r.pass = pass;
  return r;
}

ExperimentRecord flagged(ExperimentRecord r, std::string flag) {
  r.flag = std::move(flag);
  return r;
}

ExperimentRecord seeded(ExperimentRecord r, std::uint64_t seed) {
  r.seed = seed;
  return r;
}

Grid box(const ExperimentConfig& cfg, int cells) {
  return Grid::periodic(cfg.dimension, cells);
}

ForcingSpec forcing_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  ForcingSpec f = cfg.forcing;
  f.seed = seed;
  return f;
}

}  // namespace

// ---------------------------------------------------------------- balls

std::vector<BallSample> sample_balls(const Grid& grid, const BallSampling& spec,
                                     std::uint64_t seed) {
  if (grid.topology() != Topology::periodic) {
    throw std::invalid_argument("balls are sampled on a periodic grid");
  }
  const double L = grid.min_length();
  const double lattice = L / 64.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.375 * L, 0.625 * L);
  std::uniform_real_distribution<double> rad(spec.min_radius * L, spec.max_radius * L);
  std::vector<BallSample> out;
  for (int k = 0; k < spec.count; ++k) {
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < grid.n(); ++i) {
      const double x = std::round(pos(rng) / lattice) * lattice;
      c[i] = static_cast<int>(std::lround(x / grid.h()));
    }
    const double r = std::max(rad(rng), 4.0 * grid.h());
    out.push_back({grid.wrap(c), r});
  }
  return out;
}

namespace {

// Centered gradients on the interior nodes of a ball grid.
struct BallGradient {
  CenteredDifference D;
  Eigen::MatrixXd G;
  std::vector<Index> column;  // node -> column of G, -1 off the interior

  BallGradient(const ScalarField& v) : D(v.grid()), G(D.apply(v.values())) {
    column.assign(static_cast<std::size_t>(v.grid().size()), -1);
    const auto& e = D.eval_nodes();
    for (std::size_t j = 0; j < e.size(); ++j) {
      column[static_cast<std::size_t>(e[j])] = static_cast<Index>(j);
    }
  }

  std::vector<Index> columns_within(double r) const {
    const Grid& g = D.grid();
    std::vector<Index> out;
    for (Index node : ball_nodes(g, g.center(), r)) {
      const Index c = column[static_cast<std::size_t>(node)];
      if (c < 0) throw std::invalid_argument("inner ball reaches the boundary ring");
      out.push_back(c);
    }
    return out;
  }

  // avg over the given columns of A(|G - mean G|).
  double oscillation(const NFunction& nf, const std::vector<Index>& cols) const {
    Vec mean = Vec::Zero(G.rows());
    for (Index c : cols) mean += G.col(c);
    mean /= static_cast<double>(cols.size());
    double s = 0.0;
    for (Index c : cols) s += eval_A(nf, (G.col(c) - mean).norm());
    return s / static_cast<double>(cols.size());
  }

  std::vector<Index> all_columns() const {
    std::vector<Index> out(static_cast<std::size_t>(G.cols()));
    for (Index c = 0; c < G.cols(); ++c) out[static_cast<std::size_t>(c)] = c;
    return out;
  }
};

}  // namespace

OscillationFit fit_oscillation_decay(const NFunction& nf, const ScalarField& v) {
  const Grid& g = v.grid();
  if (g.topology() != Topology::ball) throw std::invalid_argument("decay fit needs a ball grid");
  const BallGradient bg(v);
  const double R = g.radius();
  OscillationFit fit;
  const double outer = bg.oscillation(nf, bg.all_columns());
  for (double r = 2.0 * g.h(); r <= 0.5 * R * (1.0 + kRoundoff); r *= std::sqrt(2.0)) {
    fit.x.push_back(r / R);
    fit.y.push_back(outer > 0.0 ? bg.oscillation(nf, bg.columns_within(r)) / outer : 0.0);
  }
  const std::size_t k = fit.x.size();
  if (k < 2 || !(outer > 0.0)) return fit;
  for (double y : fit.y) {
    if (!(y > 0.0)) return fit;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(fit.x[i]);
    my += std::log(fit.y[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(fit.x[i]) - mx;
    const double dy = std::log(fit.y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.alpha = std::min(1.0, fit.slope);
  fit.valid = fit.alpha > 0.0;
  if (fit.valid) {
    for (std::size_t i = 0; i < k; ++i) {
      fit.c2 = std::max(fit.c2, fit.y[i] / std::pow(fit.x[i], fit.alpha));
    }
  }
  return fit;
}

double replacement_energy_constant(const NFunction& nf) { return std::pow(2.0, nf.a1() + 2.0); }

double replacement_modular_constant(const NFunction& nf) {
  return (1.0 + nf.a1()) * std::pow(2.0, nf.a1() + 2.0);
}

double oscillation_chain_constant(const NFunction& nf) {
  const double a1 = nf.a1();
  return (1.0 + a1) * (1.0 + a1) * std::pow(2.0, 2.0 * a1 + 3.0);
}

BallComparison compare_on_ball(const NFunction& nf, const ScalarField& u,
                               const BallSample& ball, const SolverConfig& cfg) {
  const ScalarField ub = restrict_to_ball(u, ball.center, ball.radius);
  BallComparison out{ball, solve_dirichlet_ball(nf, ub, cfg), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
  const Grid& g = ub.grid();
  const double w = g.cell_volume();
  const BallGradient gu(ub);
  const BallGradient gv(out.replacement.u);
  double e_u = 0.0, e_v = 0.0, m_u = 0.0, m_v = 0.0;
  for (Index c = 0; c < gu.G.cols(); ++c) {
    const double su = gu.G.col(c).norm();
    const double sv = gv.G.col(c).norm();
    e_u += nf.a(su) * su;
    e_v += nf.a(sv) * sv;
    m_u += eval_A(nf, su);
    m_v += eval_A(nf, sv);
  }
  out.energy_u = w * e_u;
  out.energy_v = w * e_v;
  out.modular_u = w * m_u;
  out.modular_v = w * m_v;
  double sup = 0.0;
  for (Index c : gv.columns_within(0.5 * ball.radius)) {
    sup = std::max(sup, eval_A(nf, gv.G.col(c).norm()));
  }
  out.c1 = out.modular_v > 0.0 ? sup * std::pow(ball.radius, g.n()) / out.modular_v : 0.0;
  out.oscillation_v = gv.oscillation(nf, gv.all_columns());
  out.average_A_u = m_u / static_cast<double>(gu.G.cols());
  out.decay = fit_oscillation_decay(nf, out.replacement.u);
  return out;
}

// ---------------------------------------------------------------- oscillation of A

OscillationOfA oscillation_of_A(const NFunction& nf, const ScalarField& u,
                                const VectorField& F, Index center, double R,
                                double r, double delta, double alpha) {
  if (!(r > 0.0 && r < R)) throw std::invalid_argument("need 0 < r < R");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const Grid& g = u.grid();
  const Eigen::ArrayXd grad = gradient(u).magnitude();
  const Eigen::ArrayXd forcing = F.magnitude();
  Eigen::ArrayXd Ag(g.size()), AF(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    Ag[i] = eval_A(nf, grad[i]);
    AF[i] = eval_A(nf, forcing[i]);
  }
  const Vec x0 = g.position(center);
  const ScalarField Agf(g, Ag);
  const double mean_r = ball_average(Agf, x0, r);
  const auto nodes = ball_nodes(g, x0, r);
  double dev = 0.0;
  for (Index i : nodes) dev += std::abs(Ag[i] - mean_r);

  const SharpExponents e = sharp_exponents(nf, g.n(), alpha);
  const double q = nf.a1() * (1.0 + nf.a1());
  OscillationOfA out;
  out.lhs = dev / static_cast<double>(nodes.size());
  out.forcing_term = std::pow(delta, -q) * std::pow(R / r, e.m) *
                     ball_average(ScalarField(g, AF), x0, R);
  out.gradient_term = (std::pow(delta, nf.a0() + 1.0) +
                       std::pow(delta, -q) * std::pow(r / R, alpha)) *
                      ball_average(Agf, x0, R);
  const double rhs = out.forcing_term + out.gradient_term;
  out.gamma = rhs > 0.0 ? out.lhs / rhs : (out.lhs > 0.0 ? kInf : 0.0);
  return out;
}

// ---------------------------------------------------------------- integrability

IntegrabilityRatio integrability_ratio(const NFunctionPair& pair, const VectorField& F,
                                       const SolverConfig& cfg) {
  const SolverReport rep = solve_periodic(pair.A, F, cfg);
  IntegrabilityRatio out;
  out.modular_gradient = modular(pair.B, gradient(rep.u));
  out.modular_forcing = modular(pair.B, F);
  out.converged = rep.converged;
  out.iters = rep.iters;
  if (out.modular_forcing > 0.0) {
    out.ratio = out.modular_gradient / out.modular_forcing;
  } else {
    out.ratio = out.modular_gradient > 0.0 ? kInf : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------- suites

SuiteResult run_inequality_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  SuiteResult res;
  const std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
  for (const auto& spec : cfg.nfunctions) {
    const NFunction nf = parse_nfunction(spec);
    const std::string& label = nf.label();

    const IndexCheck ic = check_index_condition(nf, 1e-8, 1e8, 400);
    res.add(hard(make_record("index_condition", label, 0,
                             params("declared_a0", nf.declared_indices().lower,
                                    "declared_a1", nf.declared_indices().upper),
                             ic.min_ratio, ic.max_ratio),
                 ic.pass));

    const InequalityReport ineq =
        check_structural_inequalities(nf, cfg.inequality_trials, cfg.inequality_range, seed);
    for (const auto& o : ineq.outcomes) {
      res.add(seeded(hard(make_record(o.id, label, 0,
                                      params("checks", o.checks, "tolerance", -1e-9),
                                      o.worst_slack, -1e-9),
                          o.violations.empty()),
                     seed));
    }

    const KernelBand mono = monotonicity_band(nf, cfg.dimension, cfg.monotonicity_trials, seed);
    res.add(seeded(hard(make_record("monotonicity", label, 0,
                                    params("samples", mono.primary.samples, "norm", "euclidean"),
                                    mono.primary.min, mono.primary.max),
                        mono.primary.min > 0.0 && std::isfinite(mono.primary.max)),
                   seed));
    res.add(seeded(make_record("monotonicity", label, 0,
                               params("samples", mono.alternate.samples, "norm", "sum"),
                               mono.alternate.min, mono.alternate.max),
                   seed));

    const KernelBand G = kernel_g_band(nf, cfg.dimension, cfg.kernel_trials, seed);
    res.add(seeded(hard(make_record("kernel_g_band", label, 0,
                                    params("samples", G.primary.samples, "norm", "sum"),
                                    G.primary.min, G.primary.max),
                        G.primary.min > 0.0 && std::isfinite(G.primary.max)),
                   seed));
    res.add(seeded(make_record("kernel_g_band", label, 0,
                               params("samples", G.alternate.samples, "norm", "euclidean"),
                               G.alternate.min, G.alternate.max),
                   seed));
    const auto& d = nf.declared_indices();
    if (d.lower == d.upper) {
      const double p = d.lower + 1.0;
      const KernelBand Fp = kernel_fp_band(p, cfg.dimension, cfg.kernel_trials, seed);
      res.add(seeded(hard(make_record("kernel_fp_band", label, 0,
                                      params("p", p, "samples", Fp.primary.samples),
                                      Fp.primary.min, Fp.primary.max),
                          Fp.primary.min > 0.0 && std::isfinite(Fp.primary.max)),
                     seed));
    }

    const TangentGapReport tg = tangent_gap_check(nf, cfg.dimension, cfg.kernel_trials, seed);
    res.add(seeded(hard(make_record("tangent_gap", label, 0, params("samples", tg.samples),
                                    tg.min_slack, -1e-9),
                        tg.pass()),
                   seed));

    for (double delta : cfg.deltas) {
      const SplitReport sp = difference_split_check(nf, cfg.dimension, delta, cfg.kernel_trials,
                                                    G.primary.max, seed);
      auto r3 = make_record("difference_split_c3", label, 0,
                            params("delta", delta, "kernel_upper", G.primary.max),
                            sp.worst_c3_needed, sp.formula.c3);
      auto r4 = make_record("difference_split_c4", label, 0,
                            params("delta", delta, "kernel_upper", G.primary.max),
                            sp.worst_c4_needed, sp.formula.c4);
      res.add(seeded(flagged(std::move(r3), sp.finite() ? "" : "not_finite"), seed));
      res.add(seeded(flagged(std::move(r4), sp.finite() ? "" : "not_finite"), seed));
    }
  }
  return res;
}

SuiteResult run_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  SuiteResult res;
  for (const auto& spec : cfg.nfunctions) {
    const NFunction nf = parse_nfunction(spec);
    const SolverConfig sc = solver_config_for(cfg, nf);
    for (int N : cfg.resolutions) {
      const Grid g = box(cfg, N);
      for (std::uint64_t seed : cfg.seeds) {
        const VectorField F = bump_forcing(g, forcing_for(cfg, seed));
        const SolverReport rep = solve_periodic(nf, F, sc);
        auto r = make_record("solve", nf.label(), N,
                             params("iters", rep.iters, "tol", sc.residual_tol),
                             rep.residual_norm, sc.residual_tol * rep.reference_norm);
        res.add(seeded(hard(std::move(r), rep.converged), seed));
        // Forcing lives in the central half; the gradient outside it measures
        // how far the periodic box is from the whole-space problem.
        const Eigen::ArrayXd grad = gradient(rep.u).magnitude();
        double margin = 0.0;
        const double L = g.min_length();
        for (Index i = 0; i < g.size(); ++i) {
          const Vec x = g.position(i);
          if ((x.array() < 0.25 * L).any() || (x.array() >= 0.75 * L).any()) {
            margin = std::max(margin, grad[i]);
          }
        }
        res.add(seeded(make_record("margin_gradient", nf.label(), N, "", margin, grad.maxCoeff()),
                       seed));
        const std::string key = stem(nf.label()) + "_n" + std::to_string(N) + "_s" +
                                std::to_string(seed);
        std::ostringstream trace;
        write_trace_csv(trace, rep);
        res.files.emplace_back("trace_" + key + ".csv", trace.str());
        res.fields.emplace_back("u_" + key, rep.u);
      }
    }
  }
  return res;
}

SuiteResult run_comparison_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  SuiteResult res;
  for (const auto& spec : cfg.nfunctions) {
    const NFunction nf = parse_nfunction(spec);
    const SolverConfig sc = solver_config_for(cfg, nf);
    const std::string& label = nf.label();
    for (int N : cfg.resolutions) {
      const Grid g = box(cfg, N);
      for (std::uint64_t seed : cfg.seeds) {
        const VectorField F = bump_forcing(g, forcing_for(cfg, seed));
        const SolverReport sol = solve_periodic(nf, F, sc);
        if (!sol.converged) {
          res.add(seeded(flagged(make_record("solve", label, N, "", sol.residual_norm,
                                             sc.residual_tol * sol.reference_norm),
                                 "nonconverged"),
                         seed));
          continue;
        }
        const auto balls = sample_balls(g, cfg.balls, seed);
        double worst_c1 = 0.0, min_alpha = kInf, worst_c2 = 0.0;
        int skipped = 0;
        for (std::size_t k = 0; k < balls.size(); ++k) {
          const BallComparison bc = compare_on_ball(nf, sol.u, balls[k], sc);
          const auto& x0 = g.position(balls[k].center);
          std::ostringstream where;
          where << std::setprecision(17) << "ball=" << k << " R=" << balls[k].radius
                << " x0=(";
          for (Index i = 0; i < x0.size(); ++i) where << (i ? " " : "") << x0[i];
          where << ")";
          const std::string p = where.str();
          if (!bc.replacement.converged) {
            ++skipped;
            res.add(seeded(flagged(make_record("replacement_energy", label, N, p,
                                               bc.energy_v, bc.energy_u),
                                   "nonconverged"),
                           seed));
            continue;
          }
          const double c_e = replacement_energy_constant(nf);
          const double c_m = replacement_modular_constant(nf);
          const double c_o = oscillation_chain_constant(nf);
          res.add(seeded(hard(make_record("replacement_energy", label, N, p, bc.energy_v,
                                          c_e * bc.energy_u),
                              within(bc.energy_v, c_e * bc.energy_u)),
                         seed));
          res.add(seeded(hard(make_record("replacement_modular", label, N, p, bc.modular_v,
                                          c_m * bc.modular_u),
                              within(bc.modular_v, c_m * bc.modular_u)),
                         seed));
          res.add(seeded(hard(make_record("oscillation_chain", label, N, p, bc.oscillation_v,
                                          c_o * bc.average_A_u),
                              within(bc.oscillation_v, c_o * bc.average_A_u)),
                         seed));
          res.add(seeded(make_record("interior_sup", label, N, p, bc.c1, 1.0), seed));
          worst_c1 = std::max(worst_c1, bc.c1);
          auto decay = make_record("oscillation_decay", label, N,
                                   p + " " + params("slope", bc.decay.slope, "r_squared",
                                              bc.decay.r_squared, "points", bc.decay.x.size()),
                                   bc.decay.alpha, 1.0);
          res.add(seeded(flagged(std::move(decay), bc.decay.valid ? "" : "degenerate"), seed));
          if (bc.decay.valid) {
            min_alpha = std::min(min_alpha, bc.decay.alpha);
            worst_c2 = std::max(worst_c2, bc.decay.c2);
            res.add(seeded(make_record("oscillation_decay_c2", label, N,
                                       p + " " + params("alpha", bc.decay.alpha), bc.decay.c2, 1.0),
                           seed));
          }
        }
        res.add(seeded(make_record("interior_sup_max", label, N,
                                   params("balls", balls.size(), "skipped", skipped), worst_c1,
                                   1.0),
                       seed));
        res.add(seeded(make_record("oscillation_decay_min_alpha", label, N,
                                   params("c2_max", worst_c2), min_alpha, 1.0),
                       seed));
      }
    }
  }
  return res;
}

namespace {

// Smallest fitted decay exponent over the balls; 1 when no fit is valid.
double empirical_alpha(const NFunction& nf, const ScalarField& u,
                       const std::vector<BallSample>& balls, const SolverConfig& sc) {
  double alpha = kInf;
  for (const auto& b : balls) {
    const BallComparison bc = compare_on_ball(nf, u, b, sc);
    if (bc.replacement.converged && bc.decay.valid) alpha = std::min(alpha, bc.decay.alpha);
  }
  return std::isfinite(alpha) ? alpha : 1.0;
}

ExperimentRecord drift_record(const std::string& id, const std::string& label, int N,
                              const std::string& p, double fine, double coarse,
                              double lo, double hi) {
  auto r = make_record(id, label, N, p, fine, coarse);
  const bool ok = std::isfinite(fine) && std::isfinite(coarse) && coarse > 0.0 &&
                  fine > 0.0 && r.ratio >= lo && r.ratio <= hi;
  return hard(std::move(r), ok);
}

}  // namespace

SuiteResult run_lemma24(const ExperimentConfig& cfg) {
  cfg.validate();
  SuiteResult res;
  for (const auto& spec : cfg.nfunctions) {
    const NFunction nf = parse_nfunction(spec);
    const SolverConfig sc = solver_config_for(cfg, nf);
    const std::string& label = nf.label();
    for (std::uint64_t seed : cfg.seeds) {
      std::vector<std::vector<double>> gamma_by_res;  // [resolution][delta]
      for (int N : cfg.resolutions) {
        const Grid g = box(cfg, N);
        const VectorField F = bump_forcing(g, forcing_for(cfg, seed));
        const SolverReport sol = solve_periodic(nf, F, sc);
        std::vector<double> gammas(cfg.deltas.size(), 0.0);
        if (!sol.converged) {
          res.add(seeded(flagged(make_record("solve", label, N, "", sol.residual_norm,
                                             sc.residual_tol * sol.reference_norm),
                                 "nonconverged"),
                         seed));
          gamma_by_res.push_back(std::vector<double>(cfg.deltas.size(), kNaN));
          continue;
        }
        const auto balls = sample_balls(g, cfg.balls, seed);
        const double alpha = empirical_alpha(nf, sol.u, balls, sc);
        const SharpExponents e = sharp_exponents(nf, g.n(), alpha);
        res.add(seeded(make_record("oscillation_of_A_exponents", label, N,
                                   params("alpha", alpha, "m", e.m), alpha, 1.0),
                       seed));
        for (std::size_t di = 0; di < cfg.deltas.size(); ++di) {
          const double delta = cfg.deltas[di];
          for (std::size_t k = 0; k < balls.size(); ++k) {
            for (double frac : {0.25, 0.5}) {
              const double R = balls[k].radius;
              const OscillationOfA o =
                  oscillation_of_A(nf, sol.u, F, balls[k].center, R, frac * R, delta, alpha);
              auto r = make_record("oscillation_of_A", label, N,
                                   params("ball", k, "R", R, "r", frac * R, "delta", delta,
                                          "forcing_term", o.forcing_term, "gradient_term",
                                          o.gradient_term),
                                   o.lhs, o.forcing_term + o.gradient_term);
              const double volume = std::pow(g.min_length(), g.n());
              if (r.rhs < 1e-12 * volume) {
                res.add(seeded(flagged(std::move(r), "excluded"), seed));
                continue;
              }
              gammas[di] = std::max(gammas[di], o.gamma);
              res.add(seeded(std::move(r), seed));
            }
          }
          res.add(seeded(hard(make_record("oscillation_of_A_gamma", label, N,
                                          params("delta", delta), gammas[di], 1.0),
                              std::isfinite(gammas[di])),
                         seed));
        }
        gamma_by_res.push_back(gammas);
      }
      for (std::size_t i = 1; i < gamma_by_res.size(); ++i) {
        for (std::size_t di = 0; di < cfg.deltas.size(); ++di) {
          res.add(seeded(drift_record("oscillation_of_A_drift", label, cfg.resolutions[i],
                                      params("coarse_n", cfg.resolutions[i - 1], "delta",
                                             cfg.deltas[di]),
                                      gamma_by_res[i][di], gamma_by_res[i - 1][di], 0.5, 2.0),
                         seed));
        }
      }
    }
  }
  return res;
}

SuiteResult run_theorem11(const ExperimentConfig& cfg) {
  cfg.validate();
  SuiteResult res;
  for (const auto& ps : cfg.pairs) {
    const NFunctionPair pair = make_pair(parse_nfunction(ps.A), parse_nfunction(ps.B));
    const std::string label = pair.A.label() + "|" + pair.B.label();
    res.add(hard(make_record("pair_admissible", label, 0,
                             params("composite_lower", pair.composite.lower,
                                    "composite_upper", pair.composite.upper),
                             pair.composite.lower, pair.composite.upper),
                 pair.admissible));
    if (!pair.admissible) continue;
    const SolverConfig sc = solver_config_for(cfg, pair.A);
    double previous_max = kNaN;
    int previous_N = 0;
    for (int N : cfg.resolutions) {
      const Grid g = box(cfg, N);
      const double volume = std::pow(g.min_length(), g.n());
      double max_ratio = 0.0;
      int nonconverged = 0, excluded = 0;
      for (std::uint64_t seed : cfg.seeds) {
        const VectorField F = bump_forcing(g, forcing_for(cfg, seed));
        const IntegrabilityRatio ir = integrability_ratio(pair, F, sc);
        auto r = seeded(make_record("higher_integrability", label, N,
                                    params("iters", ir.iters), ir.modular_gradient,
                                    ir.modular_forcing),
                        seed);
        if (!ir.converged) {
          ++nonconverged;
          res.add(flagged(std::move(r), "nonconverged"));
        } else if (ir.modular_forcing < 1e-12 * volume) {
          ++excluded;
          res.add(flagged(std::move(r), "excluded"));
        } else {
          max_ratio = std::max(max_ratio, ir.ratio);
          res.add(std::move(r));
        }
      }
      for (int k = 1; k <= cfg.gradient_seeds; ++k) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(k);
        const VectorField F = gradient(bump_potential(g, forcing_for(cfg, seed)));
        const IntegrabilityRatio ir = integrability_ratio(pair, F, sc);
        auto r = make_record("higher_integrability_gradient_field", label, N,
                             params("iters", ir.iters), ir.modular_gradient, ir.modular_forcing);
        res.add(seeded(hard(std::move(r), ir.converged && std::abs(ir.ratio - 1.0) <= 1e-3),
                       seed));
      }
      {
        const VectorField zero = VectorField::zeros(g);
        const SolverReport rep = solve_periodic(pair.A, zero, sc);
        const double sup = gradient(rep.u).magnitude().maxCoeff();
        res.add(hard(make_record("higher_integrability_zero", label, N,
                                 params("max_grad", sup), modular(pair.B, gradient(rep.u)),
                                 modular(pair.B, zero)),
                     sup <= 1e-10));
      }
      res.add(hard(make_record("higher_integrability_max", label, N,
                               params("seeds", cfg.seeds.size(), "nonconverged", nonconverged,
                                      "excluded", excluded),
                               max_ratio, 1.0),
                   std::isfinite(max_ratio) && nonconverged == 0));
      if (previous_N > 0) {
        auto r = make_record("higher_integrability_growth", label, N,
                             params("coarse_n", previous_N), max_ratio, previous_max);
        res.add(hard(std::move(r), std::isfinite(max_ratio) && previous_max > 0.0 &&
                                       max_ratio <= 1.5 * previous_max));
      }
      previous_max = max_ratio;
      previous_N = N;
    }
  }
  return res;
}

SuiteResult run_maximal(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.pairs.empty() || cfg.nfunctions.empty()) {
    throw std::invalid_argument("maximal needs one pair and one N-function");
  }
  SuiteResult res;
  const NFunctionPair pair =
      make_pair(parse_nfunction(cfg.pairs.front().A), parse_nfunction(cfg.pairs.front().B));
  const std::string pair_label = pair.A.label() + "|" + pair.B.label();
  const NFunction nf = parse_nfunction(cfg.nfunctions.front());
  const SolverConfig sc = solver_config_for(cfg, nf);
  for (std::uint64_t seed : cfg.seeds) {
    std::vector<double> c9, gamma;
    for (int N : cfg.resolutions) {
      const Grid g = box(cfg, N);
      const double L = g.min_length();
      // Fixed in length units so every resolution sees the same balls.
      const RadiusSet radii = RadiusSet::geometric(L / 32.0, 0.5 * L);

      const VectorField F = bump_forcing(g, forcing_for(cfg, seed));
      const ScalarField f(g, F.values().row(0).transpose().array());
      const MaximalModularReport mm = verify_maximal_modular(pair, f, radii);
      auto r9 = make_record("maximal_modular", pair_label, N,
                            params("radii", radii.size()), mm.numerator, mm.denominator);
      res.add(seeded(hard(std::move(r9), mm.finite()), seed));
      c9.push_back(mm.ratio);
      {
        Eigen::ArrayXd Af(g.size());
        for (Index i = 0; i < g.size(); ++i) Af[i] = eval_A(pair.A, std::abs(f[i]));
        res.fields.emplace_back("maximal_n" + std::to_string(N) + "_s" + std::to_string(seed),
                                maximal_fn(ScalarField(g, Af), radii));
      }

      const SolverReport sol = solve_periodic(nf, F, sc);
      if (!sol.converged) {
        res.add(seeded(hard(make_record("solve", nf.label(), N, "", sol.residual_norm,
                                        sc.residual_tol * sol.reference_norm),
                            false),
                       seed));
        gamma.push_back(kNaN);
        continue;
      }
      ExperimentConfig few = cfg;
      few.balls.count = std::min(cfg.balls.count, 8);
      const double alpha = empirical_alpha(nf, sol.u, sample_balls(g, few.balls, seed), sc);
      std::vector<Index> nodes;
      const int step = N / 16;
      if (step < 1 || N % 16 != 0) throw std::invalid_argument("maximal needs N divisible by 16");
      std::array<int, 3> c{0, 0, 0};
      for (c[0] = 4 * step; c[0] <= 12 * step; c[0] += step) {
        for (c[1] = 4 * step; c[1] <= 12 * step; c[1] += step) {
          if (g.n() == 3) {
            c[2] = 8 * step;
          }
          nodes.push_back(g.index(c));
        }
      }
      for (double delta : cfg.deltas) {
        const PointwiseReport pr = verify_pointwise_sharp(nf, sol.u, F, delta, alpha, nodes, radii);
        for (const auto& s : pr.samples) {
          res.add(seeded(make_record("sharp_pointwise", nf.label(), N,
                                     params("node", s.node, "delta", delta, "maximal_forcing",
                                            s.maximal_forcing, "maximal_gradient",
                                            s.maximal_gradient),
                                     s.lhs, s.rhs_unit),
                         seed));
        }
        res.add(seeded(hard(make_record("sharp_pointwise_gamma", nf.label(), N,
                                        params("delta", delta, "alpha", alpha, "m",
                                               pr.exponents.m, "kappa", pr.exponents.kappa),
                                        pr.gamma_emp, 1.0),
                            pr.finite()),
                       seed));
        if (delta == cfg.deltas.front()) gamma.push_back(pr.gamma_emp);
      }
    }
    for (std::size_t i = 1; i < cfg.resolutions.size(); ++i) {
      const std::string p = params("coarse_n", cfg.resolutions[i - 1]);
      res.add(seeded(drift_record("maximal_modular_drift", pair_label, cfg.resolutions[i], p,
                                  c9[i], c9[i - 1], 0.5, 1.5),
                     seed));
      res.add(seeded(drift_record("sharp_pointwise_drift", nf.label(), cfg.resolutions[i],
                                  p + " " + params("delta", cfg.deltas.front()), gamma[i],
                                  gamma[i - 1], 0.5, 1.5),
                     seed));
    }
  }
  return res;
}

}  // namespace alap
