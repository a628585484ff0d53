#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "alap/field.hpp"

using namespace alap;

namespace {

const double kPi = std::acos(-1.0);

ScalarField sample(const Grid& g, auto f) {
  Eigen::ArrayXd v(g.size());
  for (Index i = 0; i < g.size(); ++i) v[i] = f(g.position(i));
  return ScalarField(g, v);
}

ScalarField random_scalar(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Eigen::ArrayXd v(g.size());
  for (auto& x : v) x = d(rng);
  return ScalarField(g, v);
}

VectorField random_vector(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Eigen::MatrixXd v(g.n(), g.size());
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = d(rng);
  return VectorField(g, v);
}

Vec at(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS(Grid::periodic(2, 3));
  CHECK_THROWS(Grid::periodic(4, 16));
  CHECK_THROWS(Grid::ball(2, 0.1, 0.3, at(0, 0)));
  const Grid g = Grid::periodic(3, 8);
  CHECK(g.size() == 512);
  CHECK(g.index(g.coords(123)) == 123);
  CHECK(g.wrap({-1, 8, 3}) == g.index({7, 0, 3}));
  CHECK_THROWS(ScalarField(g, Eigen::ArrayXd::Zero(5)));
  Eigen::ArrayXd bad = Eigen::ArrayXd::Zero(g.size());
  bad[3] = NAN;
  CHECK_THROWS(ScalarField(g, bad));
}

TEST_CASE("gradient basics") {
  const Grid g = Grid::periodic(2, 16);
  const ScalarField c(g, Eigen::ArrayXd::Constant(g.size(), 5.0));
  CHECK(gradient(c).values().cwiseAbs().maxCoeff() == 0.0);

  // Centered and one-sided differences are exact on linear data inside a
  // ball; an axis with no neighbor in the ball gets zero.
  const Grid b = Grid::ball(2, 0.1, 0.8, at(0.3, -0.2));
  const ScalarField lin = sample(b, [](const Vec& x) { return 2.0 * x[0] - 3.0 * x[1] + 1.0; });
  const VectorField G = gradient(lin);
  const double slope[2] = {2.0, -3.0};
  double err = 0.0;
  for (Index i = 0; i < b.size(); ++i) {
    if (!b.in_domain(i)) continue;
    for (int k = 0; k < 2; ++k) {
      const Index lo = b.neighbor(i, k, -1), hi = b.neighbor(i, k, 1);
      const bool any = (lo >= 0 && b.in_domain(lo)) || (hi >= 0 && b.in_domain(hi));
      err = std::max(err, std::abs(G[i][k] - (any ? slope[k] : 0.0)));
    }
  }
  CHECK(err < 1e-12);
}

TEST_CASE("gradient converges at second order") {
  double errs[2];
  int k = 0;
  for (int N : {32, 64}) {
    const Grid g = Grid::periodic(2, N);
    const ScalarField u = sample(g, [](const Vec& x) { return std::sin(2 * kPi * x[0]); });
    const VectorField G = gradient(u);
    double e = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
      e = std::max(e, std::abs(G[i][0] - 2 * kPi * std::cos(2 * kPi * g.position(i)[0])));
    }
    errs[k++] = e;
  }
  CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("divergence is the negative adjoint of gradient") {
  for (int n : {2, 3}) {
    const Grid g = Grid::periodic(n, n == 2 ? 24 : 10);
    const ScalarField u = random_scalar(g, 1);
    const VectorField V = random_vector(g, 2);
    const double lhs = inner(divergence(V), u);
    const double rhs = inner(V, gradient(u));
    CHECK(std::abs(lhs + rhs) <= 1e-12 * std::abs(rhs));
  }
  const Grid g = Grid::periodic(2, 16);
  const VectorField cst(g, Eigen::MatrixXd::Constant(2, g.size(), 0.7));
  CHECK(divergence(cst).values().abs().maxCoeff() < 1e-12);
}

TEST_CASE("div grad of a sine product approaches the Laplacian") {
  double errs[2];
  int k = 0;
  for (int N : {32, 64}) {
    const Grid g = Grid::periodic(2, N);
    auto f = [](const Vec& x) { return std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]); };
    const ScalarField lap = divergence(gradient(sample(g, f)));
    double e = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
      e = std::max(e, std::abs(lap[i] + 8 * kPi * kPi * f(g.position(i))));
    }
    errs[k++] = e;
  }
  CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("periodic kernel projection") {
  const Grid g = Grid::periodic(2, 16);
  // Parity-class constants are invisible to the centered gradient.
  const ScalarField checker =
      sample(g, [&](const Vec& x) {
        const int i = static_cast<int>(std::lround(x[0] / g.h()));
        const int j = static_cast<int>(std::lround(x[1] / g.h()));
        return (i % 2) + 2.0 * (j % 2);
      });
  CHECK(gradient(checker).values().cwiseAbs().maxCoeff() < 1e-12);
  Eigen::ArrayXd v = checker.values();
  remove_periodic_kernel(g, v);
  CHECK(v.abs().maxCoeff() < 1e-12);
  Eigen::ArrayXd r = random_scalar(g, 4).values();
  const VectorField before = gradient(ScalarField(g, r));
  remove_periodic_kernel(g, r);
  CHECK(std::abs(r.sum()) < 1e-12);
  CHECK((gradient(ScalarField(g, r)).values() - before.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ball averages") {
  const Grid g = Grid::periodic(2, 64);
  const ScalarField c(g, Eigen::ArrayXd::Constant(g.size(), 2.5));
  CHECK(ball_average(c, at(0.5, 0.5), 0.2) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK_THROWS(ball_average(c, at(0.5, 0.5), 0.5));
  CHECK_THROWS_AS(ball_average(c, at(0.501, 0.501), 0.0), std::domain_error);

  // Symmetric lattice ball around a node: the linear part averages out.
  const ScalarField lin = sample(g, [](const Vec& x) { return 3 * x[0] - x[1]; });
  CHECK(ball_average(lin, at(0.5, 0.25), 0.1) == doctest::Approx(1.25).epsilon(1e-12));

  // Monte Carlo oracle for a smooth bump; error budget 2 h Lip(f).
  auto bump = [](const Vec& x) { return std::exp(-20 * (x - at(0.45, 0.55)).squaredNorm()); };
  const ScalarField f = sample(g, bump);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const Vec x0 = at(0.5, 0.5);
  const double r = 0.2;
  double s = 0.0;
  int hits = 0;
  while (hits < 1000000) {
    const Vec y = at(u(rng), u(rng));
    if (y.squaredNorm() > 1) continue;
    s += bump(x0 + r * y);
    ++hits;
  }
  const double lip = std::sqrt(40.0) * std::exp(-0.5);
  CHECK(std::abs(ball_average(f, x0, r) - s / hits) <= 2 * g.h() * lip);
}

TEST_CASE("modular") {
  const NFunction p2 = NFunction::power(2);
  const Grid g = Grid::periodic(2, 16);
  CHECK(modular(p2, VectorField::zeros(g)) == 0.0);
  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(2, g.size());
  for (Index i = 0; i < 37; ++i) unit(i % 2, i * 5) = (i % 3 == 0) ? -1.0 : 1.0;
  CHECK(modular(p2, VectorField(g, unit)) == doctest::Approx(g.cell_volume() * 37 / 2.0));

  // Oracle: Kahan-compensated sum of the same terms.
  const NFunction pl = NFunction::plog(2, 1);
  const VectorField V = random_vector(Grid::periodic(2, 64), 8);
  double s = 0.0, comp = 0.0;
  for (Index i = 0; i < V.grid().size(); ++i) {
    const double y = eval_A(pl, V[i].norm()) - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  CHECK(modular(pl, V) == doctest::Approx(V.grid().cell_volume() * s).epsilon(1e-12));
  CHECK(modular(pl, V) > 0.0);
}

TEST_CASE("discrete Jensen") {
  const Grid g = Grid::periodic(2, 32);
  for (const NFunction& nf : {NFunction::power(1.5), NFunction::power(3), NFunction::plog(2, 1)}) {
    const VectorField V = random_vector(g, 21);
    Eigen::ArrayXd A(g.size());
    for (Index i = 0; i < g.size(); ++i) A[i] = eval_A(nf, V[i].norm());
    for (double r : {0.05, 0.1, 0.3}) {
      const Vec m = ball_average(V, at(0.4, 0.6), r);
      CHECK(eval_A(nf, m.norm()) <= ball_average(ScalarField(g, A), at(0.4, 0.6), r));
    }
  }
}

TEST_CASE("refinement of ball average and modular") {
  const NFunction p3 = NFunction::power(3);
  auto f = [](const Vec& x) { return std::cos(2 * kPi * x[0]) + 0.5 * std::sin(2 * kPi * x[1]); };
  std::vector<double> avg, mod;
  for (int N : {32, 64, 128, 256}) {
    const Grid g = Grid::periodic(2, N);
    const ScalarField s = sample(g, f);
    avg.push_back(ball_average(s, at(0.5, 0.5), 0.3));
    mod.push_back(modular(p3, s));
  }
  // Successive differences shrink at least linearly.
  for (std::size_t i = 2; i < avg.size(); ++i) {
    CHECK(std::abs(avg[i] - avg[i - 1]) <= 0.75 * std::abs(avg[i - 1] - avg[i - 2]) + 1e-13);
  }
  // |f|^3 is C^2 with a kink in the third derivative, so the periodic
  // trapezoid sum converges at high algebraic order.
  for (std::size_t i = 2; i < mod.size(); ++i) {
    CHECK(std::abs(mod[i] - mod[i - 1]) <= std::abs(mod[i - 1] - mod[i - 2]) / 8);
  }
}

TEST_CASE("restriction to a ball") {
  const Grid g = Grid::periodic(2, 32);
  const ScalarField u = random_scalar(g, 5);
  const Index c = g.index({3, 30});
  const ScalarField b = restrict_to_ball(u, c, 6 * g.h());
  CHECK(b.grid().topology() == Topology::ball);
  const Index bc = b.grid().index(b.grid().center_node());
  CHECK(b[bc] == u[c]);
  CHECK(b[b.grid().neighbor(bc, 0, -1)] == u[g.index({2, 30})]);
  CHECK(b[b.grid().neighbor(bc, 1, 2)] == u[g.index({3, 0})]);
}

TEST_CASE("OLF1 round trip and layout") {
  const Grid g = Grid::periodic(2, {4, 6, 1}, 0.25);
  const ScalarField f = random_scalar(g, 6);
  std::stringstream ss;
  write_olf(ss, f);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4 + 4 + 8 + 8 + 8 * 24);
  CHECK(bytes.substr(0, 4) == "OLF1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 2);
  CHECK(static_cast<unsigned char>(bytes[8]) == 4);
  CHECK(static_cast<unsigned char>(bytes[12]) == 6);
  const ScalarField back = read_olf(ss);
  CHECK(back.grid().h() == 0.25);
  CHECK(back.grid().shape()[1] == 6);
  CHECK((back.values() - f.values()).abs().maxCoeff() == 0.0);
  std::stringstream junk("OLF2xxxx");
  CHECK_THROWS(read_olf(junk));
}

TEST_CASE("CSV slice") {
  const Grid g = Grid::periodic(2, 4);
  Eigen::ArrayXd v(16);
  for (int i = 0; i < 16; ++i) v[i] = i;
  std::ostringstream os;
  write_csv_slice(os, ScalarField(g, v));
  CHECK(os.str().substr(0, 8) == "0,1,2,3\n");
}
