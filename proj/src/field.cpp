#include "alap/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace alap {

namespace {

constexpr double kContainSlack = 1e-12;

void check_dimension(int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("grid dimension must be 2 or 3");
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid Grid::periodic(int n, int cells, double length) {
  if (!(length > 0.0)) throw std::invalid_argument("grid length must be > 0");
  std::array<int, 3> shape{1, 1, 1};
  for (int k = 0; k < n; ++k) shape[k] = cells;
  return periodic(n, shape, length / cells);
}

Grid Grid::periodic(int n, std::array<int, 3> shape, double h) {
  check_dimension(n);
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be > 0");
  for (int k = 0; k < 3; ++k) {
    if (k < n && shape[k] < 4) throw std::invalid_argument("grid needs >= 4 cells per axis");
    if (k >= n) shape[k] = 1;
  }
  Grid g;
  g.n_ = n;
  g.shape_ = shape;
  g.h_ = h;
  g.topology_ = Topology::periodic;
  g.origin_ = Vec::Zero(n);
  return g;
}

Grid Grid::ball(int n, double h, double radius, const Vec& center) {
  check_dimension(n);
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
  if (!(radius >= 4.0 * h * (1.0 - kContainSlack))) {
    throw std::invalid_argument("ball radius must be at least 4h");
  }
  if (center.size() != n) throw std::invalid_argument("ball center has wrong dimension");
  const int m = static_cast<int>(std::ceil(radius / h)) + 1;
  Grid g;
  g.n_ = n;
  g.h_ = h;
  g.topology_ = Topology::ball;
  g.radius_ = radius;
  for (int k = 0; k < n; ++k) {
    g.shape_[k] = 2 * m + 1;
    g.center_[k] = m;
  }
  g.origin_ = center - Vec::Constant(n, m * h);
  g.domain_.assign(static_cast<std::size_t>(g.size()), 0);
  const double r2 = radius * radius * (1.0 + kContainSlack);
  for (Index i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    double d2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = (c[k] - m) * h;
      d2 += d * d;
    }
    g.domain_[static_cast<std::size_t>(i)] = d2 <= r2 ? 1 : 0;
  }
  return g;
}

Index Grid::size() const {
  return static_cast<Index>(shape_[0]) * shape_[1] * shape_[2];
}

double Grid::cell_volume() const { return std::pow(h_, n_); }

double Grid::min_length() const {
  double l = length(0);
  for (int k = 1; k < n_; ++k) l = std::min(l, length(k));
  return l;
}

Index Grid::stride(int axis) const {
  Index s = 1;
  for (int k = axis + 1; k < 3; ++k) s *= shape_[k];
  return s;
}

Index Grid::index(const std::array<int, 3>& c) const {
  return (static_cast<Index>(c[0]) * shape_[1] + c[1]) * shape_[2] + c[2];
}

std::array<int, 3> Grid::coords(Index i) const {
  std::array<int, 3> c{};
  c[2] = static_cast<int>(i % shape_[2]);
  i /= shape_[2];
  c[1] = static_cast<int>(i % shape_[1]);
  c[0] = static_cast<int>(i / shape_[1]);
  return c;
}

Vec Grid::position(const std::array<int, 3>& c) const {
  Vec x(n_);
  for (int k = 0; k < n_; ++k) x[k] = origin_[k] + c[k] * h_;
  return x;
}

Index Grid::wrap(std::array<int, 3> c) const {
  for (int k = 0; k < 3; ++k) {
    if (topology_ == Topology::periodic) {
      c[k] %= shape_[k];
      if (c[k] < 0) c[k] += shape_[k];
    } else if (c[k] < 0 || c[k] >= shape_[k]) {
      return -1;
    }
  }
  return index(c);
}

bool Grid::in_domain(Index i) const {
  if (i < 0) return false;
  if (topology_ == Topology::periodic) return true;
  return domain_[static_cast<std::size_t>(i)] != 0;
}

Index Grid::neighbor(Index i, int axis, int step) const {
  auto c = coords(i);
  c[axis] += step;
  return wrap(c);
}

bool Grid::is_interior(Index i) const {
  if (!in_domain(i)) return false;
  for (int k = 0; k < n_; ++k) {
    if (!in_domain(neighbor(i, k, 1)) || !in_domain(neighbor(i, k, -1))) return false;
  }
  return true;
}

bool Grid::operator==(const Grid& other) const {
  return n_ == other.n_ && shape_ == other.shape_ && h_ == other.h_ &&
         topology_ == other.topology_ && radius_ == other.radius_ &&
         center_ == other.center_ && origin_ == other.origin_;
}

// ---------------------------------------------------------------------------
// Fields

ScalarField::ScalarField(Grid grid, Eigen::ArrayXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("ScalarField: value count does not match grid");
  }
  if (!values_.allFinite()) throw std::invalid_argument("ScalarField: non-finite value");
}

ScalarField ScalarField::zeros(const Grid& grid) {
  return ScalarField(grid, Eigen::ArrayXd::Zero(grid.size()));
}

VectorField::VectorField(Grid grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_.n() || values_.cols() != grid_.size()) {
    throw std::invalid_argument("VectorField: shape does not match grid");
  }
  if (!values_.allFinite()) throw std::invalid_argument("VectorField: non-finite value");
}

VectorField VectorField::zeros(const Grid& grid) {
  return VectorField(grid, Eigen::MatrixXd::Zero(grid.n(), grid.size()));
}

Eigen::ArrayXd VectorField::magnitude() const {
  return values_.colwise().norm().transpose().array();
}

// ---------------------------------------------------------------------------
// Difference operators

CenteredDifference::CenteredDifference(const Grid& grid) : grid_(grid) {
  for (Index i = 0; i < grid.size(); ++i) {
    if (grid.topology() == Topology::periodic || grid.is_interior(i)) eval_.push_back(i);
  }
  plus_.assign(grid.n(), std::vector<Index>(eval_.size()));
  minus_.assign(grid.n(), std::vector<Index>(eval_.size()));
  for (std::size_t e = 0; e < eval_.size(); ++e) {
    for (int k = 0; k < grid.n(); ++k) {
      plus_[k][e] = grid.neighbor(eval_[e], k, 1);
      minus_[k][e] = grid.neighbor(eval_[e], k, -1);
    }
  }
}

Eigen::MatrixXd CenteredDifference::apply(const Eigen::ArrayXd& u) const {
  const double c = 0.5 / grid_.h();
  const int n = grid_.n();
  Eigen::MatrixXd out(n, eval_size());
  for (Index e = 0; e < eval_size(); ++e) {
    for (int k = 0; k < n; ++k) {
      out(k, e) = c * (u[plus_[k][e]] - u[minus_[k][e]]);
    }
  }
  return out;
}

Eigen::ArrayXd CenteredDifference::adjoint(const Eigen::MatrixXd& W) const {
  const double c = 0.5 / grid_.h();
  const int n = grid_.n();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid_.size());
  for (Index e = 0; e < eval_size(); ++e) {
    for (int k = 0; k < n; ++k) {
      const double w = c * W(k, e);
      out[plus_[k][e]] += w;
      out[minus_[k][e]] -= w;
    }
  }
  return out;
}

namespace {

// Calls fn(node, weight) for each term of the gradient component `axis` at i.
template <typename Fn>
void for_each_gradient_term(const Grid& g, Index i, int axis, Fn&& fn) {
  if (!g.in_domain(i)) return;
  const Index p = g.neighbor(i, axis, 1);
  const Index m = g.neighbor(i, axis, -1);
  const bool hp = g.in_domain(p);
  const bool hm = g.in_domain(m);
  const double inv_h = 1.0 / g.h();
  if (hp && hm) {
    fn(p, 0.5 * inv_h);
    fn(m, -0.5 * inv_h);
  } else if (hp) {
    fn(p, inv_h);
    fn(i, -inv_h);
  } else if (hm) {
    fn(i, inv_h);
    fn(m, -inv_h);
  }
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

}  // namespace

VectorField gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  if (g.topology() == Topology::periodic) {
    return VectorField(g, CenteredDifference(g).apply(u.values()));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.n(), g.size());
  for (Index i = 0; i < g.size(); ++i) {
    for (int k = 0; k < g.n(); ++k) {
      double s = 0.0;
      for_each_gradient_term(g, i, k, [&](Index j, double w) { s += w * u[j]; });
      out(k, i) = s;
    }
  }
  return VectorField(g, std::move(out));
}

ScalarField divergence(const VectorField& V) {
  const Grid& g = V.grid();
  if (g.topology() == Topology::periodic) {
    return ScalarField(g, -CenteredDifference(g).adjoint(V.values()));
  }
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    for (int k = 0; k < g.n(); ++k) {
      const double v = V.values()(k, i);
      for_each_gradient_term(g, i, k, [&](Index j, double w) { out[j] -= w * v; });
    }
  }
  return ScalarField(g, std::move(out));
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  const Grid& grid = f.grid();
  double s = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    if (grid.in_domain(i)) s += f[i] * g[i];
  }
  return grid.cell_volume() * s;
}

double inner(const VectorField& V, const VectorField& W) {
  require_same_grid(V.grid(), W.grid());
  const Grid& grid = V.grid();
  double s = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    if (grid.in_domain(i)) s += V[i].dot(W[i]);
  }
  return grid.cell_volume() * s;
}

// ---------------------------------------------------------------------------
// Averages and modulars

std::vector<Index> ball_nodes(const Grid& grid, const Vec& x0, double r) {
  if (x0.size() != grid.n()) throw std::invalid_argument("ball center has wrong dimension");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("ball radius must be >= 0");
  if (grid.topology() == Topology::periodic && !(r < 0.5 * grid.min_length())) {
    throw std::invalid_argument("periodic ball radius must be below L/2");
  }
  const int n = grid.n();
  const double h = grid.h();
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  std::array<double, 3> q{0, 0, 0};
  for (int k = 0; k < n; ++k) {
    q[k] = (x0[k] - grid.origin()[k]) / h;
    lo[k] = static_cast<int>(std::floor(q[k] - r / h));
    hi[k] = static_cast<int>(std::ceil(q[k] + r / h));
  }
  const double r2 = r * r * (1.0 + kContainSlack);
  std::vector<Index> out;
  std::array<int, 3> c{0, 0, 0};
  for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
    for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1]) {
      for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2]) {
        double d2 = 0.0;
        for (int k = 0; k < n; ++k) {
          const double d = (c[k] - q[k]) * h;
          d2 += d * d;
        }
        if (d2 > r2) continue;
        const Index i = grid.wrap(c);
        if (grid.in_domain(i)) out.push_back(i);
      }
    }
  }
  return out;
}

double ball_average(const ScalarField& f, const Vec& x0, double r) {
  const auto nodes = ball_nodes(f.grid(), x0, r);
  if (nodes.empty()) throw std::domain_error("ball_average: ball contains no node");
  double s = 0.0;
  for (Index i : nodes) s += f[i];
  return s / static_cast<double>(nodes.size());
}

Vec ball_average(const VectorField& V, const Vec& x0, double r) {
  const auto nodes = ball_nodes(V.grid(), x0, r);
  if (nodes.empty()) throw std::domain_error("ball_average: ball contains no node");
  Vec s = Vec::Zero(V.grid().n());
  for (Index i : nodes) s += V[i];
  return s / static_cast<double>(nodes.size());
}

double modular(const NFunction& nf, const VectorField& V) {
  const Grid& g = V.grid();
  double s = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (g.in_domain(i)) s += eval_A(nf, V[i].norm());
  }
  return g.cell_volume() * s;
}

double modular(const NFunction& nf, const ScalarField& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (g.in_domain(i)) s += eval_A(nf, std::abs(f[i]));
  }
  return g.cell_volume() * s;
}

void remove_periodic_kernel(const Grid& grid, Eigen::ArrayXd& values) {
  const int n = grid.n();
  const int classes = 1 << n;
  auto class_of = [&](Index i) {
    const auto c = grid.coords(i);
    int id = 0;
    for (int k = 0; k < n; ++k) {
      if (grid.shape()[k] % 2 == 0) id |= (c[k] & 1) << k;
    }
    return id;
  };
  std::vector<double> sum(classes, 0.0);
  std::vector<Index> count(classes, 0);
  for (Index i = 0; i < grid.size(); ++i) {
    const int id = class_of(i);
    sum[id] += values[i];
    ++count[id];
  }
  for (int id = 0; id < classes; ++id) {
    if (count[id] > 0) sum[id] /= static_cast<double>(count[id]);
  }
  for (Index i = 0; i < grid.size(); ++i) values[i] -= sum[class_of(i)];
}

ScalarField restrict_to_ball(const ScalarField& periodic, Index center,
                             double radius) {
  const Grid& pg = periodic.grid();
  if (pg.topology() != Topology::periodic) {
    throw std::invalid_argument("restrict_to_ball needs a periodic source field");
  }
  if (!(2.0 * (radius + 2.0 * pg.h()) < pg.min_length())) {
    throw std::invalid_argument("ball does not fit in the periodic box");
  }
  Grid bg = Grid::ball(pg.n(), pg.h(), radius, pg.position(center));
  const auto cc = pg.coords(center);
  Eigen::ArrayXd values(bg.size());
  for (Index i = 0; i < bg.size(); ++i) {
    auto c = bg.coords(i);
    for (int k = 0; k < pg.n(); ++k) c[k] += cc[k] - bg.center_node()[k];
    values[i] = periodic[pg.wrap(c)];
  }
  return ScalarField(std::move(bg), std::move(values));
}

// ---------------------------------------------------------------------------
// I/O

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

std::uint64_t get_bytes(std::istream& is, int count) {
  unsigned char b[8] = {};
  is.read(reinterpret_cast<char*>(b), count);
  if (!is) throw std::runtime_error("OLF1: truncated input");
  std::uint64_t v = 0;
  for (int i = count - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void write_olf(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os.write("OLF1", 4);
  put_u32(os, static_cast<std::uint32_t>(g.n()));
  for (int k = 0; k < g.n(); ++k) put_u32(os, static_cast<std::uint32_t>(g.shape()[k]));
  put_f64(os, g.h());
  for (Index i = 0; i < g.size(); ++i) put_f64(os, f[i]);
}

void write_olf(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_olf(os, f);
}

ScalarField read_olf(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "OLF1", 4) != 0) {
    throw std::runtime_error("OLF1: bad magic");
  }
  const int n = static_cast<int>(get_bytes(is, 4));
  if (n != 2 && n != 3) throw std::runtime_error("OLF1: unsupported dimension");
  std::array<int, 3> shape{1, 1, 1};
  for (int k = 0; k < n; ++k) shape[k] = static_cast<int>(get_bytes(is, 4));
  const double h = std::bit_cast<double>(get_bytes(is, 8));
  Grid g = Grid::periodic(n, shape, h);
  Eigen::ArrayXd values(g.size());
  for (Index i = 0; i < g.size(); ++i) values[i] = std::bit_cast<double>(get_bytes(is, 8));
  return ScalarField(std::move(g), std::move(values));
}

ScalarField read_olf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_olf(is);
}

void write_csv_slice(std::ostream& os, const ScalarField& f, int slice) {
  const Grid& g = f.grid();
  const int z = g.n() == 3 ? slice : 0;
  if (z < 0 || z >= g.shape()[2]) throw std::out_of_range("slice index out of range");
  os << std::setprecision(17);
  for (int i = 0; i < g.shape()[0]; ++i) {
    for (int j = 0; j < g.shape()[1]; ++j) {
      if (j) os << ',';
      os << f[g.index({i, j, z})];
    }
    os << '\n';
  }
}

}  // namespace alap
