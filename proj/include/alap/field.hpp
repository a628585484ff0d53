#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "alap/nfunction.hpp"

namespace alap {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;

enum class Topology { periodic, ball };

/// Uniform grid on a periodic box [0, L)^n or on the bounding box of a ball.
///
/// Nodes are stored row-major (last axis fastest). Node i sits at
/// origin + coords(i) * h. For ball grids only nodes within radius of the
/// center node belong to the domain.
class Grid {
 public:
  /// Periodic box with the same number of cells along every axis.
  static Grid periodic(int n, int cells, double length = 1.0);
  static Grid periodic(int n, std::array<int, 3> shape, double h);

  /// Ball of the given radius whose center is a node at position center.
  static Grid ball(int n, double h, double radius, const Vec& center);

  int n() const { return n_; }
  const std::array<int, 3>& shape() const { return shape_; }
  double h() const { return h_; }
  Topology topology() const { return topology_; }
  double radius() const { return radius_; }
  const Vec& origin() const { return origin_; }
  const std::array<int, 3>& center_node() const { return center_; }
  Vec center() const { return position(center_); }

  Index size() const;
  double cell_volume() const;
  double length(int axis) const { return shape_[axis] * h_; }
  double min_length() const;
  Index stride(int axis) const;

  Index index(const std::array<int, 3>& c) const;
  std::array<int, 3> coords(Index i) const;
  Vec position(Index i) const { return position(coords(i)); }
  Vec position(const std::array<int, 3>& c) const;

  /// Wraps integer coordinates into range (periodic) and returns the node, or
  /// -1 if the coordinates fall outside a ball grid's bounding box.
  Index wrap(std::array<int, 3> c) const;

  bool in_domain(Index i) const;
  /// In the domain together with all 2n axis neighbors.
  bool is_interior(Index i) const;
  Index neighbor(Index i, int axis, int step) const;

  bool operator==(const Grid& other) const;

 private:
  int n_ = 2;
  std::array<int, 3> shape_{1, 1, 1};
  double h_ = 1.0;
  Topology topology_ = Topology::periodic;
  double radius_ = 0.0;
  std::array<int, 3> center_{0, 0, 0};
  Vec origin_;
  std::vector<std::uint8_t> domain_;
};

class ScalarField {
 public:
  ScalarField(Grid grid, Eigen::ArrayXd values);
  static ScalarField zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const Eigen::ArrayXd& values() const { return values_; }
  double operator[](Index i) const { return values_[i]; }

 private:
  Grid grid_;
  Eigen::ArrayXd values_;
};

/// Vector field stored as an n x N matrix, one column per node.
class VectorField {
 public:
  VectorField(Grid grid, Eigen::MatrixXd values);
  static VectorField zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  auto operator[](Index i) const { return values_.col(i); }
  Eigen::ArrayXd magnitude() const;

 private:
  Grid grid_;
  Eigen::MatrixXd values_;
};

/// Centered differences at a fixed set of evaluation nodes.
///
/// On a periodic grid every node is evaluated; on a ball grid only interior
/// nodes are, so each stencil stays inside the ball. apply() maps node values
/// to an n x |eval| gradient matrix; adjoint() is its exact transpose.
class CenteredDifference {
 public:
  explicit CenteredDifference(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const std::vector<Index>& eval_nodes() const { return eval_; }
  Index eval_size() const { return static_cast<Index>(eval_.size()); }

  Eigen::MatrixXd apply(const Eigen::ArrayXd& u) const;
  Eigen::ArrayXd adjoint(const Eigen::MatrixXd& W) const;

 private:
  Grid grid_;
  std::vector<Index> eval_;
  // plus_[k][e], minus_[k][e]: neighbor nodes of eval node e along axis k.
  std::vector<std::vector<Index>> plus_;
  std::vector<std::vector<Index>> minus_;
};

/// Discrete gradient: centered everywhere on periodic grids; on ball grids
/// centered where both axis neighbors are in the ball, one-sided where only
/// one is, zero elsewhere.
VectorField gradient(const ScalarField& u);

/// Negative adjoint of gradient under the grid inner product.
ScalarField divergence(const VectorField& V);

/// h^n sum f g over domain nodes.
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& V, const VectorField& W);

/// Domain nodes whose centers lie within r of x0 (minimum image on periodic
/// grids), in lexicographic offset order.
std::vector<Index> ball_nodes(const Grid& grid, const Vec& x0, double r);

/// Mean of f over ball_nodes(x0, r). Throws if the ball holds no node or, on
/// a periodic grid, if r >= L/2.
double ball_average(const ScalarField& f, const Vec& x0, double r);
Vec ball_average(const VectorField& V, const Vec& x0, double r);

/// h^n sum A(|V|) over domain nodes.
double modular(const NFunction& nf, const VectorField& V);
double modular(const NFunction& nf, const ScalarField& f);

/// Subtracts the mean over every parity class of nodes along even-length
/// axes. These classes span the kernel of the centered gradient on a periodic
/// grid, so this is the gauge projection for periodic problems.
void remove_periodic_kernel(const Grid& grid, Eigen::ArrayXd& values);

/// Values of a periodic field copied onto a ball grid centered at node
/// center of the periodic grid.
ScalarField restrict_to_ball(const ScalarField& periodic, Index center,
                             double radius);

/// OLF1 binary format: "OLF1", u32 n, u32 shape per axis, f64 h, then f64
/// node values, all little-endian, row-major.
void write_olf(std::ostream& os, const ScalarField& f);
void write_olf(const std::string& path, const ScalarField& f);
ScalarField read_olf(std::istream& is);
ScalarField read_olf(const std::string& path);

/// CSV of a 2D field, or of the slice at last-axis index `slice` in 3D; one
/// row per first-axis index.
void write_csv_slice(std::ostream& os, const ScalarField& f, int slice = 0);

}  // namespace alap
