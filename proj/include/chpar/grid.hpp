#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace chpar {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform node grid on the unit interval or unit square.
///
/// `nodes_per_axis` counts both boundary nodes; only interior nodes carry
/// unknowns (homogeneous Dirichlet data on the boundary).
class SpatialGrid {
public:
  SpatialGrid(int dim, int nodes_per_axis);

  /// Grid with mesh width 1/h_den.
  static SpatialGrid from_denominator(int dim, int h_den) {
    return SpatialGrid(dim, h_den + 1);
  }

  int dim() const { return dim_; }
  int nodes_per_axis() const { return nodes_; }
  int interior_per_axis() const { return nodes_ - 2; }
  double h() const { return h_; }
  std::size_t interior_count() const;
  /// h^dim, the quadrature weight of one node.
  double cell_weight() const;

  friend bool operator==(const SpatialGrid &, const SpatialGrid &) = default;

private:
  int dim_;
  int nodes_;
  double h_;
};

/// Interior nodal values of a grid function, lexicographic (x fastest) in 2D.
class Field {
public:
  explicit Field(const SpatialGrid &grid);
  Field(const SpatialGrid &grid, Vector values);

  const SpatialGrid &grid() const { return grid_; }
  const Vector &values() const { return values_; }
  Vector &values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  Field &operator+=(const Field &other);
  Field &operator-=(const Field &other);
  Field &operator*=(double s);

  bool all_finite() const { return values_.allFinite(); }

private:
  SpatialGrid grid_;
  Vector values_;
};

Field operator+(Field a, const Field &b);
Field operator-(Field a, const Field &b);
Field operator*(double s, Field a);

/// Exact (bitwise) equality of the nodal values.
bool identical(const Field &a, const Field &b);

/// Dirichlet discrete Laplacian D_h and its square, shared read-only by all
/// propagators on the same grid.
class DiscreteOperator {
public:
  explicit DiscreteOperator(const SpatialGrid &grid);

  const SpatialGrid &grid() const { return grid_; }
  const SparseMatrix &laplacian() const { return lap_; }
  const SparseMatrix &bilaplacian() const { return bilap_; }

  Vector apply(const Vector &v) const { return lap_ * v; }

private:
  SpatialGrid grid_;
  SparseMatrix lap_;
  SparseMatrix bilap_;
};

using OperatorPtr = std::shared_ptr<const DiscreteOperator>;

DiscreteOperator build_laplacian(const SpatialGrid &grid);
OperatorPtr make_operator(const SpatialGrid &grid);

/// Analytic eigenvalues of the 1D operator along one axis, p = 1..N_x-2.
std::vector<double> laplacian_eigenvalues(const SpatialGrid &grid);

/// All eigenvalues of D_h for the grid's dimension (pairwise sums in 2D).
std::vector<double> operator_eigenvalues(const SpatialGrid &grid);

double l2_norm(const Field &f);
double l2_distance(const Field &a, const Field &b);
double energy(const Field &f, double eps);
double mass(const Field &f);

/// Double-well bulk density F(u) = (u^2 - 1)^2 / 4.
inline double bulk_density(double u) {
  const double w = u * u - 1.0;
  return 0.25 * w * w;
}

} // namespace chpar
