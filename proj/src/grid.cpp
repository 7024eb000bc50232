#include "chpar/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace chpar {

SpatialGrid::SpatialGrid(int dim, int nodes_per_axis)
    : dim_(dim), nodes_(nodes_per_axis), h_(0.0) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("grid dimension must be 1 or 2, got " +
                                std::to_string(dim));
  if (nodes_per_axis < 4)
    throw std::invalid_argument("grid needs at least 4 nodes per axis, got " +
                                std::to_string(nodes_per_axis));
  h_ = 1.0 / static_cast<double>(nodes_per_axis - 1);
}

std::size_t SpatialGrid::interior_count() const {
  const auto m = static_cast<std::size_t>(interior_per_axis());
  return dim_ == 1 ? m : m * m;
}

double SpatialGrid::cell_weight() const { return dim_ == 1 ? h_ : h_ * h_; }

Field::Field(const SpatialGrid &grid)
    : grid_(grid), values_(Vector::Zero(static_cast<Eigen::Index>(grid.interior_count()))) {}

Field::Field(const SpatialGrid &grid, Vector values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.interior_count())
    throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                " does not match interior count " +
                                std::to_string(grid_.interior_count()));
}

Field &Field::operator+=(const Field &other) {
  values_ += other.values_;
  return *this;
}

Field &Field::operator-=(const Field &other) {
  values_ -= other.values_;
  return *this;
}

Field &Field::operator*=(double s) {
  values_ *= s;
  return *this;
}

Field operator+(Field a, const Field &b) { return a += b; }
Field operator-(Field a, const Field &b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

bool identical(const Field &a, const Field &b) {
  if (a.size() != b.size())
    return false;
  for (Eigen::Index i = 0; i < a.values().size(); ++i)
    if (a.values()[i] != b.values()[i])
      return false;
  return true;
}

namespace {

SparseMatrix laplacian_1d(int m, double h) {
  const double s = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * m));
  for (int i = 0; i < m; ++i) {
    t.emplace_back(i, i, -2.0 * s);
    if (i > 0)
      t.emplace_back(i, i - 1, s);
    if (i + 1 < m)
      t.emplace_back(i, i + 1, s);
  }
  SparseMatrix a(m, m);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

// Kronecker product of two sparse matrices.
SparseMatrix kron(const SparseMatrix &a, const SparseMatrix &b) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(),
                         ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  SparseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

} // namespace

DiscreteOperator::DiscreteOperator(const SpatialGrid &grid) : grid_(grid) {
  const int m = grid.interior_per_axis();
  SparseMatrix d1 = laplacian_1d(m, grid.h());
  if (grid.dim() == 1) {
    lap_ = std::move(d1);
  } else {
    SparseMatrix eye(m, m);
    eye.setIdentity();
    // x is the fastest index, so I (x) D1 acts along x and D1 (x) I along y.
    lap_ = kron(eye, d1) + kron(d1, eye);
  }
  lap_.makeCompressed();
  bilap_ = (lap_ * lap_).pruned();
  bilap_.makeCompressed();
}

DiscreteOperator build_laplacian(const SpatialGrid &grid) {
  return DiscreteOperator(grid);
}

OperatorPtr make_operator(const SpatialGrid &grid) {
  return std::make_shared<const DiscreteOperator>(grid);
}

std::vector<double> laplacian_eigenvalues(const SpatialGrid &grid) {
  const int nx = grid.nodes_per_axis();
  const double h = grid.h();
  std::vector<double> lambda;
  lambda.reserve(static_cast<std::size_t>(nx - 2));
  for (int p = 1; p <= nx - 2; ++p)
    lambda.push_back(2.0 / (h * h) *
                     (std::cos(p * std::numbers::pi / (nx - 1)) - 1.0));
  return lambda;
}

std::vector<double> operator_eigenvalues(const SpatialGrid &grid) {
  auto axis = laplacian_eigenvalues(grid);
  if (grid.dim() == 1)
    return axis;
  std::vector<double> all;
  all.reserve(axis.size() * axis.size());
  for (double a : axis)
    for (double b : axis)
      all.push_back(a + b);
  return all;
}

double l2_norm(const Field &f) {
  return std::sqrt(f.grid().cell_weight() * f.values().squaredNorm());
}

double l2_distance(const Field &a, const Field &b) {
  return std::sqrt(a.grid().cell_weight() * (a.values() - b.values()).squaredNorm());
}

double energy(const Field &f, double eps) {
  const SpatialGrid &g = f.grid();
  const Vector &u = f.values();
  const int m = g.interior_per_axis();
  const double h = g.h();

  double bulk = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    bulk += bulk_density(u[i]);

  // Forward differences over every edge of the node lattice; boundary nodes
  // hold zero.
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= m || j < 0 || j >= m)
      return 0.0;
    return u[static_cast<Eigen::Index>(j) * m + i];
  };
  double grad = 0.0;
  if (g.dim() == 1) {
    for (int i = -1; i < m; ++i) {
      const double d = (at(i + 1, 0) - at(i, 0)) / h;
      grad += d * d;
    }
  } else {
    for (int j = 0; j < m; ++j)
      for (int i = -1; i < m; ++i) {
        const double dx = (at(i + 1, j) - at(i, j)) / h;
        const double dy = (at(j, i + 1) - at(j, i)) / h;
        grad += dx * dx + dy * dy;
      }
  }
  return g.cell_weight() * (bulk + 0.5 * eps * eps * grad);
}

double mass(const Field &f) { return f.grid().cell_weight() * f.values().sum(); }

} // namespace chpar
