#pragma once

#include "chpar/grid.hpp"
#include "chpar/schemes.hpp"

#include <vector>

namespace chpar {

/// Non-overlapping split of a 1D grid into `subdomains` pieces meeting at
/// shared interface nodes. Interface and subdomain ranges are given as
/// interior-node indices (grid node j+1 is interior index j).
class Decomposition {
public:
  Decomposition(const SpatialGrid &grid, int subdomains);

  const SpatialGrid &grid() const { return grid_; }
  int subdomains() const { return static_cast<int>(left_.size()); }
  int interface_count() const { return subdomains() - 1; }

  /// Interior index of interface i (0-based, i < interface_count()).
  int interface_node(int i) const { return interfaces_[static_cast<std::size_t>(i)]; }
  /// Left/right endpoint of subdomain s; -1 and M mark the physical boundary.
  int left_end(int s) const { return left_[static_cast<std::size_t>(s)]; }
  int right_end(int s) const { return right_[static_cast<std::size_t>(s)]; }

private:
  SpatialGrid grid_;
  std::vector<int> interfaces_;
  std::vector<int> left_;
  std::vector<int> right_;
};

/// Interface values of u (`g`) and of the auxiliary variable v (`h`).
struct InterfaceTraces {
  Vector g;
  Vector h;
  int iterations = 0;
  double last_increment_g = 0.0;
  double last_increment_h = 0.0;
};

struct NNStepResult {
  Field u;
  InterfaceTraces traces;
  std::vector<double> increment_history;
};

/// One Linear-A time step computed by the relaxed Neumann-Neumann iteration
/// on the mixed (u, v) system
///   u - dt D v = u^n,   eps^2 D u - (u^n)^2 u + v = -u^n.
/// `initial` seeds the interface traces; zero traces when absent.
NNStepResult nn_time_step(const Field &u_n, const Decomposition &decomp,
                          const NNParams &params, double dt, double eps,
                          const InterfaceTraces *initial = nullptr);

/// Spec for a fine propagator that advances Linear-A through the NN solver.
PropagatorSpec nn_propagator(const Decomposition &decomp, const NNParams &params,
                             double dt, double eps);

} // namespace chpar
