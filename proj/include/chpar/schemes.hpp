#pragma once

#include "chpar/grid.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chpar {

enum class Scheme { LinearA, LinearB, NonlinearEyre, NeumannNeumannLinearA };

std::string to_string(Scheme s);

/// Relaxed Neumann-Neumann iteration settings (1D only).
struct NNParams {
  int subdomains = 8;
  double theta = 0.25;
  double tol = 1e-10;
  int max_iter = 2000;
  bool warm_start = false;
};

struct PropagatorSpec {
  Scheme scheme = Scheme::LinearA;
  double dt = 0.0;
  double eps = 0.0;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  std::optional<NNParams> nn;

  void validate() const;
};

struct StepReport {
  int newton_iterations = 0;
  double residual_norm = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  int nn_iterations = 0;
  std::vector<double> residual_history;
};

/// Aggregate over many steps.
struct PropagationStats {
  long steps = 0;
  int max_newton_iterations = 0;
  double max_residual = 0.0;
  int max_nn_iterations = 0;

  void absorb(const StepReport &r);
  void merge(const PropagationStats &o);
};

/// Linear or nonlinear solve failure. `where` is filled in by callers that
/// know the time slice or step index.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string &what, double last_residual = 0.0)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

private:
  double last_residual_;
};

/// Sparse LU solve of A x = b; throws SolverError when the factorization
/// fails or the result is not finite.
Vector solve_general(const SparseMatrix &a, const Vector &b, const char *what);

/// One step of the linearised Eyre scheme with the lagged (u^n)^2 factor.
Field step_linear_a(const Field &u, const DiscreteOperator &op,
                    const PropagatorSpec &spec);

/// One step of the second linear convex splitting (constant implicit matrix).
Field step_linear_b(const Field &u, const DiscreteOperator &op,
                    const PropagatorSpec &spec);

/// One step of the implicit convex splitting, solved by plain Newton from the
/// initial guess Y0 = u.
std::pair<Field, StepReport> step_nonlinear(const Field &u,
                                            const DiscreteOperator &op,
                                            const PropagatorSpec &spec);

/// Residual of the implicit convex-splitting step:
/// H(Y) = Y + eps^2 dt D^2 Y - dt D Y^3 - (I - dt D) u.
Vector nonlinear_residual(const Vector &y, const Vector &u,
                          const DiscreteOperator &op, double dt, double eps);

class Decomposition;

/// Immutable single-scheme propagator. All caches are built in the
/// constructor, so `step`/`propagate` may run concurrently.
class Propagator {
public:
  Propagator(OperatorPtr op, PropagatorSpec spec);

  const PropagatorSpec &spec() const { return spec_; }
  const DiscreteOperator &op() const { return *op_; }

  Field step(const Field &u, StepReport *report = nullptr) const;
  Field propagate(const Field &u, int steps,
                  PropagationStats *stats = nullptr) const;

private:
  OperatorPtr op_;
  PropagatorSpec spec_;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> linear_b_;
  std::shared_ptr<const Decomposition> decomp_;
};

Field propagate(const Field &u, const Propagator &prop, int steps);

} // namespace chpar
