#include "chpar/schemes.hpp"

#include "chpar/ddm.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chpar {

std::string to_string(Scheme s) {
  switch (s) {
  case Scheme::LinearA:
    return "linear-a";
  case Scheme::LinearB:
    return "linear-b";
  case Scheme::NonlinearEyre:
    return "nonlinear-eyre";
  case Scheme::NeumannNeumannLinearA:
    return "nn-linear-a";
  }
  return "unknown";
}

void PropagatorSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("propagator dt must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("propagator eps must be positive");
  if (!(newton_tol > 0.0))
    throw std::invalid_argument("newton_tol must be positive");
  if (newton_max_iter < 1)
    throw std::invalid_argument("newton_max_iter must be at least 1");
  if (scheme == Scheme::NeumannNeumannLinearA) {
    if (!nn)
      throw std::invalid_argument("Neumann-Neumann propagator needs nn parameters");
    if (nn->subdomains < 2)
      throw std::invalid_argument("Neumann-Neumann needs at least 2 subdomains");
    if (!(nn->theta > 0.0 && nn->theta < 1.0))
      throw std::invalid_argument("relaxation theta must lie in (0, 1)");
    if (!(nn->tol > 0.0) || nn->max_iter < 1)
      throw std::invalid_argument("invalid Neumann-Neumann tolerance or iteration cap");
  }
}

void PropagationStats::absorb(const StepReport &r) {
  ++steps;
  max_newton_iterations = std::max(max_newton_iterations, r.newton_iterations);
  max_residual = std::max(max_residual, r.residual_norm);
  max_nn_iterations = std::max(max_nn_iterations, r.nn_iterations);
}

void PropagationStats::merge(const PropagationStats &o) {
  steps += o.steps;
  max_newton_iterations = std::max(max_newton_iterations, o.max_newton_iterations);
  max_residual = std::max(max_residual, o.max_residual);
  max_nn_iterations = std::max(max_nn_iterations, o.max_nn_iterations);
}

Vector solve_general(const SparseMatrix &a, const Vector &b, const char *what) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    std::ostringstream os;
    os << what << ": sparse LU factorization failed (" << lu.lastErrorMessage()
       << "), |A|_1 = " << Eigen::MatrixXd(a).cwiseAbs().colwise().sum().maxCoeff();
    throw SolverError(os.str());
  }
  Vector x = lu.solve(b);
  if (!x.allFinite()) {
    std::ostringstream os;
    os << what << ": non-finite solution, log|det A| = " << lu.logAbsDeterminant();
    throw SolverError(os.str());
  }
  return x;
}

namespace {

SparseMatrix identity_like(const SparseMatrix &m) {
  SparseMatrix eye(m.rows(), m.cols());
  eye.setIdentity();
  return eye;
}

// I + eps^2 dt D^2, shared by Linear-A and the Newton Jacobian.
SparseMatrix stabilised_base(const DiscreteOperator &op, double dt, double eps) {
  return identity_like(op.laplacian()) + (eps * eps * dt) * op.bilaplacian();
}

} // namespace

Field step_linear_a(const Field &u, const DiscreteOperator &op,
                    const PropagatorSpec &spec) {
  const SparseMatrix &d = op.laplacian();
  const Vector u2 = u.values().cwiseProduct(u.values());
  SparseMatrix a = stabilised_base(op, spec.dt, spec.eps) -
                   spec.dt * SparseMatrix(d * u2.asDiagonal());
  const Vector rhs = u.values() - spec.dt * (d * u.values());
  return Field(u.grid(), solve_general(a, rhs, "linear-a step"));
}

namespace {

SparseMatrix linear_b_matrix(const DiscreteOperator &op, double dt, double eps) {
  return stabilised_base(op, dt, eps) - (2.0 * dt) * op.laplacian();
}

Vector linear_b_rhs(const Vector &u, const DiscreteOperator &op, double dt) {
  const Vector cube = u.array().cube().matrix();
  return u + dt * (op.laplacian() * (cube - 3.0 * u));
}

std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>>
factor_linear_b(const DiscreteOperator &op, double dt, double eps) {
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  ldlt->compute(linear_b_matrix(op, dt, eps));
  if (ldlt->info() != Eigen::Success)
    throw SolverError("linear-b step: LDLT factorization of the implicit matrix failed");
  return ldlt;
}

} // namespace

Field step_linear_b(const Field &u, const DiscreteOperator &op,
                    const PropagatorSpec &spec) {
  auto ldlt = factor_linear_b(op, spec.dt, spec.eps);
  return Field(u.grid(), ldlt->solve(linear_b_rhs(u.values(), op, spec.dt)));
}

Vector nonlinear_residual(const Vector &y, const Vector &u,
                          const DiscreteOperator &op, double dt, double eps) {
  const SparseMatrix &d = op.laplacian();
  const Vector yhat = u - dt * (d * u);
  const Vector cube = y.array().cube().matrix();
  return y + (eps * eps * dt) * (op.bilaplacian() * y) - dt * (d * cube) - yhat;
}

std::pair<Field, StepReport> step_nonlinear(const Field &u,
                                            const DiscreteOperator &op,
                                            const PropagatorSpec &spec) {
  const SparseMatrix &d = op.laplacian();
  const SparseMatrix base = stabilised_base(op, spec.dt, spec.eps);
  const double w = u.grid().cell_weight();
  auto norm = [w](const Vector &r) { return std::sqrt(w * r.squaredNorm()); };

  StepReport report;
  Vector y = u.values();
  Vector res = nonlinear_residual(y, u.values(), op, spec.dt, spec.eps);
  report.residual_norm = norm(res);
  report.residual_history.push_back(report.residual_norm);

  while (report.residual_norm > spec.newton_tol) {
    if (report.newton_iterations >= spec.newton_max_iter) {
      std::ostringstream os;
      os << "newton: no convergence after " << spec.newton_max_iter
         << " iterations, residual " << report.residual_norm;
      throw SolverError(os.str(), report.residual_norm);
    }
    const Vector y2 = y.cwiseProduct(y);
    SparseMatrix jac = base - (3.0 * spec.dt) * SparseMatrix(d * y2.asDiagonal());
    y -= solve_general(jac, res, "newton step");
    ++report.newton_iterations;
    res = nonlinear_residual(y, u.values(), op, spec.dt, spec.eps);
    report.residual_norm = norm(res);
    report.residual_history.push_back(report.residual_norm);
    if (!std::isfinite(report.residual_norm))
      throw SolverError("newton: residual became non-finite");
  }
  return {Field(u.grid(), std::move(y)), report};
}

Propagator::Propagator(OperatorPtr op, PropagatorSpec spec)
    : op_(std::move(op)), spec_(std::move(spec)) {
  if (!op_)
    throw std::invalid_argument("propagator needs a discrete operator");
  spec_.validate();
  if (spec_.scheme == Scheme::LinearB)
    linear_b_ = factor_linear_b(*op_, spec_.dt, spec_.eps);
  if (spec_.scheme == Scheme::NeumannNeumannLinearA) {
    if (op_->grid().dim() != 1)
      throw std::invalid_argument("Neumann-Neumann fine solver is 1D only");
    decomp_ = std::make_shared<const Decomposition>(op_->grid(), spec_.nn->subdomains);
  }
}

Field Propagator::step(const Field &u, StepReport *report) const {
  StepReport local;
  Field next(u.grid());
  switch (spec_.scheme) {
  case Scheme::LinearA:
    next = step_linear_a(u, *op_, spec_);
    break;
  case Scheme::LinearB:
    next = Field(u.grid(), linear_b_->solve(linear_b_rhs(u.values(), *op_, spec_.dt)));
    break;
  case Scheme::NonlinearEyre: {
    auto [y, r] = step_nonlinear(u, *op_, spec_);
    next = std::move(y);
    local = std::move(r);
    break;
  }
  case Scheme::NeumannNeumannLinearA: {
    auto res = nn_time_step(u, *decomp_, *spec_.nn, spec_.dt, spec_.eps);
    next = std::move(res.u);
    local.nn_iterations = res.traces.iterations;
    break;
  }
  }
  if (report) {
    local.energy_before = energy(u, spec_.eps);
    local.energy_after = energy(next, spec_.eps);
    *report = std::move(local);
  }
  return next;
}

Field Propagator::propagate(const Field &u, int steps,
                            PropagationStats *stats) const {
  if (steps < 1)
    throw std::invalid_argument("propagate needs at least one step");
  Field cur = u;
  if (spec_.scheme == Scheme::NeumannNeumannLinearA && spec_.nn->warm_start) {
    InterfaceTraces traces;
    for (int s = 0; s < steps; ++s) {
      auto res = nn_time_step(cur, *decomp_, *spec_.nn, spec_.dt, spec_.eps,
                              s == 0 ? nullptr : &traces);
      cur = std::move(res.u);
      traces = std::move(res.traces);
      if (stats) {
        StepReport r;
        r.nn_iterations = traces.iterations;
        stats->absorb(r);
      }
    }
    return cur;
  }
  StepReport r;
  for (int s = 0; s < steps; ++s) {
    if (stats) {
      r = StepReport{};
      // Energies are only needed on request; skip them here.
      switch (spec_.scheme) {
      case Scheme::NonlinearEyre: {
        auto [y, rep] = step_nonlinear(cur, *op_, spec_);
        cur = std::move(y);
        r = std::move(rep);
        break;
      }
      case Scheme::NeumannNeumannLinearA: {
        auto res = nn_time_step(cur, *decomp_, *spec_.nn, spec_.dt, spec_.eps);
        cur = std::move(res.u);
        r.nn_iterations = res.traces.iterations;
        break;
      }
      default:
        cur = step(cur);
      }
      stats->absorb(r);
    } else {
      cur = step(cur);
    }
  }
  return cur;
}

Field propagate(const Field &u, const Propagator &prop, int steps) {
  return prop.propagate(u, steps);
}

} // namespace chpar
