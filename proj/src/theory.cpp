#include "chpar/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace chpar::theory {

namespace {

void check_index(int i, int hi) {
  if (i < 1 || i > hi)
    throw std::domain_error("splitting index must lie in 1.." + std::to_string(hi) +
                            ", got " + std::to_string(i));
}

void check_positive(double v, const char *name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::domain_error(std::string(name) + " must be positive and finite");
}

} // namespace

double g(int i, double y, double dT, double eps) {
  check_index(i, 3);
  check_positive(y, "y");
  check_positive(dT, "dT");
  check_positive(eps, "eps");
  const double a = 1.0 + i * dT * y;
  return a / (a + eps * eps * dT * y * y);
}

double phi(int i, double y, double dT, double eps, int J) {
  check_index(i, 3);
  if (J < 2)
    throw std::domain_error("phi needs J >= 2");
  const int fine_i = i == 3 ? 2 : i;
  const int coarse_i = i == 3 ? 1 : i;
  return std::pow(g(fine_i, y, dT / J, eps), J) - g(coarse_i, y, dT, eps);
}

double p_eigenvalue(const PMatrixSpec &spec, double y) {
  if (spec.J) {
    check_index(spec.i, 2);
    if (*spec.J < 1)
      throw std::domain_error("J must be at least 1");
    return std::pow(g(spec.i, y, spec.dT / *spec.J, spec.eps), *spec.J);
  }
  return g(spec.i, y, spec.dT, spec.eps);
}

double p_matrix_norm(const PMatrixSpec &spec, const SpatialGrid &grid) {
  double norm = 0.0;
  for (double lambda : operator_eigenvalues(grid))
    norm = std::max(norm, std::abs(p_eigenvalue(spec, -lambda)));
  return norm;
}

double p_difference_norm(int fine_i, int coarse_i, double dT, double eps, int J,
                         const SpatialGrid &grid) {
  const PMatrixSpec fine{fine_i, dT, eps, J};
  const PMatrixSpec coarse{coarse_i, dT, eps, std::nullopt};
  double norm = 0.0;
  for (double lambda : operator_eigenvalues(grid))
    norm = std::max(norm, std::abs(p_eigenvalue(fine, -lambda) - p_eigenvalue(coarse, -lambda)));
  return norm;
}

BoundParams alpha_beta(Variant variant, const TimePartition &part, double eps,
                       const SpatialGrid &grid) {
  part.validate();
  int fine_i = 0, coarse_i = 0;
  switch (variant) {
  case Variant::PA1:
    fine_i = coarse_i = 1;
    break;
  case Variant::PA2:
    fine_i = coarse_i = 2;
    break;
  case Variant::PA3:
    fine_i = 2;
    coarse_i = 1;
    break;
  default:
    throw std::invalid_argument("alpha_beta applies to the linear variants; use the "
                                "LTE constant for " + to_string(variant));
  }
  const double dT = part.coarse_dt();
  BoundParams p;
  p.alpha = p_difference_norm(fine_i, coarse_i, dT, eps, part.J, grid);
  p.beta = p_matrix_norm({coarse_i, dT, eps, std::nullopt}, grid);
  p.N = part.N;
  p.variant = variant;
  return p;
}

BoundParams npa_bound_params(Variant variant, const TimePartition &part, double eps,
                             const SpatialGrid &grid, double lte_c) {
  if (!is_nonlinear(variant))
    throw std::invalid_argument("npa_bound_params applies to NPA1/NPA2 only");
  if (!(lte_c >= 0.0))
    throw std::invalid_argument("LTE constant must be non-negative");
  const double dT = part.coarse_dt();
  BoundParams p;
  p.alpha = lte_c * dT * dT;
  p.beta = p_matrix_norm({variant == Variant::NPA1 ? 1 : 3, dT, eps, std::nullopt}, grid);
  p.N = part.N;
  p.variant = variant;
  return p;
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n)
    return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int j = 1; j <= k; ++j)
    c = c * (n - k + j) / j;
  return c < 9e15 ? std::round(c) : c;
}

double toeplitz_norm_bound(double beta, int N, int k) {
  if (k == 0)
    return 1.0;
  const double geo = beta == 1.0 ? static_cast<double>(N - 1)
                                 : (1.0 - std::pow(beta, N - 1)) / (1.0 - beta);
  return std::min(std::pow(geo, k), binomial(N - 1, k));
}

double error_bound(const BoundParams &params, int k, double e0) {
  if (k < 0)
    throw std::invalid_argument("iteration index must be non-negative");
  if (params.alpha == 0.0 || e0 == 0.0)
    return 0.0;
  const double envelope = toeplitz_norm_bound(params.beta, params.N, k + 1);
  if (envelope == 0.0)
    return 0.0;
  return std::pow(params.alpha, k + 1) * envelope * e0;
}

double bound_at_iteration(const BoundParams &params, int iteration, double e0) {
  return iteration == 0 ? e0 : error_bound(params, iteration - 1, e0);
}

double lte_constant(const Propagator &fine, int fine_steps, const Propagator &coarse,
                    int coarse_steps, const TimePartition &part, const Field &u0) {
  part.validate();
  const double dT = part.coarse_dt();
  std::vector<Field> ref{u0}, init{u0};
  for (int n = 0; n < part.N; ++n) {
    ref.push_back(fine.propagate(ref.back(), fine_steps));
    init.push_back(coarse.propagate(init.back(), coarse_steps));
  }

  double c = 0.0;
  bool sampled = false;
  double max_gap = 0.0;
  for (int n = 1; n < part.N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    // (F - G) at the fine state: F(U_n) is the next reference value.
    const Field gap_ref = ref[i + 1] - coarse.propagate(ref[i], coarse_steps);
    max_gap = std::max(max_gap, l2_norm(gap_ref));
    const double dist = l2_distance(ref[i], init[i]);
    if (dist < 1e-14)
      continue;
    const Field gap_init = fine.propagate(init[i], fine_steps) - init[i + 1];
    c = std::max(c, l2_distance(gap_ref, gap_init) / (dT * dT * dist));
    sampled = true;
  }
  if (!sampled) {
    // Coinciding trajectories: C is only determined when F - G vanishes.
    if (max_gap < 1e-14)
      return 0.0;
    throw std::runtime_error("lte_constant: fine and coarse trajectories coincide; "
                             "no difference quotient available");
  }
  return c;
}

double lte_constant(Variant variant, const TimePartition &part, double eps,
                    OperatorPtr op, const Field &u0) {
  if (!is_nonlinear(variant))
    throw std::invalid_argument("lte_constant applies to NPA1/NPA2 only");
  PropagatorPair props = make_propagators(variant, part, eps, std::move(op));
  return lte_constant(props.fine, part.J, props.coarse, 1, part, u0);
}

Eigen::MatrixXd toeplitz_inverse(double beta, int n) {
  if (n < 1)
    throw std::invalid_argument("matrix size must be positive");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    double p = 1.0;
    for (int r = c; r < n; ++r) {
      m(r, c) = p;
      p *= beta;
    }
  }
  return m;
}

Vector toeplitz_power_column(double beta, int N, int k) {
  if (N < 1 || k < 0)
    throw std::invalid_argument("toeplitz_power_column needs N >= 1 and k >= 0");
  Vector col = Vector::Zero(N);
  if (k == 0) {
    col[0] = 1.0;
    return col;
  }
  // 1-based row i: C(i-2, k-1) beta^{i-1-k} for k+1 <= i <= N.
  for (int i = k + 1; i <= N; ++i)
    col[i - 1] = binomial(i - 2, k - 1) * std::pow(beta, i - 1 - k);
  return col;
}

Eigen::MatrixXd toeplitz_power(double beta, int N, int k) {
  const Vector col = toeplitz_power_column(beta, N, k);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
  for (int c = 0; c < N; ++c)
    for (int r = c; r < N; ++r)
      m(r, c) = col[r - c];
  return m;
}

double stability_envelope(const StabilityInputs &in) {
  const double growth = is_nonlinear(in.variant)
                            ? in.lte_constant * (in.n + 1) * in.dT * in.dT
                            : static_cast<double>(in.n + 1);
  return in.u0_norm + growth * in.max_previous_norm;
}

int stability_violations(const IterationTrace &trace, Variant variant, double lte_c,
                         double dT) {
  int violations = 0;
  for (std::size_t r = 1; r < trace.records.size(); ++r) {
    const auto &prev = trace.records[r - 1].slice_norms;
    const auto &cur = trace.records[r].slice_norms;
    double running_max = 0.0;
    for (std::size_t n = 0; n + 1 < cur.size(); ++n) {
      running_max = std::max(running_max, prev[n]);
      StabilityInputs in{prev.front(), static_cast<int>(n), running_max, variant, lte_c, dT};
      const double env = stability_envelope(in);
      if (cur[n + 1] > env * (1.0 + 1e-12))
        ++violations;
    }
  }
  return violations;
}

} // namespace chpar::theory
