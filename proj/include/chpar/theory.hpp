#pragma once

#include "chpar/grid.hpp"
#include "chpar/parareal.hpp"

#include <optional>
#include <vector>

namespace chpar::theory {

/// Contraction factor of the one-step operator
/// P_i = (I - i dT D + eps^2 dT D^2)^{-1} (I - i dT D) on the eigenvector
/// with D-eigenvalue -y:  (1 + i dT y) / (1 + i dT y + eps^2 dT y^2).
double g(int i, double y, double dT, double eps);

/// Eigenvalue of P_{J_i} - P_i (i = 1, 2) or P_{J_2} - P_1 (i = 3) at -y.
/// The fine operator composes J steps of width dT/J.
double phi(int i, double y, double dT, double eps, int J);

struct PMatrixSpec {
  int i = 1;
  double dT = 0.0;
  double eps = 0.0;
  std::optional<int> J; // present for the J-step fine operator
};

/// Eigenvalue of P_i or P_{J_i} at D-eigenvalue -y.
double p_eigenvalue(const PMatrixSpec &spec, double y);

/// Spectral norm of P_i or P_{J_i}: max over the D_h spectrum.
double p_matrix_norm(const PMatrixSpec &spec, const SpatialGrid &grid);

/// Spectral norm of P_{J_fine} - P_coarse: max |phi| over the spectrum.
double p_difference_norm(int fine_i, int coarse_i, double dT, double eps, int J,
                         const SpatialGrid &grid);

struct BoundParams {
  double alpha = 0.0;
  double beta = 0.0;
  int N = 1;
  Variant variant = Variant::PA1;
};

/// (alpha, beta) of the linear variants from the P-matrix norms.
BoundParams alpha_beta(Variant variant, const TimePartition &part, double eps,
                       const SpatialGrid &grid);

/// Nonlinear variants: alpha = C dT^2, beta = |P_1| (NPA1) or |P_3| (NPA2).
BoundParams npa_bound_params(Variant variant, const TimePartition &part, double eps,
                             const SpatialGrid &grid, double lte_constant);

/// Binomial coefficient as a double; zero when k > n or k < 0.
double binomial(int n, int k);

/// Envelope for max_j |E_j^{k+1}|:
/// alpha^{k+1} min{((1-beta^{N-1})/(1-beta))^{k+1}, C(N-1, k+1)} e0.
double error_bound(const BoundParams &params, int k, double e0);

/// Bound on the error after `iteration` sweeps (iteration 0 is e0 itself).
double bound_at_iteration(const BoundParams &params, int iteration, double e0);

/// Estimate of the LTE-difference constant C from the coarse-init trajectory:
/// max_n |(F-G)(U_n) - (F-G)(U_n^0)| / (dT^2 |U_n - U_n^0|).
double lte_constant(const Propagator &fine, int fine_steps, const Propagator &coarse,
                    int coarse_steps, const TimePartition &part, const Field &u0);

double lte_constant(Variant variant, const TimePartition &part, double eps,
                    OperatorPtr op, const Field &u0);

/// Inverse of the unit lower bidiagonal matrix with -beta on the subdiagonal.
Eigen::MatrixXd toeplitz_inverse(double beta, int n);

/// First column of T(beta)^k, T strictly lower triangular Toeplitz with
/// first column (0, 1, beta, beta^2, ...).
Vector toeplitz_power_column(double beta, int N, int k);

/// Full T(beta)^k built from its first column.
Eigen::MatrixXd toeplitz_power(double beta, int N, int k);

/// min{((1-beta^{N-1})/(1-beta))^k, C(N-1, k)}.
double toeplitz_norm_bound(double beta, int N, int k);

struct StabilityInputs {
  double u0_norm = 0.0;
  int n = 0;                    // bound applies to U_{n+1}^{k+1}
  double max_previous_norm = 0.0; // max_{0<=j<=n} |U_j^k|
  Variant variant = Variant::PA1;
  double lte_constant = 0.0;    // used by NPA variants
  double dT = 0.0;
};

double stability_envelope(const StabilityInputs &in);

/// Number of (k, n) pairs in a trace where |U_{n+1}^{k+1}| exceeds the
/// stability envelope.
int stability_violations(const IterationTrace &trace, Variant variant, double lte_c,
                         double dT);

} // namespace chpar::theory
