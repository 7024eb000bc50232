#pragma once

#include "chpar/grid.hpp"
#include "chpar/schemes.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chpar {

enum class Variant { PA1, PA2, PA3, NPA1, NPA2 };

std::string to_string(Variant v);
std::optional<Variant> parse_variant(const std::string &name);
bool is_nonlinear(Variant v);

struct VariantSchemes {
  Scheme fine;
  Scheme coarse;
};

/// Fixed fine/coarse pairing of each algorithm.
VariantSchemes schemes_of(Variant v);

/// Two-level time mesh: N coarse slices of width T/N, each split into J
/// fine steps.
struct TimePartition {
  double T = 1.0;
  int N = 1;
  int J = 1;

  double coarse_dt() const { return T / N; }
  double fine_dt() const { return T / N / J; }
  void validate() const;
};

/// Builds the fine and coarse propagators of a variant. A Neumann-Neumann
/// override replaces the direct Linear-A fine solver.
struct PropagatorPair {
  Propagator fine;
  Propagator coarse;
};

PropagatorPair make_propagators(Variant v, const TimePartition &part, double eps,
                                OperatorPtr op,
                                const std::optional<NNParams> &nn_fine = std::nullopt);

struct ParerealState {
  Field u0;
  std::vector<Field> U;        // U_n^k, n = 0..N
  std::vector<Field> U_prev;   // U_n^{k-1}; empty at k = 0
  std::vector<Field> G_cur;    // G(U_n^k), n = 0..N-1
  std::vector<Field> F_prev;   // F(U_n^{k-1}), reused when U_n^k == U_n^{k-1}
  int k = 0;
};

struct IterationRecord {
  int k = 0;
  double error = 0.0;
  std::optional<double> bound;
  double energy_T = 0.0;
  double mass_T = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> slice_norms; // l2 norms of U_n^k, n = 0..N
};

struct IterationTrace {
  static constexpr int not_converged = -1;
  std::vector<IterationRecord> records;
  int converged_at = not_converged;
  double reference_norm = 0.0; // max_n |U(T_n)|
  double reference_seconds = 0.0;
  PropagationStats fine_stats;
  PropagationStats coarse_stats;
  std::optional<std::string> failure; // set when a sweep threw; records stop there
};

/// Error metric: max over coarse points of the spatial l2 distance.
double linf_l2_error(const std::vector<Field> &a, const std::vector<Field> &b);

/// Parareal driver. Fine sweeps over the N slices run on `workers` OpenMP
/// threads; `fine_sweep_serial` is the plain loop used as a reference.
class PararealEngine {
public:
  PararealEngine(PropagatorPair props, TimePartition part, int workers = 1);

  const TimePartition &partition() const { return part_; }
  const Propagator &fine() const { return props_.fine; }
  const Propagator &coarse() const { return props_.coarse; }
  int workers() const { return workers_; }

  std::vector<Field> serial_fine_reference(const Field &u0,
                                           PropagationStats *stats = nullptr) const;
  std::vector<Field> coarse_init(const Field &u0, PropagationStats *stats = nullptr) const;

  /// F(U_n) for n = 0..N-1.
  std::vector<Field> fine_sweep(const std::vector<Field> &U,
                                PropagationStats *stats = nullptr) const;
  std::vector<Field> fine_sweep_serial(const std::vector<Field> &U,
                                       PropagationStats *stats = nullptr) const;

  ParerealState initial_state(const Field &u0, PropagationStats *coarse_stats = nullptr) const;

  /// One prediction-correction sweep, U^k -> U^{k+1}.
  ParerealState iterate(const ParerealState &state, PropagationStats *fine_stats = nullptr,
                        PropagationStats *coarse_stats = nullptr) const;

  /// Iterates until the error against the serial fine reference drops to
  /// `tol` or `max_iter` sweeps were done. A solver failure inside a sweep
  /// ends the run with `failure` set; failures of the reference or the coarse
  /// initialization propagate.
  IterationTrace run(const Field &u0, double tol, int max_iter,
                     std::vector<Field> *reference_out = nullptr,
                     ParerealState *final_state = nullptr) const;

private:
  Field fine_slice(const Field &u, PropagationStats *stats) const;
  Field coarse_slice(const Field &u, PropagationStats *stats) const;

  PropagatorPair props_;
  TimePartition part_;
  int workers_;
};

} // namespace chpar
