#include "chpar/parareal.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

namespace chpar {

std::string to_string(Variant v) {
  switch (v) {
  case Variant::PA1:
    return "pa1";
  case Variant::PA2:
    return "pa2";
  case Variant::PA3:
    return "pa3";
  case Variant::NPA1:
    return "npa1";
  case Variant::NPA2:
    return "npa2";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(const std::string &name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_')
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "pa1" || s == "pai")
    return Variant::PA1;
  if (s == "pa2" || s == "paii")
    return Variant::PA2;
  if (s == "pa3" || s == "paiii")
    return Variant::PA3;
  if (s == "npa1" || s == "npai")
    return Variant::NPA1;
  if (s == "npa2" || s == "npaii")
    return Variant::NPA2;
  return std::nullopt;
}

bool is_nonlinear(Variant v) { return v == Variant::NPA1 || v == Variant::NPA2; }

VariantSchemes schemes_of(Variant v) {
  switch (v) {
  case Variant::PA1:
    return {Scheme::LinearA, Scheme::LinearA};
  case Variant::PA2:
    return {Scheme::LinearB, Scheme::LinearB};
  case Variant::PA3:
    return {Scheme::LinearB, Scheme::LinearA};
  case Variant::NPA1:
    return {Scheme::NonlinearEyre, Scheme::LinearA};
  case Variant::NPA2:
    return {Scheme::NonlinearEyre, Scheme::NonlinearEyre};
  }
  throw std::invalid_argument("unknown variant");
}

void TimePartition::validate() const {
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("final time T must be positive");
  if (N < 1)
    throw std::invalid_argument("coarse slice count N must be at least 1");
  if (J < 1)
    throw std::invalid_argument("fine steps per slice J must be at least 1");
}

PropagatorPair make_propagators(Variant v, const TimePartition &part, double eps,
                                OperatorPtr op, const std::optional<NNParams> &nn_fine) {
  part.validate();
  const VariantSchemes s = schemes_of(v);
  PropagatorSpec fine;
  fine.scheme = s.fine;
  fine.dt = part.fine_dt();
  fine.eps = eps;
  PropagatorSpec coarse = fine;
  coarse.scheme = s.coarse;
  coarse.dt = part.coarse_dt();
  if (nn_fine) {
    if (s.fine != Scheme::LinearA)
      throw std::invalid_argument("the Neumann-Neumann fine solver replaces Linear-A only (" +
                                  to_string(v) + " uses " + to_string(s.fine) + ")");
    fine.scheme = Scheme::NeumannNeumannLinearA;
    fine.nn = nn_fine;
  }
  return {Propagator(op, fine), Propagator(std::move(op), coarse)};
}

double linf_l2_error(const std::vector<Field> &a, const std::vector<Field> &b) {
  if (a.size() != b.size())
    throw std::invalid_argument("trajectories differ in length");
  double e = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n)
    e = std::max(e, l2_distance(a[n], b[n]));
  return e;
}

PararealEngine::PararealEngine(PropagatorPair props, TimePartition part, int workers)
    : props_(std::move(props)), part_(part), workers_(workers) {
  part_.validate();
  if (workers_ < 1)
    throw std::invalid_argument("worker count must be at least 1");
}

Field PararealEngine::fine_slice(const Field &u, PropagationStats *stats) const {
  return props_.fine.propagate(u, part_.J, stats);
}

Field PararealEngine::coarse_slice(const Field &u, PropagationStats *stats) const {
  return props_.coarse.propagate(u, 1, stats);
}

namespace {

[[noreturn]] void rethrow_with_slice(const std::exception_ptr &e, int n, const char *phase) {
  try {
    std::rethrow_exception(e);
  } catch (const SolverError &err) {
    std::ostringstream os;
    os << phase << " propagator failed on slice " << n << ": " << err.what();
    throw SolverError(os.str(), err.last_residual());
  } catch (const std::exception &err) {
    std::ostringstream os;
    os << phase << " propagator failed on slice " << n << ": " << err.what();
    throw std::runtime_error(os.str());
  }
}

} // namespace

std::vector<Field> PararealEngine::serial_fine_reference(const Field &u0,
                                                         PropagationStats *stats) const {
  std::vector<Field> ref;
  ref.reserve(static_cast<std::size_t>(part_.N + 1));
  ref.push_back(u0);
  for (int n = 0; n < part_.N; ++n) {
    try {
      ref.push_back(fine_slice(ref.back(), stats));
    } catch (...) {
      rethrow_with_slice(std::current_exception(), n, "fine");
    }
  }
  return ref;
}

std::vector<Field> PararealEngine::coarse_init(const Field &u0, PropagationStats *stats) const {
  std::vector<Field> U;
  U.reserve(static_cast<std::size_t>(part_.N + 1));
  U.push_back(u0);
  for (int n = 0; n < part_.N; ++n) {
    try {
      U.push_back(coarse_slice(U.back(), stats));
    } catch (...) {
      rethrow_with_slice(std::current_exception(), n, "coarse");
    }
  }
  return U;
}

std::vector<Field> PararealEngine::fine_sweep_serial(const std::vector<Field> &U,
                                                     PropagationStats *stats) const {
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(part_.N));
  for (int n = 0; n < part_.N; ++n) {
    try {
      out.push_back(fine_slice(U[static_cast<std::size_t>(n)], stats));
    } catch (...) {
      rethrow_with_slice(std::current_exception(), n, "fine");
    }
  }
  return out;
}

std::vector<Field> PararealEngine::fine_sweep(const std::vector<Field> &U,
                                              PropagationStats *stats) const {
  const auto n_slices = static_cast<std::size_t>(part_.N);
  std::vector<Field> out(n_slices, Field(U.front().grid()));
  std::vector<PropagationStats> local(n_slices);
  std::vector<std::exception_ptr> errors(n_slices);

#pragma omp parallel for num_threads(workers_) schedule(dynamic, 1)
  for (int n = 0; n < part_.N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    try {
      out[i] = fine_slice(U[i], &local[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < n_slices; ++i)
    if (errors[i])
      rethrow_with_slice(errors[i], static_cast<int>(i), "fine");
  if (stats)
    for (const auto &s : local)
      stats->merge(s);
  return out;
}

ParerealState PararealEngine::initial_state(const Field &u0,
                                            PropagationStats *coarse_stats) const {
  ParerealState s{u0, coarse_init(u0, coarse_stats), {}, {}, {}, 0};
  s.G_cur.assign(s.U.begin() + 1, s.U.end());
  return s;
}

ParerealState PararealEngine::iterate(const ParerealState &state,
                                      PropagationStats *fine_stats,
                                      PropagationStats *coarse_stats) const {
  const auto n_slices = static_cast<std::size_t>(part_.N);

  // Slices whose start value did not move since the last sweep reuse the
  // previous fine result; only the rest go to the workers.
  std::vector<Field> F(n_slices, Field(state.u0.grid()));
  std::vector<Field> pending;
  std::vector<std::size_t> pending_idx;
  for (std::size_t n = 0; n < n_slices; ++n) {
    if (!state.F_prev.empty() && identical(state.U[n], state.U_prev[n])) {
      F[n] = state.F_prev[n];
    } else {
      pending.push_back(state.U[n]);
      pending_idx.push_back(n);
    }
  }
  if (!pending.empty()) {
    std::vector<Field> computed(pending.size(), Field(state.u0.grid()));
    std::vector<PropagationStats> local(pending.size());
    std::vector<std::exception_ptr> errors(pending.size());
    const int count = static_cast<int>(pending.size());
#pragma omp parallel for num_threads(workers_) schedule(dynamic, 1)
    for (int i = 0; i < count; ++i) {
      const auto u = static_cast<std::size_t>(i);
      try {
        computed[u] = fine_slice(pending[u], &local[u]);
      } catch (...) {
        errors[u] = std::current_exception();
      }
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (errors[i])
        rethrow_with_slice(errors[i], static_cast<int>(pending_idx[i]), "fine");
      if (fine_stats)
        fine_stats->merge(local[i]);
      F[pending_idx[i]] = std::move(computed[i]);
    }
  }

  ParerealState next{state.u0, {}, {}, {}, {}, state.k + 1};
  next.U.reserve(n_slices + 1);
  next.U.push_back(state.u0);
  next.G_cur.reserve(n_slices);
  for (std::size_t n = 0; n < n_slices; ++n) {
    const Field &start = next.U[n];
    if (identical(start, state.U[n])) {
      // G(U_n^{k+1}) == G(U_n^k) exactly, so the correction reduces to F.
      next.G_cur.push_back(state.G_cur[n]);
      next.U.push_back(F[n]);
      continue;
    }
    Field g(start.grid());
    try {
      g = coarse_slice(start, coarse_stats);
    } catch (...) {
      rethrow_with_slice(std::current_exception(), static_cast<int>(n), "coarse");
    }
    Field u = g + F[n];
    u -= state.G_cur[n];
    next.G_cur.push_back(std::move(g));
    next.U.push_back(std::move(u));
  }
  next.U_prev = state.U;
  next.F_prev = std::move(F);
  return next;
}

IterationTrace PararealEngine::run(const Field &u0, double tol, int max_iter,
                                   std::vector<Field> *reference_out,
                                   ParerealState *final_state) const {
  if (!(tol > 0.0))
    throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 0)
    throw std::invalid_argument("max_iter must be non-negative");
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  IterationTrace trace;
  auto t0 = clock::now();
  const std::vector<Field> ref = serial_fine_reference(u0, &trace.fine_stats);
  trace.reference_seconds = seconds(t0, clock::now());
  for (const auto &f : ref)
    trace.reference_norm = std::max(trace.reference_norm, l2_norm(f));

  auto record = [&](const ParerealState &s, double wall) {
    IterationRecord r;
    r.k = s.k;
    r.error = linf_l2_error(s.U, ref);
    r.energy_T = energy(s.U.back(), props_.fine.spec().eps);
    r.mass_T = mass(s.U.back());
    r.wall_seconds = wall;
    for (const auto &f : s.U)
      r.slice_norms.push_back(l2_norm(f));
    trace.records.push_back(std::move(r));
    if (trace.records.back().error <= tol && trace.converged_at == IterationTrace::not_converged)
      trace.converged_at = s.k;
  };

  t0 = clock::now();
  ParerealState state = initial_state(u0, &trace.coarse_stats);
  record(state, seconds(t0, clock::now()));

  while (trace.converged_at == IterationTrace::not_converged && state.k < max_iter) {
    t0 = clock::now();
    try {
      state = iterate(state, &trace.fine_stats, &trace.coarse_stats);
    } catch (const std::exception &e) {
      trace.failure = "iteration " + std::to_string(state.k + 1) + ": " + e.what();
      break;
    }
    record(state, seconds(t0, clock::now()));
  }
  if (reference_out)
    *reference_out = ref;
  if (final_state)
    *final_state = std::move(state);
  return trace;
}

} // namespace chpar
