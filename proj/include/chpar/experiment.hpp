#pragma once

#include "chpar/config.hpp"
#include "chpar/parareal.hpp"
#include "chpar/theory.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chpar {

/// Initial condition selected by the config. The random variant draws
/// amplitude * (2 r - 1) per interior node, r = (mt19937_64() >> 11) * 2^-53,
/// in lexicographic node order.
Field initial_condition(const RunConfig &cfg, const SpatialGrid &grid);

struct ExperimentResult {
  RunConfig config;
  IterationTrace trace;
  std::optional<theory::BoundParams> bound;
  std::optional<double> lte_constant;
  int stability_violations = 0;
  std::optional<std::string> failure;

  bool converged() const {
    return !failure && trace.converged_at != IterationTrace::not_converged;
  }
  /// 0 converged, 2 iteration cap reached, 1 failure.
  int exit_code() const;
};

ExperimentResult run_experiment(const RunConfig &cfg);

/// CSV with a '#'-prefixed header holding the resolved config (key=value)
/// and derived quantities (info.*).
void write_trace(std::ostream &os, const ExperimentResult &result);

struct TraceRow {
  int k = 0;
  double error = 0.0;
  double bound = 0.0;
  double energy_T = 0.0;
  double mass_T = 0.0;
  double wall_seconds = 0.0;
};

struct TraceFile {
  RunConfig config;
  std::vector<std::pair<std::string, std::string>> info;
  std::vector<TraceRow> rows;
};

TraceFile read_trace(std::istream &is);

} // namespace chpar
