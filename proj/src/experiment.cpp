#include "chpar/experiment.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace chpar {

Field initial_condition(const RunConfig &cfg, const SpatialGrid &grid) {
  const int m = grid.interior_per_axis();
  Vector v(static_cast<Eigen::Index>(grid.interior_count()));
  if (cfg.init == InitKind::SeededRandom) {
    std::mt19937_64 gen(cfg.seed);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double r = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      v[i] = cfg.amplitude * (2.0 * r - 1.0);
    }
  } else {
    const double h = grid.h();
    auto s = [h](int i) { return std::sin(std::numbers::pi * (i + 1) * h); };
    if (grid.dim() == 1) {
      for (int i = 0; i < m; ++i)
        v[i] = cfg.amplitude * s(i);
    } else {
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
          v[j * m + i] = cfg.amplitude * s(i) * s(j);
    }
  }
  return Field(grid, std::move(v));
}

int ExperimentResult::exit_code() const {
  if (failure)
    return 1;
  return converged() ? 0 : 2;
}

ExperimentResult run_experiment(const RunConfig &cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  const Variant v = *cfg.algorithm;
  const SpatialGrid grid = cfg.grid();
  const TimePartition part = cfg.partition();
  const OperatorPtr op = make_operator(grid);
  const Field u0 = initial_condition(cfg, grid);

  try {
    if (is_nonlinear(v)) {
      res.lte_constant = theory::lte_constant(v, part, cfg.eps, op, u0);
      res.bound = theory::npa_bound_params(v, part, cfg.eps, grid, *res.lte_constant);
    } else {
      res.bound = theory::alpha_beta(v, part, cfg.eps, grid);
    }

    PararealEngine engine(make_propagators(v, part, cfg.eps, op, cfg.nn_params()), part,
                          cfg.workers);
    res.trace = engine.run(u0, cfg.tol, cfg.resolved_max_iter());
  } catch (const std::exception &e) {
    res.failure = e.what();
    return res;
  }
  if (res.trace.failure)
    res.failure = res.trace.failure;

  if (!res.trace.records.empty()) {
    const double e0 = res.trace.records.front().error;
    for (auto &r : res.trace.records)
      r.bound = theory::bound_at_iteration(*res.bound, r.k, e0);
  }
  res.stability_violations = theory::stability_violations(
      res.trace, v, res.lte_constant.value_or(0.0), part.coarse_dt());
  return res;
}

void write_trace(std::ostream &os, const ExperimentResult &result) {
  os << "# chparareal trace v1\n";
  for (const auto &[k, v] : to_settings(result.config))
    os << "# " << k << '=' << v << '\n';
  auto info = [&os](const std::string &k, const std::string &v) {
    os << "# info." << k << '=' << v << '\n';
  };
  if (result.bound) {
    info("alpha", format_double(result.bound->alpha));
    info("beta", format_double(result.bound->beta));
  }
  if (result.lte_constant)
    info("lte_constant", format_double(*result.lte_constant));
  info("converged_at", std::to_string(result.trace.converged_at));
  info("j_downscale", std::to_string(result.config.j_downscale));
  info("reference_norm", format_double(result.trace.reference_norm));
  info("reference_seconds", format_double(result.trace.reference_seconds));
  info("max_newton_iterations", std::to_string(std::max(
                                    result.trace.fine_stats.max_newton_iterations,
                                    result.trace.coarse_stats.max_newton_iterations)));
  info("max_nn_iterations", std::to_string(result.trace.fine_stats.max_nn_iterations));
  info("stability_violations", std::to_string(result.stability_violations));
  if (result.failure) {
    std::string msg = *result.failure;
    for (char &c : msg)
      if (c == '\n')
        c = ' ';
    info("failure", msg);
  }
  os << "k,error,bound,energy_T,mass_T,wall_seconds\n";
  for (const auto &r : result.trace.records) {
    os << r.k << ',' << format_double(r.error) << ','
       << (r.bound ? format_double(*r.bound) : std::string("nan")) << ','
       << format_double(r.energy_T) << ',' << format_double(r.mass_T) << ','
       << format_double(r.wall_seconds) << '\n';
  }
}

TraceFile read_trace(std::istream &is) {
  TraceFile tf;
  std::string line;
  bool header_seen = false;
  bool columns_seen = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line.front() == '#') {
      std::string body = line.substr(line.find_first_not_of("# ") == std::string::npos
                                         ? line.size()
                                         : line.find_first_not_of("# "));
      if (!header_seen) {
        if (body != "chparareal trace v1")
          throw ConfigError("not a chparareal trace (first line: '" + line + "')");
        header_seen = true;
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        continue;
      const std::string key = body.substr(0, eq);
      const std::string value = body.substr(eq + 1);
      if (key.rfind("info.", 0) == 0)
        tf.info.emplace_back(key.substr(5), value);
      else if (!(key == "algorithm" && value.empty()))
        apply_setting(tf.config, key, value);
      continue;
    }
    if (!header_seen)
      throw ConfigError("not a chparareal trace (missing title line)");
    if (!columns_seen) {
      if (line != "k,error,bound,energy_T,mass_T,wall_seconds")
        throw ConfigError("line " + std::to_string(lineno) + ": unexpected column header");
      columns_seen = true;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (cells.size() != 6)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 6 columns");
    TraceRow r;
    try {
      r.k = std::stoi(cells[0]);
      r.error = std::stod(cells[1]);
      r.bound = std::stod(cells[2]);
      r.energy_T = std::stod(cells[3]);
      r.mass_T = std::stod(cells[4]);
      r.wall_seconds = std::stod(cells[5]);
    } catch (const std::exception &) {
      throw ConfigError("line " + std::to_string(lineno) + ": malformed number");
    }
    tf.rows.push_back(r);
  }
  if (!header_seen)
    throw ConfigError("empty trace");
  return tf;
}

} // namespace chpar
