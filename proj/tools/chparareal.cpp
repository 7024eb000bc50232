// Experiment driver: `run` executes one Parareal experiment and writes a CSV
// trace, `rerun` repeats the experiment recorded in a trace header, `presets`
// lists the named configurations and `theory` prints the bound parameters.

#include "chpar/config.hpp"
#include "chpar/experiment.hpp"
#include "chpar/theory.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

const char *usage =
    "usage: chparareal <command> [options]\n"
    "  run [--preset NAME] [--config FILE] [--key value ...]\n"
    "  rerun TRACE [--output FILE] [--workers W]\n"
    "  presets\n"
    "  theory [same options as run]\n";

int emit(const chpar::ExperimentResult &res) {
  const auto &cfg = res.config;
  if (cfg.output.empty() || cfg.output == "-") {
    chpar::write_trace(std::cout, res);
  } else {
    std::ofstream out(cfg.output);
    if (!out) {
      std::cerr << "error: cannot write " << cfg.output << '\n';
      return 1;
    }
    chpar::write_trace(out, res);
  }
  if (res.failure)
    std::cerr << "error: " << *res.failure << '\n';
  else if (!res.converged())
    std::cerr << "not converged after " << cfg.resolved_max_iter() << " iterations\n";
  else
    std::cerr << "converged at k=" << res.trace.converged_at << '\n';
  return res.exit_code();
}

int cmd_theory(const chpar::RunConfig &cfg) {
  using namespace chpar;
  const auto grid = cfg.grid();
  const auto part = cfg.partition();
  theory::BoundParams bp;
  if (is_nonlinear(*cfg.algorithm)) {
    const double c = theory::lte_constant(*cfg.algorithm, part, cfg.eps, make_operator(grid),
                                          initial_condition(cfg, grid));
    bp = theory::npa_bound_params(*cfg.algorithm, part, cfg.eps, grid, c);
    std::cout << "lte_constant=" << format_double(c) << '\n';
  } else {
    bp = theory::alpha_beta(*cfg.algorithm, part, cfg.eps, grid);
  }
  std::cout << "alpha=" << format_double(bp.alpha) << '\n'
            << "beta=" << format_double(bp.beta) << '\n'
            << "k,bound_over_e0\n";
  for (int k = 0; k <= cfg.resolved_max_iter(); ++k)
    std::cout << k << ',' << format_double(theory::bound_at_iteration(bp, k, 1.0)) << '\n';
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  if (argc < 2) {
    std::cerr << usage;
    return 1;
  }
  const std::string cmd = argv[1];
  const std::vector<std::string> rest(argv + 2, argv + argc);
  try {
    if (cmd == "presets") {
      for (const auto &n : chpar::preset_names())
        std::cout << n << '\n';
      return 0;
    }
    if (cmd == "run")
      return emit(chpar::run_experiment(chpar::parse_config(rest)));
    if (cmd == "theory")
      return cmd_theory(chpar::parse_config(rest));
    if (cmd == "rerun") {
      if (rest.empty())
        throw chpar::ConfigError("rerun: missing trace file");
      std::ifstream in(rest[0]);
      if (!in)
        throw chpar::ConfigError("cannot open trace '" + rest[0] + "'");
      chpar::RunConfig cfg = chpar::read_trace(in).config;
      cfg.output.clear();
      for (std::size_t i = 1; i < rest.size(); ++i) {
        if (i + 1 >= rest.size() || (rest[i] != "--output" && rest[i] != "--workers"))
          throw chpar::ConfigError("rerun: unexpected argument '" + rest[i] + "'");
        chpar::apply_setting(cfg, rest[i].substr(2), rest[i + 1]);
        ++i;
      }
      return emit(chpar::run_experiment(cfg));
    }
    if (cmd == "-h" || cmd == "--help") {
      std::cout << usage;
      return 0;
    }
    std::cerr << "unknown command '" << cmd << "'\n" << usage;
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
