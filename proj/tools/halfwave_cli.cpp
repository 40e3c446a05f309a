// Command-line runner for the parameter sweeps.
//
//   halfwave_cli <experiment> [--config FILE] [--out DIR] [--seed N] [--threads N]
//                             [--eps a,b,c] [--grid N] [--sobolev s]
//
// Exit codes: 0 every band holds, 1 configuration error, 2 numerical failure,
// 3 a pass band failed.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "halfwave/experiments.hpp"
#include "halfwave/report.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> eps;
  std::optional<int> grid;
  std::optional<double> sobolev;
};

halfwave::ExperimentConfig build_config(halfwave::Experiment e, const Overrides& o) {
  using namespace halfwave;
  ExperimentConfig c = default_config(e);
  if (!o.config.empty()) {
    c = load_config(o.config, c);
    if (c.experiment != e)
      throw config_error("config file is for '" + experiment_name(c.experiment) + "', not '" + experiment_name(e) + "'");
  }
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.eps) c.eps_list = parse_double_list("--eps", *o.eps);
  if (o.sobolev) c.s = *o.sobolev;
  if (o.grid) {
    try {
      c.grid = make_grid(*o.grid);
    } catch (const std::invalid_argument& err) {
      throw config_error(err.what());
    }
  }
  validate(c);
  return c;
}

void print_result(const halfwave::SweepResult& r) {
  for (const auto& f : r.fits)
    std::cout << "fit   " << f.name << ": slope " << f.fit.slope << " [" << f.fit.interval.first << ", "
              << f.fit.interval.second << "]\n";
  for (const auto& ch : r.checks)
    std::cout << (ch.pass ? "ok    " : "FAIL  ") << ch.name << " = " << ch.value << " in [" << ch.lo << ", " << ch.hi
              << "]\n";
  for (const auto& [k, v] : r.diagnostics) std::cout << "info  " << k << " = " << v << '\n';
  for (const auto& f : r.failures) std::cout << "error " << f << '\n';
  if (r.partial) std::cout << "note  partial result: the wall-clock budget cut at least one run short\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace halfwave;
  CLI::App app{"Pseudospectral sweeps for the half-wave and Szego equations"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<Experiment> chosen;
  for (const auto& [e, name] : experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " sweep");
    sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
    sub->add_option("--eps", o.eps, "comma-separated eps values, strictly decreasing");
    sub->add_option("--grid", o.grid, "band limit N");
    sub->add_option("--sobolev", o.sobolev, "Sobolev index s");
    sub->callback([&chosen, e = e] { chosen = e; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  ExperimentConfig cfg;
  try {
    cfg = build_config(*chosen, o);
  } catch (const config_error& err) {
    std::cerr << "configuration error: " << err.what() << '\n';
    return 1;
  }

  SweepResult result;
  try {
    result = run_experiment(cfg);
  } catch (const config_error& err) {
    std::cerr << "configuration error: " << err.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "configuration error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return 2;
  }

  try {
    write_outputs(cfg.output_dir, cfg, result);
  } catch (const std::exception& err) {
    std::cerr << "output error: " << err.what() << '\n';
    return 2;
  }
  print_result(result);
  std::cout << experiment_name(cfg.experiment) << ": " << (result.pass() ? "pass" : "fail") << " ("
            << result.rows.size() << " rows in " << cfg.output_dir << ")\n";
  if (result.numerical_failure()) return 2;
  return result.pass() ? 0 : 3;
}
