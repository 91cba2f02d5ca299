// Command-line front end: gamma-star, solve, run, sweep.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eecoord/cli.hpp"

namespace {

using namespace eecoord;

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

struct ScenarioFlags {
  std::size_t players = 5;
  std::size_t carriers = 0;
  double snr_db = 10.0;
  double rate = 1e6;
  int order = 100;
  double delta = 1e-3;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms{"ocsc", "mcsc", "random", "pooling"};
  double budget = 0.0;
  std::string output;
  std::string format;
  unsigned threads = 1;

  void attach(CLI::App* app, bool with_players) {
    if (with_players) app->add_option("-N,--users", players, "Number of users N")->check(CLI::PositiveNumber);
    app->add_option("-K,--carriers", carriers, "Number of carriers K (default: K = N)");
    app->add_option("--snr-db", snr_db, "SNR = 1/sigma^2 in dB");
    app->add_option("--rate", rate, "Per-user rate R_n in bits/s");
    app->add_option("-M,--order", order, "Efficiency order M (block length in bits)");
    app->add_option("--delta", delta, "Ordering-search tolerance");
    app->add_option("-t,--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Base random seed");
    app->add_option("-a,--algorithms", algorithms, "ocsc, mcsc, random, pooling, exhaustive")
        ->delimiter(',');
    app->add_option("--pooling-budget", budget, "Pooling power budget in watts (default gamma*sigma^2)");
    app->add_option("-o,--output", output, "Output file (.csv or .json)")->required();
    app->add_option("--format", format, "Override output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("-j,--threads", threads, "Worker threads for trials (0 = all cores)");
  }

  cli::ExperimentOptions to_options() const {
    cli::ExperimentOptions opt;
    opt.spec.players = players;
    if (carriers > 0) opt.spec.carriers = carriers;
    opt.spec.snr_db = snr_db;
    opt.spec.rate = rate;
    opt.spec.efficiency_order = order;
    opt.spec.delta = delta;
    opt.spec.trials = trials;
    opt.spec.seed = seed;
    opt.spec.algorithms = parse_methods(algorithms);
    if (budget > 0.0) opt.spec.pooling_budget = budget;
    opt.output = output;
    if (!format.empty()) opt.format = format == "json" ? io::Format::json : io::Format::csv;
    opt.threads = threads;
    return opt;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical multi-carrier energy-efficient power control simulator"};
  app.require_subcommand(1);

  int gs_order = 100;
  auto* gs = app.add_subcommand("gamma-star", "Solve x f'(x) = f(x) for f(x) = (1-e^-x)^M");
  gs->add_option("-M,--order", gs_order, "Efficiency order M");

  cli::SolveOptions solve;
  std::vector<std::string> solve_algorithms{"ocsc"};
  auto* sv = app.add_subcommand("solve", "Run algorithms on one channel matrix file");
  sv->add_option("channels", solve.channel_path, "Channel file: 'N K' then N rows of K gains")
      ->required();
  sv->add_option("--snr-db", solve.snr_db, "SNR = 1/sigma^2 in dB");
  sv->add_option("--noise", solve.noise_variance, "Noise variance sigma^2 (overrides --snr-db)");
  sv->add_option("--rate", solve.rate, "Per-user rate R_n in bits/s");
  sv->add_option("-M,--order", solve.efficiency_order, "Efficiency order M");
  sv->add_option("--delta", solve.delta, "Ordering-search tolerance");
  sv->add_option("-a,--algorithms", solve_algorithms, "ocsc, mcsc, random, pooling, exhaustive")
      ->delimiter(',');
  sv->add_option("--seed", solve.seed, "Seed for the random ordering baseline");
  sv->add_option("--pooling-budget", solve.pooling_budget, "Pooling power budget in watts");
  sv->add_flag("--json", solve.json, "Print the report as JSON");

  ScenarioFlags run_flags;
  auto* run = app.add_subcommand("run", "Monte Carlo experiment at one configuration");
  run_flags.attach(run, true);

  ScenarioFlags sweep_flags;
  std::string axis = "users";
  std::string values;
  auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep over users or SNR");
  sweep_flags.attach(sw, true);
  sw->add_option("--axis", axis, "users or snr")->check(CLI::IsMember({"users", "snr"}));
  sw->add_option("--values", values, "Axis values: a,b,c or start:stop[:step]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::ok : cli::usage;
  }

  try {
    if (*gs) {
      cli::cmd_gamma_star(gs_order, std::cout);
    } else if (*sv) {
      solve.algorithms = parse_methods(solve_algorithms);
      cli::cmd_solve(solve, std::cout);
    } else if (*run) {
      cli::cmd_experiment(run_flags.to_options());
      std::cout << "wrote " << run_flags.output << '\n';
    } else if (*sw) {
      auto opt = sweep_flags.to_options();
      opt.axis = parse_axis(axis);
      opt.values = cli::parse_values(values);
      cli::cmd_experiment(opt);
      std::cout << "wrote " << sweep_flags.output << '\n';
    }
  } catch (...) {
    const auto e = std::current_exception();
    try {
      std::rethrow_exception(e);
    } catch (const std::exception& ex) {
      std::cerr << "error: " << ex.what() << '\n';
    } catch (...) {
      std::cerr << "error: unknown failure\n";
    }
    return cli::exit_code_for(e);
  }
  return cli::ok;
}
