// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lurerad/lurerad.h"

int main(int argc, char** argv) {
  CLI::App app{"Stability radii and sector bounds for positive Lur'e systems"};
  app.require_subcommand(1);

  std::string problem, network, out, dump_dir, norm, format = "text";
  bool override_gates = false;
  std::optional<double> delta_crit, dt, horizon;
  std::optional<uint64_t> seed;
  std::optional<int> trials;

  const std::map<std::string, std::string> commands = {
      {"check", "Evaluate the positive Aizerman certificate gates"},
      {"radius", "Compute the structured stability radius"},
      {"nn-bound", "Sector bound of a feedforward network"},
      {"sweep", "Simulate random trajectories over a list of perturbation sizes"},
      {"refine", "Refine the network's upper sector from a critical perturbation"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--problem", problem, "Problem file (JSON)");
    sub->add_option("--network", network, "Network file (JSON)");
    sub->add_option("--norm", norm, "Perturbation norm")->check(CLI::IsMember({"one", "two", "inf"}));
    sub->add_flag("--override-gates", override_gates,
                  "Evaluate the radius formula even when certification fails");
    sub->add_option("--delta-crit", delta_crit, "Critical perturbation for refine");
    sub->add_option("--out", out, "Sweep CSV output path");
    sub->add_option("--dump-dir", dump_dir, "Directory for per-trajectory CSV files");
    sub->add_option("--seed", seed, "Random seed (default 42)");
    sub->add_option("--trials", trials, "Random initial states per perturbation");
    sub->add_option("--dt", dt, "RK4 step");
    sub->add_option("--horizon", horizon, "Simulation horizon");
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  lurerad_options opts;
  lurerad_options_init(&opts);
  if (norm == "one") opts.norm = LURERAD_NORM_ONE;
  if (norm == "two") opts.norm = LURERAD_NORM_TWO;
  if (norm == "inf") opts.norm = LURERAD_NORM_INF;
  opts.override_gates = override_gates;
  if (delta_crit) {
    opts.has_delta_crit = 1;
    opts.delta_crit = *delta_crit;
  }
  if (!network.empty()) opts.network = network.c_str();
  if (!out.empty()) opts.out = out.c_str();
  if (!dump_dir.empty()) opts.dump_dir = dump_dir.c_str();
  if (seed) {
    opts.has_seed = 1;
    opts.seed = *seed;
  }
  if (trials) opts.trials = *trials;
  if (dt) opts.dt = *dt;
  if (horizon) opts.horizon = *horizon;

  lurerad_report* report = nullptr;
  const lurerad_status st = lurerad_run_file(
      command.c_str(), problem.empty() ? nullptr : problem.c_str(), &opts, &report);
  if (st != LURERAD_OK) {
    std::fprintf(stderr, "error (%s): %s\n", lurerad_status_name(st), lurerad_last_error());
    return 1;
  }
  std::fputs(format == "json" ? lurerad_report_json(report) : lurerad_report_text(report), stdout);
  const int code = lurerad_report_exit_code(report);
  lurerad_report_destroy(report);
  return code;
}
