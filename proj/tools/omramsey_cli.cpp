// omramsey <command> --scenario <path> [--out <dir>] [--workers N] [--seed S] [--observed <csv>]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <omramsey/commands.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Pulsed optomechanical Ramsey interferometry simulator"};
  app.set_version_flag("--version", std::string(omramsey::kToolName) + " " + omramsey::kToolVersion);

  std::string command;
  std::string scenario;
  std::string out;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  std::string observed;

  app.add_option("command", command, "trace | sweep | scan | fit")
      ->required()
      ->check(CLI::IsMember({"trace", "sweep", "scan", "fit"}));
  app.add_option("--scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "output directory (default: run.out from the scenario)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed for the fit's initial simplex");
  auto* observed_opt = app.add_option("--observed", observed, "observed spectrum CSV (fit)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  omramsey::CommandOptions opt;
  if (*out_opt) opt.out = out;
  if (*workers_opt) opt.workers = workers;
  if (*seed_opt) opt.seed = seed;
  if (*observed_opt) opt.observed = observed;
  return omramsey::run_command(*omramsey::parse_command(command), scenario, opt, std::cerr);
}
