#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qrelay/errors.hpp"
#include "qrelay/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;      // usage / parse errors
constexpr int kExitInvariant = 2;  // invariant violations
constexpr int kExitOracle = 3;     // oracle-check failure

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

int do_run(const std::string& scenario_name, const std::string& out_dir,
           std::optional<std::uint64_t> seed_override, bool with_transcript) {
  const qrelay::Scenario scenario = qrelay::load_scenario(scenario_name);
  const qrelay::ScenarioResult result =
      qrelay::run_scenario(scenario, seed_override, with_transcript);

  // everything is computed before any file is created, so a failed run
  // leaves no partial output behind
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::string stats_name =
      scenario.stats_filename.empty() ? result.name + "-stats.csv" : scenario.stats_filename;
  const std::filesystem::path stats_path = dir / stats_name;
  write_file(stats_path, qrelay::render_stats_csv(result));
  std::cout << "wrote " << stats_path.string() << " (" << result.rows.size() << " rows)\n";

  if (with_transcript) {
    for (std::size_t i = 0; i < result.transcripts.size(); ++i) {
      if (result.transcripts[i].empty()) continue;
      const std::filesystem::path t_path =
          dir / (result.name + "-transcript-" + std::to_string(i) + ".csv");
      write_file(t_path, result.transcripts[i]);
      std::cout << "wrote " << t_path.string() << '\n';
    }
  }
  return kExitOk;
}

int do_oracle_check(const std::string& scenario_name,
                    std::optional<std::uint64_t> seed_override) {
  const qrelay::Scenario scenario = qrelay::load_scenario(scenario_name);
  const auto rows = qrelay::oracle_check(scenario, seed_override);

  bool all_pass = true;
  std::printf("%-18s %-22s %12s %12s %8s  %s\n", "point", "statistic", "observed",
              "expected", "z", "status");
  for (const auto& row : rows) {
    std::printf("%-18s %-22s %12.6g %12.6g %8.3f  %s\n", row.point.c_str(),
                row.statistic.c_str(), row.observed, row.expected, row.z,
                row.pass ? "ok" : "FAIL");
    all_pass = all_pass && row.pass;
  }
  if (!all_pass) {
    std::cout << "oracle-check: at least one statistic deviates by more than 4 sigma\n";
    return kExitOracle;
  }
  std::cout << "oracle-check: all statistics within 4 sigma of the exact enumeration\n";
  return kExitOk;
}

int do_list() {
  for (const auto& name : qrelay::bundled_scenario_names())
    std::cout << name << "  -  " << qrelay::bundled_scenario_summary(name) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrelay - key-distribution relay chain simulator"};
  app.require_subcommand(1);

  std::string scenario_name;
  std::string out_dir = ".";
  bool with_transcript = false;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;

  auto* run = app.add_subcommand("run", "run a scenario and write its stats file");
  run->add_option("scenario", scenario_name, "bundled scenario name or config file path")
      ->required();
  run->add_option("--out", out_dir, "output directory (default: current)");
  auto* run_seed = run->add_option("--seed", seed_value, "override the scenario seed");
  run->add_flag("--transcript", with_transcript, "also write per-round transcripts");

  auto* check = app.add_subcommand(
      "oracle-check", "compare a scenario's Monte Carlo statistics to the exact enumeration");
  check->add_option("scenario", scenario_name, "bundled scenario name or config file path")
      ->required();
  auto* check_seed = check->add_option("--seed", seed_value, "override the scenario seed");

  app.add_subcommand("list-scenarios", "list the bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("run")) {
      if (run_seed->count() > 0) seed_override = seed_value;
      return do_run(scenario_name, out_dir, seed_override, with_transcript);
    }
    if (app.got_subcommand("oracle-check")) {
      if (check_seed->count() > 0) seed_override = seed_value;
      return do_oracle_check(scenario_name, seed_override);
    }
    return do_list();
  } catch (const qrelay::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const qrelay::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
}
