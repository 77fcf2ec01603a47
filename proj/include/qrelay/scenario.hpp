#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrelay/adversary.hpp"
#include "qrelay/channel.hpp"
#include "qrelay/network.hpp"

namespace qrelay {

// ---------------------------------------------------------------------------
// Declarative scenario text: INI-style sections of key = value lines.
// Grammar and section reference live in the README.
// ---------------------------------------------------------------------------

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  std::vector<std::string> args;
  int line = 0;
  std::vector<ConfigEntry> entries;
};

struct ConfigDoc {
  std::string source;
  std::vector<ConfigSection> sections;
};

// Throws ConfigError with source:line diagnostics.
ConfigDoc parse_config(std::istream& in, const std::string& source_name);

enum class ScenarioMode : std::uint8_t { TrustedRelay, MultiParty, Network, XorRelay };

const char* scenario_mode_name(ScenarioMode mode);

struct SweepSpec {
  std::string axis;  // attack | relays | length_km | intrinsic_qber
  std::vector<std::string> values;

  bool active() const { return !values.empty(); }
};

struct Scenario {
  std::string name = "scenario";
  std::string claim;
  ScenarioMode mode = ScenarioMode::TrustedRelay;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t relays = 1;
  AttackPolicy attack;
  std::vector<std::size_t> attack_legs;  // 1-based legs, generalized chains
  double sample_fraction = 0.5;
  std::size_t safety_margin = 30;
  bool relay_detectors = true;
  ChannelSpec default_channel;
  std::map<std::size_t, ChannelSpec> channel_overrides;  // 1-based leg index
  std::optional<TopologySpec> topology;
  std::pair<std::string, std::string> endpoints;
  SweepSpec sweep;
  std::string stats_filename;  // defaults to <name>-stats.csv

  // Cross-field invariants ("seed mandatory", mode requirements, sweep axis
  // names a known parameter).  Throws InvariantError.
  void validate() const;
};

// Interprets a parsed document.  Throws ConfigError on unknown sections,
// keys or unparsable values.
Scenario interpret_config(const ConfigDoc& doc);
Scenario parse_scenario(std::istream& in, const std::string& source_name);

// Bundled, embedded scenarios (run by name from any directory).
std::vector<std::string> bundled_scenario_names();
const std::string* bundled_scenario_text(const std::string& name);
std::string bundled_scenario_summary(const std::string& name);

// Bundled name first, then filesystem path.  Throws ConfigError when the
// name resolves to nothing readable.
Scenario load_scenario(const std::string& name_or_path);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct RunRow {
  std::string point;
  double kept_fraction = 0.0;
  double qber_alice_bob = 0.0;
  double qber_alice_trent = 0.0;
  double trent_residual = 0.0;
  double eve_information = 0.0;
  double transmission = 0.0;
  std::size_t final_key_length = 0;
  // reconciliation bookkeeping (summed across legs for xor-relay runs)
  double ec_estimated_qber = 0.0;
  std::size_t ec_disclosed_bits = 0;
  std::size_t ec_leakage_bits = 0;
  std::size_t ec_corrected_length = 0;
};

struct ScenarioResult {
  std::string name;
  std::string claim;
  std::uint64_t seed = 0;
  std::vector<RunRow> rows;
  std::vector<std::string> transcripts;  // one CSV per sweep point when requested
};

// Executes every sweep point (point i uses the derived child seed i) and
// collects one stats row per run.  Deterministic given the scenario and
// seed.  Throws InvariantError on invariant violations.
ScenarioResult run_scenario(const Scenario& scenario,
                            std::optional<std::uint64_t> seed_override = std::nullopt,
                            bool with_transcripts = false);

// Stats table rendering: '#' header comments naming the scenario and the
// claim its numbers reproduce, then a CSV with floats at 6 significant
// digits.  Byte-identical for identical scenario + seed.
std::string render_stats_csv(const ScenarioResult& result);

// ---------------------------------------------------------------------------
// Oracle validation harness
// ---------------------------------------------------------------------------

// z = (observed - expected) / sqrt(expected * (1 - expected) / n); zero
// sigma yields 0 on exact agreement and infinity otherwise.
double z_score(double observed, double expected, std::size_t n);

struct OracleCheckRow {
  std::string point;
  std::string statistic;
  double observed = 0.0;
  double expected = 0.0;
  double z = 0.0;
  bool pass = true;
};

// Per-statistic comparison of a Monte Carlo report against an exact one.
std::vector<OracleCheckRow> compare_reports(const StatisticsReport& observed,
                                            const StatisticsReport& exact,
                                            std::size_t n_sifted,
                                            const std::string& point,
                                            double z_limit = 4.0);

// Runs the scenario's single-relay points and checks every Monte Carlo
// statistic against the exact enumeration at |z| <= 4.  Throws
// InvariantError for scenario shapes without an exact oracle.
std::vector<OracleCheckRow> oracle_check(const Scenario& scenario,
                                         std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace qrelay
