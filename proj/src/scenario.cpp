#include "qrelay/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qrelay/errors.hpp"
#include "qrelay/postproc.hpp"
#include "qrelay/session.hpp"
#include "qrelay/xor_relay.hpp"

namespace qrelay {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> tokens;
  std::istringstream in(s);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

// comma-separated when commas are present, whitespace-separated otherwise
std::vector<std::string> split_list(const std::string& s) {
  if (s.find(',') == std::string::npos) return split_tokens(s);
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& what) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const ConfigDoc& doc, const ConfigEntry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    parse_fail(doc.source, e.line, "field '" + e.key + "': expected a number, got '" + e.value + "'");
  }
}

std::uint64_t parse_u64(const ConfigDoc& doc, const ConfigEntry& e) {
  try {
    if (!e.value.empty() && e.value.front() == '-') throw std::invalid_argument("negative");
    std::size_t used = 0;
    const unsigned long long v = std::stoull(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    parse_fail(doc.source, e.line,
               "field '" + e.key + "': expected a nonnegative integer, got '" + e.value + "'");
  }
}

bool parse_bool(const ConfigDoc& doc, const ConfigEntry& e) {
  if (e.value == "true" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "off" || e.value == "0") return false;
  parse_fail(doc.source, e.line, "field '" + e.key + "': expected true or false, got '" + e.value + "'");
}

std::string fmt6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

ConfigDoc parse_config(std::istream& in, const std::string& source_name) {
  ConfigDoc doc;
  doc.source = source_name;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        parse_fail(source_name, line_no, "unterminated section header");
      const auto tokens = split_tokens(line.substr(1, line.size() - 2));
      if (tokens.empty()) parse_fail(source_name, line_no, "empty section header");
      ConfigSection section;
      section.name = tokens.front();
      section.args.assign(tokens.begin() + 1, tokens.end());
      section.line = line_no;
      doc.sections.push_back(std::move(section));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(source_name, line_no, "expected 'key = value' or a [section] header");
    if (doc.sections.empty())
      parse_fail(source_name, line_no, "entry outside any section");
    ConfigEntry entry;
    entry.key = trim(line.substr(0, eq));
    entry.value = trim(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) parse_fail(source_name, line_no, "empty key");
    doc.sections.back().entries.push_back(std::move(entry));
  }
  return doc;
}

const char* scenario_mode_name(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::TrustedRelay: return "trusted-relay";
    case ScenarioMode::MultiParty: return "multi-party";
    case ScenarioMode::Network: return "network";
    case ScenarioMode::XorRelay: return "xor-relay";
  }
  return "?";
}

namespace {

ScenarioMode mode_from_name(const ConfigDoc& doc, const ConfigEntry& e) {
  if (e.value == "trusted-relay") return ScenarioMode::TrustedRelay;
  if (e.value == "multi-party") return ScenarioMode::MultiParty;
  if (e.value == "network") return ScenarioMode::Network;
  if (e.value == "xor-relay") return ScenarioMode::XorRelay;
  parse_fail(doc.source, e.line,
             "field 'mode': expected trusted-relay, multi-party, network or xor-relay");
}

void read_channel_fields(const ConfigDoc& doc, const ConfigSection& section, ChannelSpec& spec,
                         Platform* platform) {
  for (const auto& e : section.entries) {
    if (e.key == "length_km") {
      spec.length_km = parse_double(doc, e);
    } else if (e.key == "attenuation_db_per_km") {
      spec.attenuation_db_per_km = parse_double(doc, e);
    } else if (e.key == "intrinsic_qber") {
      spec.intrinsic_qber = parse_double(doc, e);
    } else if (e.key == "detector_efficiency") {
      spec.detector_efficiency = parse_double(doc, e);
    } else if (e.key == "platform" && platform) {
      try {
        *platform = platform_from_name(e.value);
      } catch (const ConfigError& err) {
        parse_fail(doc.source, e.line, err.what());
      }
    } else {
      parse_fail(doc.source, e.line, "unknown field '" + e.key + "' in [" + section.name + "]");
    }
  }
}

}  // namespace

Scenario interpret_config(const ConfigDoc& doc) {
  Scenario sc;

  for (const auto& section : doc.sections) {
    if (section.name == "scenario") {
      for (const auto& e : section.entries) {
        if (e.key == "name") sc.name = e.value;
        else if (e.key == "claim") sc.claim = e.value;
        else parse_fail(doc.source, e.line, "unknown field '" + e.key + "' in [scenario]");
      }
    } else if (section.name == "session") {
      for (const auto& e : section.entries) {
        if (e.key == "mode") {
          sc.mode = mode_from_name(doc, e);
        } else if (e.key == "rounds") {
          sc.rounds = static_cast<std::size_t>(parse_u64(doc, e));
        } else if (e.key == "seed") {
          sc.seed = parse_u64(doc, e);
          sc.seed_set = true;
        } else if (e.key == "relays") {
          sc.relays = static_cast<std::size_t>(parse_u64(doc, e));
        } else if (e.key == "attack") {
          try {
            sc.attack = policy_from_name(e.value);
          } catch (const ConfigError& err) {
            parse_fail(doc.source, e.line, err.what());
          }
        } else if (e.key == "attack_legs") {
          for (const auto& item : split_list(e.value)) {
            ConfigEntry leg_entry{e.key, item, e.line};
            sc.attack_legs.push_back(static_cast<std::size_t>(parse_u64(doc, leg_entry)));
          }
        } else if (e.key == "sample_fraction") {
          sc.sample_fraction = parse_double(doc, e);
        } else if (e.key == "safety_margin") {
          sc.safety_margin = static_cast<std::size_t>(parse_u64(doc, e));
        } else if (e.key == "relay_detectors") {
          sc.relay_detectors = parse_bool(doc, e);
        } else if (e.key == "endpoints") {
          const auto tokens = split_list(e.value);
          if (tokens.size() != 2)
            parse_fail(doc.source, e.line, "field 'endpoints': expected two node names");
          sc.endpoints = {tokens[0], tokens[1]};
        } else {
          parse_fail(doc.source, e.line, "unknown field '" + e.key + "' in [session]");
        }
      }
    } else if (section.name == "channel") {
      if (section.args.empty()) {
        read_channel_fields(doc, section, sc.default_channel, nullptr);
      } else if (section.args.size() == 1) {
        ConfigEntry idx{"channel index", section.args[0], section.line};
        const auto leg = static_cast<std::size_t>(parse_u64(doc, idx));
        if (leg == 0) parse_fail(doc.source, section.line, "channel legs are numbered from 1");
        ChannelSpec spec = sc.default_channel;
        auto [it, inserted] = sc.channel_overrides.emplace(leg, spec);
        read_channel_fields(doc, section, it->second, nullptr);
      } else {
        parse_fail(doc.source, section.line, "[channel] takes at most one leg index");
      }
    } else if (section.name == "sweep") {
      for (const auto& e : section.entries) {
        if (e.key == "axis") sc.sweep.axis = e.value;
        else if (e.key == "values") sc.sweep.values = split_list(e.value);
        else parse_fail(doc.source, e.line, "unknown field '" + e.key + "' in [sweep]");
      }
    } else if (section.name == "output") {
      for (const auto& e : section.entries) {
        if (e.key == "stats") sc.stats_filename = e.value;
        else parse_fail(doc.source, e.line, "unknown field '" + e.key + "' in [output]");
      }
    } else if (section.name == "topology") {
      if (!sc.topology) sc.topology.emplace();
      for (const auto& e : section.entries) {
        if (e.key == "trents") {
          sc.topology->trents = split_list(e.value);
        } else if (e.key == "leaf") {
          const auto tokens = split_list(e.value);
          if (tokens.size() != 2)
            parse_fail(doc.source, e.line, "field 'leaf': expected '<name> <home-trent>'");
          sc.topology->leaves.emplace_back(tokens[0], tokens[1]);
        } else {
          parse_fail(doc.source, e.line, "unknown field '" + e.key + "' in [topology]");
        }
      }
    } else if (section.name == "link") {
      if (!sc.topology) sc.topology.emplace();
      if (section.args.size() == 1 && section.args[0] == "default") {
        read_channel_fields(doc, section, sc.topology->default_link.channel,
                            &sc.topology->default_link.platform);
      } else if (section.args.size() == 2) {
        LinkSpec link = sc.topology->default_link;
        read_channel_fields(doc, section, link.channel, &link.platform);
        sc.topology->links[{section.args[0], section.args[1]}] = link;
      } else {
        parse_fail(doc.source, section.line,
                   "[link] takes two node names or the word 'default'");
      }
    } else {
      parse_fail(doc.source, section.line, "unknown section [" + section.name + "]");
    }
  }
  return sc;
}

Scenario parse_scenario(std::istream& in, const std::string& source_name) {
  return interpret_config(parse_config(in, source_name));
}

void Scenario::validate() const {
  if (!seed_set) throw InvariantError("scenario '" + name + "': seed is mandatory");
  if (rounds == 0) throw InvariantError("scenario '" + name + "': rounds must be positive");
  if (sample_fraction <= 0.0 || sample_fraction >= 1.0)
    throw InvariantError("scenario '" + name + "': sample_fraction must be in (0, 1)");
  attack.validate();

  if (mode == ScenarioMode::Network) {
    if (!topology) throw InvariantError("scenario '" + name + "': network mode needs [topology]");
    if (endpoints.first.empty() || endpoints.second.empty())
      throw InvariantError("scenario '" + name + "': network mode needs endpoints");
    if (sweep.active())
      throw InvariantError("scenario '" + name + "': sweeps are not defined for network mode");
    if (!attack.is_null() || !attack_legs.empty())
      throw InvariantError("scenario '" + name + "': attacks are not defined for network mode");
    return;
  }

  if (mode == ScenarioMode::MultiParty && relays != 1)
    throw InvariantError("scenario '" + name + "': multi-party mode requires exactly one relay");
  if (mode == ScenarioMode::XorRelay) {
    if (relays == 0)
      throw InvariantError("scenario '" + name + "': xor-relay mode needs at least one relay");
    if (!attack.is_null() || !attack_legs.empty())
      throw InvariantError("scenario '" + name + "': attacks are not defined for xor-relay mode");
  }
  if (!attack.is_null() && relays != 1 &&
      !(sweep.active() && sweep.axis == "relays"))
    throw InvariantError("scenario '" + name +
                         "': attack policies apply to the single-relay topology");
  for (const std::size_t leg : attack_legs)
    if (leg == 0 || leg > relays + 1)
      throw InvariantError("scenario '" + name + "': attack_legs entries must be in [1, relays+1]");
  if (!attack.is_null() && !attack_legs.empty())
    throw InvariantError("scenario '" + name + "': attack and attack_legs are mutually exclusive");

  if (sweep.active()) {
    static const char* axes[] = {"attack", "relays", "length_km", "intrinsic_qber"};
    if (std::find_if(std::begin(axes), std::end(axes),
                     [&](const char* a) { return sweep.axis == a; }) == std::end(axes))
      throw InvariantError("scenario '" + name + "': sweep axis '" + sweep.axis +
                           "' names no swept parameter (axes: attack, relays, length_km, "
                           "intrinsic_qber)");
    if (sweep.axis == "attack" && mode == ScenarioMode::XorRelay)
      throw InvariantError("scenario '" + name + "': attack sweep is not defined for xor-relay");
  }
  for (const auto& [leg, spec] : channel_overrides)
    if (leg > relays + 1 && !(sweep.active() && sweep.axis == "relays"))
      throw InvariantError("scenario '" + name + "': [channel " + std::to_string(leg) +
                           "] exceeds the leg count");
}

// ---------------------------------------------------------------------------
// Bundled scenarios
// ---------------------------------------------------------------------------

namespace {

struct BundledScenario {
  const char* name;
  const char* summary;
  const char* text;
};

constexpr const char* kFig2AttackSweep = R"(# Sifted-key error statistics of intercept/resend attacks on a
# single-relay chain, per attack policy.
[scenario]
name = fig2-attack-sweep
claim = intercept/resend on one channel of a single-relay chain causes ~25% sifted-key errors; independent interception of both channels causes 37.5% in Bob's key while 6.25% of Trent's errors stay invisible to Bob; reusing the channel-1 basis gives 25% and up to 12.5%

[session]
mode = trusted-relay
rounds = 400000
seed = 1905
relays = 1

[channel]
length_km = 0
intrinsic_qber = 0
detector_efficiency = 1

[sweep]
axis = attack
values = none, ch1, ch2, both-independent, both-reuse
)";

constexpr const char* kSiftVsRelays = R"(# Relay sifting keeps 1/2^(N+1) of the received qubits.
[scenario]
name = sift-vs-relays
claim = with N trusted relays between the endpoints, relay sifting keeps a fraction 2^-(N+1) of the received qubits (1/2 direct, 1/4 with one relay)

[session]
mode = trusted-relay
rounds = 100000
seed = 7
relays = 1

[channel]
length_km = 0

[sweep]
axis = relays
values = 0, 1, 2, 3, 4
)";

constexpr const char* kFiberLossBudget = R"(# Distance sweep of a two-leg fiber chain at 0.25 dB/km with 10%
# detector efficiency on each measuring node.
[scenario]
name = fiber-loss-budget
claim = fiber transmission follows t = 10^(-alpha*d/10), so a relay splitting the line into two legs still delivers the product t1*t2 and cannot extend the reach; detector efficiency (~10%) costs a distance-independent factor per measuring node

[session]
mode = trusted-relay
rounds = 200000
seed = 63
relays = 1

[channel]
attenuation_db_per_km = 0.25
intrinsic_qber = 0
detector_efficiency = 0.1

[sweep]
axis = length_km
values = 0, 10, 25, 50, 75, 100
)";

constexpr const char* kXorRelayChain = R"(# Classical XOR-chaining relays: key length does not shrink with the
# relay count.
[scenario]
name = xor-relay-chain
claim = relays that publish the XOR of their two leg keys let the chain ends share a key of length L - margin, where L is the shortest leg key, independent of the relay count

[session]
mode = xor-relay
rounds = 30000
seed = 2718
safety_margin = 30

[channel]
length_km = 0

[sweep]
axis = relays
values = 1, 2, 3, 4, 5
)";

constexpr BundledScenario kBundled[] = {
    {"fig2-attack-sweep",
     "QBER per attack policy on a single-relay chain (none/ch1/ch2/both)",
     kFig2AttackSweep},
    {"sift-vs-relays", "kept fraction 2^-(N+1) for N = 0..4 relays", kSiftVsRelays},
    {"fiber-loss-budget",
     "two-leg fiber chain transmission vs distance at 0.25 dB/km, 10% detectors",
     kFiberLossBudget},
    {"xor-relay-chain",
     "classical XOR-chaining relays: final key length L - margin for N = 1..5",
     kXorRelayChain},
};

}  // namespace

std::vector<std::string> bundled_scenario_names() {
  std::vector<std::string> names;
  for (const auto& b : kBundled) names.emplace_back(b.name);
  return names;
}

const std::string* bundled_scenario_text(const std::string& name) {
  for (const auto& b : kBundled) {
    if (name == b.name) {
      static std::map<std::string, std::string> cache;
      auto [it, inserted] = cache.emplace(name, b.text);
      return &it->second;
    }
  }
  return nullptr;
}

std::string bundled_scenario_summary(const std::string& name) {
  for (const auto& b : kBundled)
    if (name == b.name) return b.summary;
  return {};
}

Scenario load_scenario(const std::string& name_or_path) {
  if (const std::string* text = bundled_scenario_text(name_or_path)) {
    std::istringstream in(*text);
    return parse_scenario(in, name_or_path);
  }
  std::ifstream in(name_or_path);
  if (!in)
    throw ConfigError("'" + name_or_path +
                      "' is neither a bundled scenario nor a readable file");
  return parse_scenario(in, name_or_path);
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

struct SweepPoint {
  std::string label;
  std::size_t relays;
  AttackPolicy attack;
  std::vector<ChannelSpec> legs;
};

std::vector<ChannelSpec> build_legs(const Scenario& sc, std::size_t relays) {
  std::vector<ChannelSpec> legs(relays + 1, sc.default_channel);
  for (const auto& [index, spec] : sc.channel_overrides) {
    if (index > legs.size())
      throw InvariantError("scenario '" + sc.name + "': [channel " + std::to_string(index) +
                           "] exceeds the leg count");
    legs[index - 1] = spec;
  }
  return legs;
}

std::vector<SweepPoint> expand_sweep(const Scenario& sc) {
  std::vector<SweepPoint> points;
  if (!sc.sweep.active()) {
    points.push_back({"run", sc.relays, sc.attack, build_legs(sc, sc.relays)});
    return points;
  }
  for (const auto& value : sc.sweep.values) {
    SweepPoint point{value, sc.relays, sc.attack, {}};
    if (sc.sweep.axis == "attack") {
      point.attack = policy_from_name(value);
      point.legs = build_legs(sc, point.relays);
    } else if (sc.sweep.axis == "relays") {
      try {
        if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
        point.relays = std::stoul(value);
      } catch (const std::exception&) {
        throw ConfigError("sweep value '" + value + "' is not a relay count");
      }
      point.legs = build_legs(sc, point.relays);
    } else if (sc.sweep.axis == "length_km") {
      point.legs = build_legs(sc, point.relays);
      double length = 0.0;
      try {
        length = std::stod(value);
      } catch (const std::exception&) {
        throw ConfigError("sweep value '" + value + "' is not a distance");
      }
      for (auto& leg : point.legs) leg.length_km = length;
    } else {  // intrinsic_qber
      point.legs = build_legs(sc, point.relays);
      double qber = 0.0;
      try {
        qber = std::stod(value);
      } catch (const std::exception&) {
        throw ConfigError("sweep value '" + value + "' is not a QBER");
      }
      for (auto& leg : point.legs) leg.intrinsic_qber = qber;
    }
    points.push_back(std::move(point));
  }
  return points;
}

// channel losses and one detector factor per measuring node
double pipeline_transmission(const std::vector<ChannelSpec>& legs, bool relay_detectors) {
  double t = 1.0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    t *= transmission(legs[i]);
    const bool final_leg = (i + 1 == legs.size());
    if (final_leg || relay_detectors) t *= legs[i].detector_efficiency;
  }
  return t;
}

BitKey remove_positions(const BitKey& key, const std::vector<std::size_t>& positions,
                        KeyStage stage) {
  BitKey out;
  out.owner = key.owner;
  out.stage = stage;
  out.bits.reserve(key.size() - positions.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (next < positions.size() && positions[next] == i) {
      ++next;
      continue;
    }
    out.bits.push_back(key[i]);
  }
  return out;
}

struct PostprocOutcome {
  std::size_t final_key_length = 0;
  double estimated_qber = 0.0;
  ReconciliationReport report;
};

// sift -> estimate -> reconcile -> amplify; zero length when the key runs out
PostprocOutcome postprocess_two_party(const Scenario& sc, const SiftedKeys& keys,
                                      std::uint64_t point_seed) {
  PostprocOutcome out;
  if (static_cast<double>(keys.alice.size()) * sc.sample_fraction < 1.0) return out;
  RandomStream est_rng(RandomStream::derive_seed(point_seed, 0x45));
  const QberEstimate est =
      estimate_qber(keys.alice, keys.bob, sc.sample_fraction, est_rng);
  const CorrectionResult ec = error_correct(est.trimmed_a, est.trimmed_b, EcMode::OracleEC);
  out.estimated_qber = est.qber;
  out.report = ec.report;
  try {
    out.final_key_length =
        privacy_amplify(ec.corrected, ec.report.leakage_bits, sc.safety_margin,
                        RandomStream::derive_seed(point_seed, 0x50))
            .size();
  } catch (const KeyExhaustedError&) {
    out.final_key_length = 0;
  }
  return out;
}

PostprocOutcome postprocess_three_party(const Scenario& sc, const SiftedKeys& keys,
                                        std::uint64_t point_seed) {
  PostprocOutcome out;
  if (static_cast<double>(keys.alice.size()) * sc.sample_fraction < 1.0) return out;
  RandomStream est_rng(RandomStream::derive_seed(point_seed, 0x45));
  const QberEstimate est =
      estimate_qber(keys.alice, keys.bob, sc.sample_fraction, est_rng);
  const BitKey carol =
      remove_positions(keys.relays.at(0), est.disclosed_positions, KeyStage::Estimated);
  const TwoStepResult two = two_step_correct(est.trimmed_a, carol, est.trimmed_b);
  out.estimated_qber = est.qber;
  out.report = two.report;
  try {
    out.final_key_length =
        privacy_amplify(two.alice, two.report.leakage_bits, sc.safety_margin,
                        RandomStream::derive_seed(point_seed, 0x50))
            .size();
  } catch (const KeyExhaustedError&) {
    out.final_key_length = 0;
  }
  return out;
}

RunRow run_point_session(const Scenario& sc, const SweepPoint& point, std::uint64_t point_seed,
                         const TopologyGraph* graph, bool with_transcript,
                         std::string* transcript_out) {
  SessionResult result;
  double transmission_budget = 0.0;

  if (sc.mode == ScenarioMode::Network) {
    const Route r = route(*graph, sc.endpoints.first, sc.endpoints.second);
    transmission_budget =
        link_budget(*graph, r, {true, sc.relay_detectors}).end_to_end_transmission;
    result = run_networked_session(*graph, sc.endpoints.first, sc.endpoints.second,
                                   {sc.rounds, point_seed, sc.relay_detectors});
  } else {
    SessionConfig config;
    config.n_rounds = sc.rounds;
    config.relay_count = point.relays;
    config.legs = point.legs;
    config.attack = point.attack;
    if (!sc.attack_legs.empty()) {
      config.attacked_legs.assign(point.legs.size(), 0);
      for (const std::size_t leg : sc.attack_legs) {
        if (leg == 0 || leg > config.attacked_legs.size())
          throw InvariantError("scenario '" + sc.name + "': attack leg " +
                               std::to_string(leg) + " exceeds the leg count");
        config.attacked_legs[leg - 1] = 1;
      }
    }
    config.seed = point_seed;
    config.mode = sc.mode == ScenarioMode::MultiParty ? SessionMode::MultiPartyCarol
                                                      : SessionMode::TrustedRelay;
    config.relay_detectors = sc.relay_detectors;
    transmission_budget = pipeline_transmission(config.legs, sc.relay_detectors);
    result = run_session(config);
  }

  if (with_transcript && transcript_out) {
    std::ostringstream out;
    write_transcript(out, result.transcript);
    *transcript_out = out.str();
  }

  const SiftedKeys keys = relay_sift(result.transcript);
  const StatisticsReport observed = observed_statistics(result.transcript);

  RunRow row;
  row.point = point.label;
  row.kept_fraction = result.stats.kept_fraction;
  row.qber_alice_bob = observed.bob_qber;
  row.qber_alice_trent = observed.trent_qber;
  row.trent_residual = observed.trent_wrong_bob_right;
  row.eve_information = observed.eve_information;
  row.transmission = transmission_budget;
  const PostprocOutcome post = sc.mode == ScenarioMode::MultiParty
                                   ? postprocess_three_party(sc, keys, point_seed)
                                   : postprocess_two_party(sc, keys, point_seed);
  row.final_key_length = post.final_key_length;
  row.ec_estimated_qber = post.estimated_qber;
  row.ec_disclosed_bits = post.report.disclosed_bits;
  row.ec_leakage_bits = post.report.leakage_bits;
  row.ec_corrected_length = post.report.corrected_length;
  return row;
}

RunRow run_point_xor(const Scenario& sc, const SweepPoint& point, std::uint64_t point_seed,
                     bool with_transcript, std::string* transcript_out) {
  RunRow row;
  row.point = point.label;
  row.transmission = pipeline_transmission(point.legs, sc.relay_detectors);

  ChainParams params{sc.rounds, sc.sample_fraction, sc.safety_margin, point_seed};
  ChainDiagnostics diag;
  ChainKeys chain;
  try {
    chain = establish_chain(point.legs, params, &diag);
  } catch (const ChainError&) {
    return row;  // a dead leg leaves every column at zero
  }

  double kept = 0.0;
  for (const double f : diag.leg_kept_fraction) kept += f;
  row.kept_fraction = kept / static_cast<double>(diag.leg_kept_fraction.size());
  for (std::size_t i = 0; i < diag.leg_reports.size(); ++i) {
    row.ec_estimated_qber = std::max(row.ec_estimated_qber, diag.leg_estimated_qber[i]);
    row.ec_disclosed_bits += diag.leg_reports[i].disclosed_bits;
    row.ec_leakage_bits += diag.leg_reports[i].leakage_bits;
    row.ec_corrected_length += diag.leg_reports[i].corrected_length;
  }

  const auto announcements = announce_xors(chain);
  const auto from_alice = recover_keys(chain.keys.front(), announcements, ChainEnd::Alice);
  const auto from_bob = recover_keys(chain.keys.back(), announcements, ChainEnd::Bob);

  const std::uint64_t hash_seed = RandomStream::derive_seed(point_seed, 0x46);
  try {
    const BitKey final_alice = finalize(from_alice, sc.safety_margin, hash_seed);
    const BitKey final_bob = finalize(from_bob, sc.safety_margin, hash_seed);
    row.final_key_length = final_alice.size();
    row.qber_alice_bob =
        final_alice.empty()
            ? 0.0
            : static_cast<double>(hamming_distance(final_alice, final_bob)) /
                  static_cast<double>(final_alice.size());
  } catch (const KeyExhaustedError&) {
    row.final_key_length = 0;
  }

  if (with_transcript && transcript_out) {
    std::ostringstream out;
    out << "announcement,hex\n";
    for (std::size_t i = 0; i < announcements.size(); ++i)
      out << (i + 1) << ',' << to_hex(announcements[i]) << '\n';
    *transcript_out = out.str();
  }
  return row;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario,
                            std::optional<std::uint64_t> seed_override,
                            bool with_transcripts) {
  Scenario sc = scenario;
  if (seed_override) {
    sc.seed = *seed_override;
    sc.seed_set = true;
  }
  sc.validate();

  std::optional<TopologyGraph> graph;
  if (sc.mode == ScenarioMode::Network) graph = build_topology(*sc.topology);

  ScenarioResult result;
  result.name = sc.name;
  result.claim = sc.claim;
  result.seed = sc.seed;

  const std::vector<SweepPoint> points = expand_sweep(sc);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::uint64_t point_seed = RandomStream::derive_seed(sc.seed, i);
    std::string transcript;
    RunRow row =
        sc.mode == ScenarioMode::XorRelay
            ? run_point_xor(sc, points[i], point_seed, with_transcripts, &transcript)
            : run_point_session(sc, points[i], point_seed, graph ? &*graph : nullptr,
                                with_transcripts, &transcript);
    result.rows.push_back(std::move(row));
    if (with_transcripts) result.transcripts.push_back(std::move(transcript));
  }
  return result;
}

std::string render_stats_csv(const ScenarioResult& result) {
  std::ostringstream out;
  out << "# scenario: " << result.name << '\n';
  if (!result.claim.empty()) out << "# claim: " << result.claim << '\n';
  out << "# seed: " << result.seed << '\n';
  out << "point,kept_fraction,qber_alice_bob,qber_alice_trent,trent_residual,"
         "eve_information,transmission,final_key_length,"
         "ec_estimated_qber,ec_disclosed_bits,ec_leakage_bits,ec_corrected_length\n";
  for (const auto& row : result.rows) {
    out << row.point << ',' << fmt6(row.kept_fraction) << ',' << fmt6(row.qber_alice_bob)
        << ',' << fmt6(row.qber_alice_trent) << ',' << fmt6(row.trent_residual) << ','
        << fmt6(row.eve_information) << ',' << fmt6(row.transmission) << ','
        << row.final_key_length << ',' << fmt6(row.ec_estimated_qber) << ','
        << row.ec_disclosed_bits << ',' << row.ec_leakage_bits << ','
        << row.ec_corrected_length << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Oracle validation harness
// ---------------------------------------------------------------------------

double z_score(double observed, double expected, std::size_t n) {
  const double sigma =
      std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
  if (sigma == 0.0)
    return observed == expected ? 0.0 : std::numeric_limits<double>::infinity();
  return (observed - expected) / sigma;
}

std::vector<OracleCheckRow> compare_reports(const StatisticsReport& observed,
                                            const StatisticsReport& exact,
                                            std::size_t n_sifted, const std::string& point,
                                            double z_limit) {
  const std::pair<const char*, std::pair<double, double>> stats[] = {
      {"qber_alice_bob", {observed.bob_qber, exact.bob_qber}},
      {"qber_alice_trent", {observed.trent_qber, exact.trent_qber}},
      {"trent_wrong_bob_right",
       {observed.trent_wrong_bob_right, exact.trent_wrong_bob_right}},
      {"eve_information", {observed.eve_information, exact.eve_information}},
  };
  std::vector<OracleCheckRow> rows;
  for (const auto& [name, values] : stats) {
    OracleCheckRow row;
    row.point = point;
    row.statistic = name;
    row.observed = values.first;
    row.expected = values.second;
    row.z = z_score(values.first, values.second, n_sifted);
    row.pass = std::abs(row.z) <= z_limit;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<OracleCheckRow> oracle_check(const Scenario& scenario,
                                         std::optional<std::uint64_t> seed_override) {
  Scenario sc = scenario;
  if (seed_override) {
    sc.seed = *seed_override;
    sc.seed_set = true;
  }
  sc.validate();

  if (sc.mode != ScenarioMode::TrustedRelay && sc.mode != ScenarioMode::MultiParty)
    throw InvariantError("oracle-check: scenario must run a relay session");
  if (sc.relays != 1 || !sc.attack_legs.empty())
    throw InvariantError("oracle-check: the exact oracle covers single-relay attack scenarios");
  if (sc.sweep.active() && sc.sweep.axis != "attack" && sc.sweep.axis != "intrinsic_qber")
    throw InvariantError("oracle-check: only attack and intrinsic_qber sweeps have an oracle");

  const std::vector<SweepPoint> points = expand_sweep(sc);
  std::vector<OracleCheckRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    SessionConfig config;
    config.n_rounds = sc.rounds;
    config.relay_count = points[i].relays;
    config.legs = points[i].legs;
    config.attack = points[i].attack;
    config.seed = RandomStream::derive_seed(sc.seed, i);
    config.relay_detectors = sc.relay_detectors;

    const SessionResult result = run_session(config);
    const StatisticsReport observed = observed_statistics(result.transcript);
    const StatisticsReport exact = exact_statistics(
        points[i].attack, config.legs[0].intrinsic_qber, config.legs[1].intrinsic_qber);
    auto point_rows =
        compare_reports(observed, exact, result.stats.kept, points[i].label);
    rows.insert(rows.end(), point_rows.begin(), point_rows.end());
  }
  return rows;
}

}  // namespace qrelay
