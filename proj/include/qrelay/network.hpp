#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/session.hpp"

namespace qrelay {

enum class Platform : std::uint8_t { Fiber, FreeSpace };

const char* platform_name(Platform p);
Platform platform_from_name(const std::string& name);  // throws ConfigError

// One physical link: platforms differ only in their channel parameters.
struct LinkSpec {
  ChannelSpec channel;
  Platform platform = Platform::Fiber;
};

// Declarative topology input: trusted relays (trents), endpoints attached
// to exactly one home trent, and per-link channel parameters.  Links not
// listed explicitly fall back to default_link.
struct TopologySpec {
  std::vector<std::string> trents;
  std::vector<std::pair<std::string, std::string>> leaves;  // (name, home trent)
  std::map<std::pair<std::string, std::string>, LinkSpec> links;  // unordered node pair
  LinkSpec default_link;
};

// Star topology around every trent plus a full mesh between trents.
class TopologyGraph {
 public:
  struct Leaf {
    std::string name;
    std::size_t home;  // index into trents()
  };

  const std::vector<std::string>& trents() const { return trents_; }
  const std::vector<Leaf>& leaves() const { return leaves_; }

  std::size_t mesh_link_count() const;
  std::size_t star_link_count() const { return leaves_.size(); }

  bool is_trent(const std::string& name) const;
  const Leaf& leaf(const std::string& name) const;  // throws InvariantError

  // link spec between two adjacent nodes (leaf-home or trent-trent)
  const LinkSpec& link(const std::string& a, const std::string& b) const;

 private:
  friend TopologyGraph build_topology(const TopologySpec& spec);

  std::vector<std::string> trents_;
  std::vector<Leaf> leaves_;
  std::map<std::pair<std::string, std::string>, LinkSpec> links_;
};

// Validates and materializes the graph: every leaf must name an existing
// home trent, names must be unique, and every trent pair gets a mesh link.
// Throws InvariantError on dangling leaves or duplicate names.
TopologyGraph build_topology(const TopologySpec& spec);

// Leaf-to-leaf path: one trent when both leaves share a home, two otherwise.
struct Route {
  std::vector<std::string> nodes;

  std::size_t relay_count() const { return nodes.size() < 2 ? 0 : nodes.size() - 2; }
};

// Throws InvariantError for unknown leaves or leaf_a == leaf_b.
Route route(const TopologyGraph& graph, const std::string& leaf_a, const std::string& leaf_b);

struct LinkBudget {
  double end_to_end_transmission = 0.0;  // channel losses and detector factors
  double expected_sift_fraction = 0.0;   // 2^-(relays+1)
  double expected_rate_per_qubit = 0.0;  // product, before reconciliation accounting
};

struct BudgetOptions {
  bool include_detectors = true;
  bool relay_detectors = true;  // false: only the final receiver's detector counts
};

LinkBudget link_budget(const TopologyGraph& graph, const Route& route,
                       const BudgetOptions& options = {});

struct NetworkSessionParams {
  std::size_t n_rounds = 0;
  std::uint64_t seed = 0;
  bool relay_detectors = true;
};

// Instantiates a relay session along the route's legs and delegates to
// run_session.
SessionResult run_networked_session(const TopologyGraph& graph, const std::string& leaf_a,
                                    const std::string& leaf_b,
                                    const NetworkSessionParams& params);

}  // namespace qrelay
