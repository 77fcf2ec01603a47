#include "qrelay/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qrelay/errors.hpp"

namespace qrelay {

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

const char* platform_name(Platform p) {
  return p == Platform::Fiber ? "fiber" : "freespace";
}

Platform platform_from_name(const std::string& name) {
  if (name == "fiber") return Platform::Fiber;
  if (name == "freespace") return Platform::FreeSpace;
  throw ConfigError("unknown platform '" + name + "' (expected fiber or freespace)");
}

std::size_t TopologyGraph::mesh_link_count() const {
  return trents_.size() * (trents_.size() - 1) / 2;
}

bool TopologyGraph::is_trent(const std::string& name) const {
  return std::find(trents_.begin(), trents_.end(), name) != trents_.end();
}

const TopologyGraph::Leaf& TopologyGraph::leaf(const std::string& name) const {
  for (const auto& l : leaves_)
    if (l.name == name) return l;
  throw InvariantError("unknown leaf '" + name + "'");
}

const LinkSpec& TopologyGraph::link(const std::string& a, const std::string& b) const {
  const auto it = links_.find(ordered(a, b));
  if (it == links_.end())
    throw InvariantError("no link between '" + a + "' and '" + b + "'");
  return it->second;
}

TopologyGraph build_topology(const TopologySpec& spec) {
  if (spec.trents.empty()) throw InvariantError("topology: at least one trent required");

  std::set<std::string> names;
  for (const auto& trent : spec.trents)
    if (!names.insert(trent).second)
      throw InvariantError("topology: duplicate node name '" + trent + "'");
  for (const auto& [leaf, home] : spec.leaves)
    if (!names.insert(leaf).second)
      throw InvariantError("topology: duplicate node name '" + leaf + "'");

  TopologyGraph graph;
  graph.trents_ = spec.trents;

  for (const auto& [leaf, home] : spec.leaves) {
    const auto it = std::find(spec.trents.begin(), spec.trents.end(), home);
    if (it == spec.trents.end())
      throw InvariantError("topology: leaf '" + leaf + "' names unknown home trent '" +
                           home + "'");
    graph.leaves_.push_back(
        {leaf, static_cast<std::size_t>(std::distance(spec.trents.begin(), it))});
  }

  std::map<std::pair<std::string, std::string>, LinkSpec> declared;
  for (const auto& [pair, link] : spec.links)
    declared[ordered(pair.first, pair.second)] = link;

  const auto pick_link = [&declared, &spec](const std::string& a, const std::string& b) {
    const auto it = declared.find(ordered(a, b));
    return it != declared.end() ? it->second : spec.default_link;
  };

  for (const auto& leaf : graph.leaves_)
    graph.links_[ordered(leaf.name, spec.trents[leaf.home])] =
        pick_link(leaf.name, spec.trents[leaf.home]);
  // complete graph between trents
  for (std::size_t i = 0; i < spec.trents.size(); ++i)
    for (std::size_t j = i + 1; j < spec.trents.size(); ++j)
      graph.links_[ordered(spec.trents[i], spec.trents[j])] =
          pick_link(spec.trents[i], spec.trents[j]);

  for (const auto& [pair, link] : declared)
    if (!graph.links_.contains(pair))
      throw InvariantError("topology: link between '" + pair.first + "' and '" +
                           pair.second + "' does not join adjacent nodes");

  for (const auto& link : graph.links_) link.second.channel.validate();
  return graph;
}

Route route(const TopologyGraph& graph, const std::string& leaf_a, const std::string& leaf_b) {
  if (leaf_a == leaf_b) throw InvariantError("route: endpoints must be distinct");
  const auto& a = graph.leaf(leaf_a);
  const auto& b = graph.leaf(leaf_b);

  Route r;
  if (a.home == b.home) {
    r.nodes = {a.name, graph.trents()[a.home], b.name};
  } else {
    r.nodes = {a.name, graph.trents()[a.home], graph.trents()[b.home], b.name};
  }
  return r;
}

LinkBudget link_budget(const TopologyGraph& graph, const Route& r, const BudgetOptions& options) {
  if (r.nodes.size() < 2) throw InvariantError("link_budget: route too short");

  LinkBudget budget;
  budget.end_to_end_transmission = 1.0;
  for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i) {
    const LinkSpec& link = graph.link(r.nodes[i], r.nodes[i + 1]);
    budget.end_to_end_transmission *= transmission(link.channel);
    const bool final_leg = (i + 2 == r.nodes.size());
    if (options.include_detectors && (final_leg || options.relay_detectors))
      budget.end_to_end_transmission *= link.channel.detector_efficiency;
  }
  budget.expected_sift_fraction = std::pow(2.0, -static_cast<double>(r.relay_count() + 1));
  budget.expected_rate_per_qubit =
      budget.end_to_end_transmission * budget.expected_sift_fraction;
  return budget;
}

SessionResult run_networked_session(const TopologyGraph& graph, const std::string& leaf_a,
                                    const std::string& leaf_b,
                                    const NetworkSessionParams& params) {
  const Route r = route(graph, leaf_a, leaf_b);

  SessionConfig config;
  config.n_rounds = params.n_rounds;
  config.relay_count = r.relay_count();
  config.seed = params.seed;
  config.relay_detectors = params.relay_detectors;
  for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i)
    config.legs.push_back(graph.link(r.nodes[i], r.nodes[i + 1]).channel);
  return run_session(config);
}

}  // namespace qrelay
