#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chopper/ingest.hpp"
#include "chopper/profile_frame.hpp"

namespace chopper::testsupport {

// Deterministic random profiles for property tests.
struct ProfileSpec {
  int max_nodes = 12;
  int ranks = 4;
  int name_pool = 0;  // 0 = unique names, else draw from f0..f{pool-1}
  double null_probability = 0.0;
  int num_metrics = 1;  // "time", "m1", "m2", ...
  int max_roots = 1;
  bool with_locations = false;
};

inline std::vector<std::string> metric_names(int count) {
  std::vector<std::string> names{"time"};
  for (int i = 1; i < count; ++i) names.push_back("m" + std::to_string(i));
  return names;
}

inline ProfileFrame random_profile(std::mt19937& rng,
                                   const ProfileSpec& spec) {
  std::uniform_int_distribution<int> node_count(1, spec.max_nodes);
  const int n = node_count(rng);
  std::uniform_int_distribution<int> root_count(
      1, std::min(spec.max_roots, n));
  const int roots = root_count(rng);

  std::vector<int> parent(n, -1);
  for (int i = roots; i < n; ++i)
    parent[i] = std::uniform_int_distribution<int>(0, i - 1)(rng);

  std::uniform_real_distribution<double> value(0.5, 100.0);
  std::uniform_real_distribution<double> chance(0.0, 1.0);
  const auto metrics = metric_names(spec.num_metrics);

  std::vector<LiteralNode> nodes(n);
  for (int i = 0; i < n; ++i) {
    if (spec.name_pool > 0) {
      int k = std::uniform_int_distribution<int>(0, spec.name_pool - 1)(rng);
      nodes[i].frame.name = "f" + std::to_string(k);
    } else {
      nodes[i].frame.name = "n" + std::to_string(i);
    }
    if (spec.with_locations && chance(rng) < 0.5) {
      nodes[i].frame.file = "src/file" +
                            std::to_string(std::uniform_int_distribution<int>(
                                0, 3)(rng)) +
                            ".cc";
      if (chance(rng) < 0.7)
        nodes[i].frame.line =
            std::uniform_int_distribution<int>(0, 2000)(rng);
    }
    for (const auto& m : metrics) {
      auto& vals = nodes[i].metrics[m];
      vals.resize(spec.ranks);
      for (int r = 0; r < spec.ranks; ++r)
        if (chance(rng) >= spec.null_probability) vals[r] = value(rng);
    }
  }

  std::vector<std::vector<int>> kids(n);
  for (int i = 0; i < n; ++i)
    if (parent[i] >= 0) kids[parent[i]].push_back(i);
  auto materialize = [&](int i, auto&& self) -> LiteralNode {
    LiteralNode node = std::move(nodes[i]);
    for (int c : kids[i]) node.children.push_back(self(c, self));
    return node;
  };
  Literal forest;
  for (int i = 0; i < n; ++i)
    if (parent[i] < 0) forest.push_back(materialize(i, materialize));
  return from_literal(forest, "random");
}

// Structural equality: same ids, frames, children and roots.
inline bool graphs_equal(const CallGraph& a, const CallGraph& b) {
  if (a.size() != b.size() || a.is_cct() != b.is_cct()) return false;
  if (!std::equal(a.roots().begin(), a.roots().end(), b.roots().begin(),
                  b.roots().end()))
    return false;
  for (NodeId id = 0; id < a.size(); ++id) {
    if (!(a.frame(id) == b.frame(id))) return false;
    auto ka = a.children(id), kb = b.children(id);
    if (!std::equal(ka.begin(), ka.end(), kb.begin(), kb.end())) return false;
  }
  return true;
}

inline bool frames_equal(const ProfileFrame& a, const ProfileFrame& b) {
  return graphs_equal(a.graph(), b.graph()) && a.table() == b.table() &&
         a.exec_id() == b.exec_id();
}

// Root-to-node path key, with an occurrence counter so duplicate sibling
// frames stay distinct.
inline std::string frame_key(const Frame& f) {
  std::string key = f.name;
  key += '\x1e';
  if (f.file) key += *f.file;
  key += '\x1e';
  if (f.line) key += std::to_string(*f.line);
  return key;
}

inline std::vector<std::string> path_keys(const CallGraph& graph) {
  std::vector<std::string> keys(graph.size());
  auto assign = [&](std::span<const NodeId> siblings, const std::string& base,
                    auto&& self) -> void {
    std::map<std::string, int> seen;
    for (NodeId id : siblings) {
      std::string mine = frame_key(graph.frame(id));
      int occurrence = seen[mine]++;
      keys[id] = base + '\x1f' + mine + '#' + std::to_string(occurrence);
      self(graph.children(id), keys[id], self);
    }
  };
  assign(graph.roots(), "", assign);
  return keys;
}

// path -> concatenated (metric, rank) values, for isomorphism checks.
inline std::map<std::string, std::vector<std::optional<double>>> path_values(
    const ProfileFrame& pf) {
  auto keys = path_keys(pf.graph());
  std::map<std::string, std::vector<std::optional<double>>> out;
  for (NodeId id = 0; id < pf.graph().size(); ++id) {
    auto& vals = out[keys[id]];
    for (const auto& metric : pf.metric_names())
      for (int r = 0; r < pf.num_ranks(); ++r)
        vals.push_back(pf.table().cell(metric, id, r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force hot-path oracle. Enumerates every root-to-node chain of the
// CCT and keeps the one where each element is its parent's first maximal
// child, every step exceeds stop_pct of the previous value, and the chain
// cannot be extended. Inclusive values come from an explicit per-node
// subtree walk, independent of the library's derivation.

inline std::vector<std::optional<double>> oracle_inclusive_sums(
    const ProfileFrame& pf, const std::string& exclusive_metric) {
  const CallGraph& graph = pf.graph();
  std::vector<std::optional<double>> values(graph.size());
  for (NodeId node = 0; node < graph.size(); ++node) {
    double total = 0.0;
    bool any = false;
    std::vector<NodeId> stack{node};
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      for (int r = 0; r < pf.num_ranks(); ++r)
        if (auto v = pf.table().cell(exclusive_metric, id, r)) {
          total += *v;
          any = true;
        }
      for (NodeId child : graph.children(id)) stack.push_back(child);
    }
    if (any) values[node] = total;
  }
  return values;
}

inline std::vector<NodeId> hot_path_oracle(const ProfileFrame& pf,
                                           const std::string& exclusive_metric,
                                           double stop_pct) {
  const CallGraph& graph = pf.graph();
  const auto values = oracle_inclusive_sums(pf, exclusive_metric);

  auto roots = graph.roots();
  NodeId start = roots.front();
  std::optional<double> best;
  for (NodeId root : roots)
    if (values[root] && (!best || *values[root] > *best)) {
      best = values[root];
      start = root;
    }
  if (!values[start] || *values[start] == 0.0) return {start};

  // first child attaining the maximum non-null value, if any
  auto max_child = [&](NodeId id) -> std::optional<NodeId> {
    std::optional<NodeId> pick;
    for (NodeId child : graph.children(id)) {
      if (!values[child]) continue;
      if (!pick || *values[child] > *values[*pick]) pick = child;
    }
    return pick;
  };

  // root-to-node chain for every node, via parent pointers
  std::vector<NodeId> match;
  for (NodeId node = 0; node < graph.size(); ++node) {
    std::vector<NodeId> chain;
    for (NodeId id = node;; id = graph.parent(id)) {
      chain.push_back(id);
      if (graph.parent(id) == kNoParent) break;
    }
    std::reverse(chain.begin(), chain.end());
    if (chain.front() != start) continue;

    bool valid = true;
    for (std::size_t i = 1; i < chain.size() && valid; ++i) {
      auto pick = max_child(chain[i - 1]);
      valid = pick && *pick == chain[i] &&
              *values[chain[i]] > stop_pct * *values[chain[i - 1]];
    }
    if (!valid) continue;
    auto next = max_child(chain.back());
    if (next && *values[*next] > stop_pct * *values[chain.back()]) continue;
    match = chain;
    break;  // the greedy chain is unique
  }
  return match;
}

// Single-node profile whose rank rows carry the given observation vectors;
// handy for feeding raw data into the correlation code.
inline ProfileFrame vector_profile(
    const std::vector<std::pair<std::string,
                                std::vector<std::optional<double>>>>& series) {
  LiteralNode node;
  node.frame.name = "data";
  for (const auto& [name, values] : series) node.metrics[name] = values;
  return from_literal({node}, "vectors");
}

}  // namespace chopper::testsupport
