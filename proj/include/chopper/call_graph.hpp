#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "chopper/frame.hpp"

namespace chopper {

/// Dense node handle. Ids are stable within a profile and numbered in
/// canonical DFS order (roots in order, children in stored order), so
/// iterating 0..size() is a deterministic preorder for trees.
using NodeId = std::uint32_t;

inline constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

/// Immutable forest (calling context tree) or merged DAG of frames with
/// caller->callee edges. A CCT-flagged graph is a forest: one parent per
/// non-root node, no cycles. Merged graphs may carry self-edges and
/// back-edges from recursion; traversal visits every node exactly once.
///
/// Roots are the graph's entry nodes. In a merged graph an entry node can
/// gain in-edges (e.g. a recursive call back into it) and is still listed
/// as a root so the whole graph stays reachable.
class CallGraph {
 public:
  std::size_t size() const { return frames_.size(); }
  bool is_cct() const { return cct_; }

  const Frame& frame(NodeId id) const { return frames_[id]; }
  std::span<const NodeId> children(NodeId id) const { return children_[id]; }
  std::span<const NodeId> roots() const { return roots_; }

  /// Parent of `id`, or kNoParent for roots. For merged graphs this is the
  /// first-visit parent and only useful for display purposes.
  NodeId parent(NodeId id) const { return parent_[id]; }

  bool contains(NodeId id) const { return id < frames_.size(); }

  /// Preorder walk from the roots. Each node is visited exactly once even
  /// when merging introduced shared children or self-edges. `visitor` is
  /// called as visitor(NodeId, int depth).
  template <typename Visitor>
  void visit(Visitor&& visitor) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::pair<NodeId, int>> stack;
    for (auto root = roots_.rbegin(); root != roots_.rend(); ++root)
      stack.emplace_back(*root, 0);
    while (!stack.empty()) {
      auto [id, depth] = stack.back();
      stack.pop_back();
      if (seen[id]) continue;
      seen[id] = true;
      visitor(id, depth);
      const auto& kids = children_[id];
      for (auto it = kids.rbegin(); it != kids.rend(); ++it)
        if (!seen[*it]) stack.emplace_back(*it, depth + 1);
    }
  }

 private:
  friend class CallGraphBuilder;
  CallGraph() = default;

  std::vector<Frame> frames_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<NodeId> parent_;
  std::vector<NodeId> roots_;
  bool cct_ = true;
};

/// Assembles a CallGraph and renumbers nodes into canonical DFS order.
/// Provisional ids handed out by add_node() are remapped on build();
/// callers use the returned `remap` to relocate any per-node data.
class CallGraphBuilder {
 public:
  NodeId add_node(Frame frame);
  void add_root(NodeId id);
  void add_edge(NodeId parent, NodeId child);

  std::size_t size() const { return frames_.size(); }

  struct Built {
    std::shared_ptr<const CallGraph> graph;
    std::vector<NodeId> remap;  // provisional id -> final id
  };

  /// Validates and finalizes. With cct=true every non-root node must have
  /// exactly one parent (throws NotATree otherwise); in both modes every
  /// node must be reachable from a root.
  Built build(bool cct);

 private:
  std::vector<Frame> frames_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> in_degree_;
  std::vector<NodeId> roots_;
};

}  // namespace chopper
