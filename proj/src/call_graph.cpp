#include "chopper/call_graph.hpp"

#include <stdexcept>
#include <utility>

#include "chopper/errors.hpp"

namespace chopper {

NodeId CallGraphBuilder::add_node(Frame frame) {
  frames_.push_back(std::move(frame));
  children_.emplace_back();
  in_degree_.push_back(0);
  return static_cast<NodeId>(frames_.size() - 1);
}

void CallGraphBuilder::add_root(NodeId id) { roots_.push_back(id); }

void CallGraphBuilder::add_edge(NodeId parent, NodeId child) {
  children_[parent].push_back(child);
  ++in_degree_[child];
}

CallGraphBuilder::Built CallGraphBuilder::build(bool cct) {
  const std::size_t n = frames_.size();
  if (cct) {
    for (std::size_t i = 0; i < n; ++i) {
      if (in_degree_[i] > 1)
        throw NotATree("node " + std::to_string(i) + " (" + frames_[i].name +
                       ") has " + std::to_string(in_degree_[i]) + " parents");
    }
    for (NodeId r : roots_) {
      if (in_degree_[r] != 0)
        throw NotATree("root " + std::to_string(r) + " (" + frames_[r].name +
                       ") has a caller");
    }
  }

  // Renumber into DFS preorder over the provisional structure. Reachable +
  // at-most-one-parent + parentless roots implies a forest, so no separate
  // cycle check is needed in CCT mode.
  std::vector<NodeId> remap(n, kNoParent);
  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<NodeId> stack;
  for (auto it = roots_.rbegin(); it != roots_.rend(); ++it)
    stack.push_back(*it);
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (remap[id] != kNoParent) continue;
    remap[id] = static_cast<NodeId>(order.size());
    order.push_back(id);
    const auto& kids = children_[id];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      if (remap[*it] == kNoParent) stack.push_back(*it);
  }
  if (order.size() != n)
    throw Error("call graph has " + std::to_string(n - order.size()) +
                " node(s) unreachable from any root");

  auto graph = std::shared_ptr<CallGraph>(new CallGraph());
  graph->cct_ = cct;
  graph->frames_.resize(n);
  graph->children_.resize(n);
  graph->parent_.assign(n, kNoParent);
  for (NodeId old_id = 0; old_id < n; ++old_id) {
    NodeId id = remap[old_id];
    graph->frames_[id] = std::move(frames_[old_id]);
    auto& kids = graph->children_[id];
    kids.reserve(children_[old_id].size());
    for (NodeId old_child : children_[old_id]) {
      NodeId child = remap[old_child];
      kids.push_back(child);
      if (graph->parent_[child] == kNoParent && child != id)
        graph->parent_[child] = id;
    }
  }
  graph->roots_.reserve(roots_.size());
  for (NodeId r : roots_) graph->roots_.push_back(remap[r]);
  for (NodeId r : graph->roots_) graph->parent_[r] = kNoParent;

  return Built{std::move(graph), std::move(remap)};
}

}  // namespace chopper
