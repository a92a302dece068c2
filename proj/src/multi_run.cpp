#include "chopper/multi_run.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "chopper/errors.hpp"

namespace chopper {

// ---------------------------------------------------------------------------
// unification

namespace {

struct UnionNode {
  Frame frame;
  std::vector<std::size_t> children;  // indices into the pool
};

struct UnionForest {
  std::vector<UnionNode> pool;
  std::vector<std::size_t> roots;

  // Finds or creates the `occurrence`-th child of `parent` carrying
  // `frame` (occurrence keeps duplicate sibling frames distinct). A
  // parent of npos addresses the root list.
  std::size_t match(std::size_t parent, const Frame& frame, int occurrence) {
    {
      const auto& slots = parent == npos ? roots : pool[parent].children;
      int seen = 0;
      for (std::size_t slot : slots)
        if (pool[slot].frame == frame && seen++ == occurrence) return slot;
    }
    pool.push_back(UnionNode{frame, {}});
    const std::size_t id = pool.size() - 1;
    if (parent == npos)
      roots.push_back(id);
    else
      pool[parent].children.push_back(id);
    return id;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Walks `graph` and records, per graph node, the matching union pool slot.
void absorb(const CallGraph& graph, UnionForest& forest,
            std::vector<std::size_t>& slot_of) {
  slot_of.assign(graph.size(), UnionForest::npos);
  struct Item {
    NodeId node;
    std::size_t parent_slot;
    int occurrence;
  };
  std::vector<Item> stack;
  auto push_children = [&](NodeId parent, std::size_t parent_slot) {
    auto kids = graph.children(parent);
    std::map<Frame, int> seen;
    std::vector<Item> batch;
    for (NodeId child : kids)
      batch.push_back({child, parent_slot, seen[graph.frame(child)]++});
    for (auto it = batch.rbegin(); it != batch.rend(); ++it)
      stack.push_back(*it);
  };
  {
    std::map<Frame, int> seen;
    std::vector<Item> batch;
    for (NodeId root : graph.roots())
      batch.push_back({root, UnionForest::npos, seen[graph.frame(root)]++});
    for (auto it = batch.rbegin(); it != batch.rend(); ++it)
      stack.push_back(*it);
  }
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    std::size_t slot =
        forest.match(item.parent_slot, graph.frame(item.node), item.occurrence);
    slot_of[item.node] = slot;
    push_children(item.node, slot);
  }
}

}  // namespace

void unify_multiple_graphframes(std::span<ProfileFrame* const> pfs) {
  if (pfs.size() < 2)
    throw InvalidArity("unification needs at least two profiles, got " +
                       std::to_string(pfs.size()));
  for (const ProfileFrame* pf : pfs)
    if (!pf->graph().is_cct())
      throw NotATree("unification expects calling context trees (run " +
                     pf->exec_id() + " is merged)");

  // Already unified? Then the union would reproduce the shared graph and
  // every table is already complete.
  bool shared = true;
  for (const ProfileFrame* pf : pfs)
    shared = shared && pf->graph_ptr() == pfs.front()->graph_ptr();
  if (shared) return;

  UnionForest forest;
  std::vector<std::vector<std::size_t>> slots(pfs.size());
  for (std::size_t i = 0; i < pfs.size(); ++i)
    absorb(pfs[i]->graph(), forest, slots[i]);

  CallGraphBuilder builder;
  for (const UnionNode& node : forest.pool) builder.add_node(node.frame);
  for (std::size_t root : forest.roots)
    builder.add_root(static_cast<NodeId>(root));
  for (std::size_t i = 0; i < forest.pool.size(); ++i)
    for (std::size_t child : forest.pool[i].children)
      builder.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(child));
  auto built = builder.build(/*cct=*/true);

  for (std::size_t i = 0; i < pfs.size(); ++i) {
    ProfileFrame& pf = *pfs[i];
    MetricTable table(built.graph->size(), pf.num_ranks());
    for (const auto& name : pf.metric_names()) {
      auto& column = table.add_column(name);
      const auto source = pf.table().column(name);
      for (NodeId old_id = 0; old_id < pf.graph().size(); ++old_id) {
        NodeId new_id = built.remap[slots[i][old_id]];
        for (int r = 0; r < pf.num_ranks(); ++r)
          column[table.row(new_id, r)] = source[pf.table().row(old_id, r)];
      }
    }
    pf = ProfileFrame(built.graph, std::move(table), pf.exec_id(),
                      pf.default_metric());
  }
}

void unify_multiple_graphframes(std::vector<ProfileFrame>& pfs) {
  std::vector<ProfileFrame*> ptrs;
  ptrs.reserve(pfs.size());
  for (auto& pf : pfs) ptrs.push_back(&pf);
  unify_multiple_graphframes(std::span<ProfileFrame* const>(ptrs));
}

// ---------------------------------------------------------------------------
// pivot table

PivotTable multirun_analysis(const std::vector<ProfileFrame>& pfs,
                             std::string_view metric, PivotIndex index,
                             GroupBy columns,
                             std::optional<double> threshold) {
  if (pfs.empty())
    throw InvalidArity("multirun_analysis needs at least one profile");

  PivotTable out;
  out.index_label = index == PivotIndex::exec_id ? "exec_id" : "ranks";
  for (const auto& pf : pfs) {
    std::string label = index == PivotIndex::exec_id
                            ? pf.exec_id()
                            : std::to_string(pf.num_ranks());
    if (std::find(out.index.begin(), out.index.end(), label) !=
        out.index.end())
      throw InvalidArity("duplicate pivot index label: " + label);
    out.index.push_back(std::move(label));
  }

  // group label -> per-run (sum, any)
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, bool>>> cells;
  for (std::size_t run = 0; run < pfs.size(); ++run) {
    const ProfileFrame& pf = pfs[run];
    if (!pf.table().has_column(metric))
      throw UnknownMetric(std::string(metric), pf.exec_id());
    const auto column = pf.table().column(metric);
    const CallGraph& graph = pf.graph();
    graph.visit([&](NodeId id, int) {
      const Frame& frame = graph.frame(id);
      std::string key = columns == GroupBy::name
                            ? frame.name
                            : frame.file.value_or("<unknown>");
      auto [it, inserted] = cells.try_emplace(
          key, std::vector<std::pair<double, bool>>(pfs.size(), {0.0, false}));
      if (inserted) order.push_back(key);
      auto& cell = it->second[run];
      for (int r = 0; r < pf.num_ranks(); ++r) {
        if (const auto& v = column[pf.table().row(id, r)]) {
          cell.first += *v;
          cell.second = true;
        }
      }
    });
  }

  // Threshold: a group survives if it beats the threshold in at least one
  // run, so anything significant anywhere stays comparable everywhere.
  std::vector<std::string> kept;
  for (const auto& key : order) {
    const auto& per_run = cells.at(key);
    bool keep = !threshold;
    for (const auto& [sum, any] : per_run)
      keep = keep || (any && sum > *threshold);
    if (keep) kept.push_back(key);
  }

  // Columns ordered by descending value in the first run, nulls last.
  std::stable_sort(kept.begin(), kept.end(),
                   [&](const std::string& a, const std::string& b) {
                     const auto& ca = cells.at(a)[0];
                     const auto& cb = cells.at(b)[0];
                     if (ca.second != cb.second) return ca.second;
                     if (ca.second && cb.second && ca.first != cb.first)
                       return ca.first > cb.first;
                     return a < b;
                   });

  out.columns = kept;
  out.values.assign(pfs.size(), {});
  for (std::size_t run = 0; run < pfs.size(); ++run) {
    out.values[run].reserve(kept.size());
    for (const auto& key : kept) {
      const auto& [sum, any] = cells.at(key)[run];
      out.values[run].push_back(any ? std::optional<double>(sum)
                                    : std::nullopt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// speedup / efficiency

ScalingResult speedup_efficiency(std::vector<ScalingRun>& runs,
                                 std::string_view metric, ScalingMode mode,
                                 ScalingMeasure measure,
                                 std::optional<double> threshold,
                                 RankStat agg) {
  if (runs.size() < 2)
    throw InvalidArity("scaling analysis needs at least two runs, got " +
                       std::to_string(runs.size()));
  for (const auto& run : runs)
    if (run.process_count < 1)
      throw InvalidArity("process count must be >= 1, got " +
                         std::to_string(run.process_count) + " (run " +
                         run.pf.exec_id() + ")");
  if (mode == ScalingMode::weak && measure == ScalingMeasure::speedup)
    throw UnsupportedCombination(
        "weak scaling only supports efficiency, not speedup");

  std::vector<std::size_t> by_count(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) by_count[i] = i;
  std::sort(by_count.begin(), by_count.end(), [&](std::size_t a, std::size_t b) {
    return runs[a].process_count < runs[b].process_count;
  });
  for (std::size_t i = 1; i < by_count.size(); ++i) {
    if (runs[by_count[i]].process_count == runs[by_count[i - 1]].process_count)
      throw InvalidArity(
          "duplicate process count " +
          std::to_string(runs[by_count[i]].process_count) +
          "; the baseline must be unique");
  }
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j)
      if (runs[i].pf.exec_id() == runs[j].pf.exec_id())
        throw InvalidArity("duplicate exec_id " + runs[i].pf.exec_id() +
                           "; runs must be distinguishable");

  // Inclusive metric per run, deriving it where only the exclusive column
  // exists, then one union graph for all runs.
  std::string column;
  for (auto& run : runs) {
    bool derive = false;
    column = resolve_inclusive_column(run.pf, metric, derive);
    if (derive)
      run.pf = inclusive_from_exclusive(run.pf, exclusive_base(metric));
  }
  std::vector<ProfileFrame*> ptrs;
  ptrs.reserve(runs.size());
  for (auto& run : runs) ptrs.push_back(&run.pf);
  unify_multiple_graphframes(std::span<ProfileFrame* const>(ptrs));

  ScalingResult out;
  out.mode = mode;
  out.measure = measure;
  out.metric = column;
  out.graph = runs.front().pf.graph_ptr();

  std::vector<std::vector<std::optional<double>>> agg_values;
  for (std::size_t i : by_count) {
    out.process_counts.push_back(runs[i].process_count);
    out.exec_ids.push_back(runs[i].pf.exec_id());
    agg_values.push_back(aggregate_over_ranks(runs[i].pf, column, agg));
  }

  const auto& baseline = agg_values.front();
  const double s = static_cast<double>(out.process_counts.front());
  for (NodeId node = 0; node < out.graph->size(); ++node) {
    const auto& t_s = baseline[node];
    if (threshold && (!t_s || !(*t_s > *threshold))) continue;
    std::vector<std::optional<double>> row(agg_values.size());
    for (std::size_t j = 0; j < agg_values.size(); ++j) {
      const auto& t_n = agg_values[j][node];
      if (!t_s || !t_n || *t_n == 0.0) continue;
      const double n = static_cast<double>(out.process_counts[j]);
      switch (measure) {
        case ScalingMeasure::speedup:
          row[j] = *t_s / *t_n;
          break;
        case ScalingMeasure::efficiency:
          row[j] = mode == ScalingMode::strong ? (s * *t_s) / (n * *t_n)
                                               : *t_s / *t_n;
          break;
      }
    }
    out.nodes.push_back(node);
    out.values.push_back(std::move(row));
  }
  return out;
}

}  // namespace chopper
