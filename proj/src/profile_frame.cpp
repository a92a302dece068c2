#include "chopper/profile_frame.hpp"

#include <algorithm>
#include <utility>

#include "chopper/errors.hpp"

namespace chopper {

ProfileFrame::ProfileFrame(std::shared_ptr<const CallGraph> graph,
                           MetricTable table, std::string exec_id,
                           std::string default_metric)
    : graph_(std::move(graph)),
      table_(std::move(table)),
      exec_id_(std::move(exec_id)),
      default_metric_(std::move(default_metric)) {
  if (!graph_) throw Error("profile frame needs a graph");
  if (table_.num_nodes() != graph_->size())
    throw Error("metric table covers " + std::to_string(table_.num_nodes()) +
                " nodes but the graph has " + std::to_string(graph_->size()));
  if (table_.columns().empty())
    throw Error("profile frame needs at least one metric");
  if (!table_.has_column(default_metric_))
    throw UnknownMetric(default_metric_);
}

RankStat parse_rank_stat(std::string_view name) {
  if (name == "sum") return RankStat::sum;
  if (name == "mean") return RankStat::mean;
  if (name == "max") return RankStat::max;
  if (name == "min") return RankStat::min;
  throw Error("unknown rank statistic: " + std::string(name));
}

std::vector<std::optional<double>> aggregate_over_ranks(const ProfileFrame& pf,
                                                        std::string_view metric,
                                                        RankStat stat) {
  const auto col = pf.table().column(metric);
  const int ranks = pf.num_ranks();
  const std::size_t n = pf.graph().size();
  std::vector<std::optional<double>> out(n);
  for (NodeId node = 0; node < n; ++node) {
    double acc = 0.0;
    int count = 0;
    for (int r = 0; r < ranks; ++r) {
      const auto& v = col[pf.table().row(node, r)];
      if (!v) continue;
      if (count == 0) {
        acc = *v;
      } else {
        switch (stat) {
          case RankStat::sum:
          case RankStat::mean:
            acc += *v;
            break;
          case RankStat::max:
            acc = std::max(acc, *v);
            break;
          case RankStat::min:
            acc = std::min(acc, *v);
            break;
        }
      }
      ++count;
    }
    if (count == 0) continue;  // all-null node stays null
    if (stat == RankStat::mean) acc /= count;
    out[node] = acc;
  }
  return out;
}

ProfileFrame inclusive_from_exclusive(const ProfileFrame& pf,
                                      std::string_view metric) {
  const CallGraph& graph = pf.graph();
  if (!graph.is_cct())
    throw NotATree("inclusive metrics require a calling context tree");
  pf.table().column_index(metric);  // throws UnknownMetric when absent

  MetricTable table = pf.table();
  const std::string inc_name = inclusive_name(metric);
  table.remove_column(inc_name);
  auto& inc = table.add_column(inc_name);
  const auto excl = table.column(metric);

  const int ranks = table.num_ranks();
  const std::size_t n = graph.size();
  // Node ids are DFS preorder for a CCT, so a reverse sweep folds every
  // subtree into its parent in one pass.
  std::vector<double> sums(n * ranks, 0.0);
  std::vector<bool> any(n * ranks, false);
  for (std::size_t i = n; i-- > 0;) {
    NodeId node = static_cast<NodeId>(i);
    for (int r = 0; r < ranks; ++r) {
      const std::size_t row = table.row(node, r);
      if (const auto& v = excl[row]) {
        sums[row] += *v;
        any[row] = true;
      }
      if (any[row]) inc[row] = sums[row];
    }
    NodeId parent = graph.parent(node);
    if (parent == kNoParent) continue;
    for (int r = 0; r < ranks; ++r) {
      const std::size_t row = table.row(node, r);
      const std::size_t parent_row = table.row(parent, r);
      sums[parent_row] += sums[row];
      if (any[row]) any[parent_row] = true;
    }
  }

  return ProfileFrame(pf.graph_ptr(), std::move(table), pf.exec_id(),
                      pf.default_metric());
}

std::vector<std::optional<double>> aggregated_inclusive(const ProfileFrame& pf,
                                                        std::string_view metric,
                                                        RankStat agg) {
  bool derive = false;
  const std::string column = resolve_inclusive_column(pf, metric, derive);
  if (!derive) return aggregate_over_ranks(pf, column, agg);

  const CallGraph& graph = pf.graph();
  if (!graph.is_cct())
    throw NotATree("inclusive metrics require a calling context tree");
  const auto excl = pf.table().column(exclusive_base(metric));

  const int ranks = pf.num_ranks();
  const std::size_t n = graph.size();
  std::vector<double> sums(n * ranks, 0.0);
  std::vector<char> any(n * ranks, 0);
  std::vector<std::optional<double>> out(n);
  for (std::size_t i = n; i-- > 0;) {
    NodeId node = static_cast<NodeId>(i);
    const std::size_t base = pf.table().row(node, 0);
    for (int r = 0; r < ranks; ++r) {
      if (const auto& v = excl[base + r]) {
        sums[base + r] += *v;
        any[base + r] = 1;
      }
    }
    // aggregate this node's finished per-rank subtree sums
    double acc = 0.0;
    int count = 0;
    for (int r = 0; r < ranks; ++r) {
      if (!any[base + r]) continue;
      const double v = sums[base + r];
      if (count == 0) {
        acc = v;
      } else {
        switch (agg) {
          case RankStat::sum:
          case RankStat::mean:
            acc += v;
            break;
          case RankStat::max:
            acc = std::max(acc, v);
            break;
          case RankStat::min:
            acc = std::min(acc, v);
            break;
        }
      }
      ++count;
    }
    if (count > 0) out[node] = agg == RankStat::mean ? acc / count : acc;

    NodeId parent = graph.parent(node);
    if (parent == kNoParent) continue;
    const std::size_t parent_base = pf.table().row(parent, 0);
    for (int r = 0; r < ranks; ++r) {
      sums[parent_base + r] += sums[base + r];
      if (any[base + r]) any[parent_base + r] = 1;
    }
  }
  return out;
}

std::string resolve_inclusive_column(const ProfileFrame& pf,
                                     std::string_view metric,
                                     bool& needs_derivation) {
  needs_derivation = false;
  const std::string inc = inclusive_name(exclusive_base(metric));
  if (pf.table().has_column(inc)) return inc;
  if (!pf.table().has_column(exclusive_base(metric)))
    throw UnknownMetric(std::string(metric));
  needs_derivation = true;
  return inc;
}

}  // namespace chopper
