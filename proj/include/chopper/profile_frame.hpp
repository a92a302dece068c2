#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chopper/call_graph.hpp"
#include "chopper/metric_table.hpp"

namespace chopper {

/// One profiled execution: a call graph plus its graph-indexed metric
/// table and a little metadata. Immutable after construction — analyses
/// return new frames — with one documented exception, multi-run
/// unification, which replaces frames in place through the caller's
/// references. Immutable frames are safe to share across threads.
class ProfileFrame {
 public:
  ProfileFrame(std::shared_ptr<const CallGraph> graph, MetricTable table,
               std::string exec_id, std::string default_metric);

  const CallGraph& graph() const { return *graph_; }
  const std::shared_ptr<const CallGraph>& graph_ptr() const { return graph_; }
  const MetricTable& table() const { return table_; }
  int num_ranks() const { return table_.num_ranks(); }
  const std::vector<std::string>& metric_names() const {
    return table_.columns();
  }
  const std::string& exec_id() const { return exec_id_; }
  const std::string& default_metric() const { return default_metric_; }

 private:
  std::shared_ptr<const CallGraph> graph_;
  MetricTable table_;
  std::string exec_id_;
  std::string default_metric_;
};

/// Per-node statistic taken across ranks.
enum class RankStat { sum, mean, max, min };

/// Parses "sum" | "mean" | "max" | "min"; throws Error otherwise.
RankStat parse_rank_stat(std::string_view name);

/// Collapses the rank dimension: one value per node, null rows excluded
/// from the statistic, all-null nodes map to null.
/// Throws UnknownMetric for an absent column.
std::vector<std::optional<double>> aggregate_over_ranks(
    const ProfileFrame& pf, std::string_view metric, RankStat stat);

/// Returns a copy of `pf` with a "<metric> (inc)" column holding, per
/// (node, rank), the sum of the exclusive metric over the node's subtree.
/// Nulls count as zero inside the sum, but a subtree with no values at all
/// stays null. Recomputes the column if it already exists.
/// Requires a CCT (throws NotATree) and an existing exclusive column
/// (throws UnknownMetric).
ProfileFrame inclusive_from_exclusive(const ProfileFrame& pf,
                                      std::string_view metric);

/// Name of the column hot-path-style analyses should read for `metric`:
/// the metric itself when already inclusive, else its " (inc)" variant.
/// `needs_derivation` is set when that variant does not exist yet and must
/// be produced by inclusive_from_exclusive().
std::string resolve_inclusive_column(const ProfileFrame& pf,
                                     std::string_view metric,
                                     bool& needs_derivation);

/// Rank-aggregated inclusive values per node, deriving them on the fly
/// when only the exclusive column exists (same null semantics as
/// inclusive_from_exclusive, but without building a new table).
std::vector<std::optional<double>> aggregated_inclusive(const ProfileFrame& pf,
                                                        std::string_view metric,
                                                        RankStat agg);

}  // namespace chopper
