#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chopper/profile_frame.hpp"
#include "chopper/single_run.hpp"  // GroupBy

namespace chopper {

/// Rebinds every frame to one shared union graph built from the distinct
/// call paths of all inputs (nodes match by their root-to-node frame
/// sequence). Each frame's table grows null rows for the nodes it lacked
/// and keeps its original values everywhere else. After the call all
/// frames reference the identical graph object, so a second unification of
/// the same set is a no-op.
///
/// Needs at least two frames (InvalidArity), all of them CCTs (NotATree).
/// Mutates its inputs and requires exclusive access to them.
void unify_multiple_graphframes(std::span<ProfileFrame* const> pfs);
void unify_multiple_graphframes(std::vector<ProfileFrame>& pfs);

enum class PivotIndex { exec_id, ranks };

/// Executions-by-code-locations table of aggregated metric values; null
/// where a group does not appear in a run.
struct PivotTable {
  std::string index_label;            // "exec_id" or "ranks"
  std::vector<std::string> index;     // one entry per run
  std::vector<std::string> columns;   // group labels
  std::vector<std::vector<std::optional<double>>> values;  // [run][group]
};

/// Pivot of several executions: per run and per group (function name or
/// file), the metric summed over the group's nodes and ranks. Groups at or
/// below the threshold in every run are dropped; columns are ordered by
/// descending value in the first run. Throws UnknownMetric naming the run
/// that lacks the metric, and InvalidArity on an empty list or duplicate
/// index labels.
PivotTable multirun_analysis(const std::vector<ProfileFrame>& pfs,
                             std::string_view metric = "time",
                             PivotIndex index = PivotIndex::exec_id,
                             GroupBy columns = GroupBy::name,
                             std::optional<double> threshold = {});

/// One execution of a scaling study.
struct ScalingRun {
  ProfileFrame pf;
  int process_count;  // n; the smallest count in a set is the baseline s
};

enum class ScalingMode { strong, weak };
enum class ScalingMeasure { speedup, efficiency };

/// Per-node speedup or efficiency across runs, on the unified node set.
struct ScalingResult {
  ScalingMode mode = ScalingMode::strong;
  ScalingMeasure measure = ScalingMeasure::efficiency;
  std::string metric;  // the inclusive column the ratios were computed on
  std::shared_ptr<const CallGraph> graph;  // union graph
  std::vector<NodeId> nodes;               // retained rows
  std::vector<int> process_counts;         // ascending; [0] is the baseline
  std::vector<std::string> exec_ids;       // same order
  std::vector<std::vector<std::optional<double>>> values;  // [row][run]
};

/// Unifies the runs in place, aggregates the inclusive metric across ranks
/// (mean by default), and evaluates per node against the smallest-count
/// baseline:
///   strong speedup     t_s / t_n
///   strong efficiency  (s * t_s) / (n * t_n)
///   weak efficiency    t_s / t_n
/// Weak-scaling speedup is rejected (UnsupportedCombination), as are
/// duplicate process counts or exec_ids and fewer than two runs
/// (InvalidArity). A node
/// that is null in the baseline or in run n gets a null cell for n; with a
/// threshold, nodes whose baseline value is null or <= threshold are
/// dropped. An exclusive metric is converted with inclusive_from_exclusive
/// first.
ScalingResult speedup_efficiency(std::vector<ScalingRun>& runs,
                                 std::string_view metric, ScalingMode mode,
                                 ScalingMeasure measure,
                                 std::optional<double> threshold = {},
                                 RankStat agg = RankStat::mean);

}  // namespace chopper
