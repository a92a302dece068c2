#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chopper/profile_frame.hpp"

namespace chopper {

/// Collapses a CCT into a call graph: one node per distinct frame name,
/// edges are the union of caller->callee name pairs, and every metric is
/// summed across the merged nodes per (name, rank) — nulls ignored, a
/// group with no values at all stays null. Direct recursion becomes a
/// self-edge. The result is flagged merged (is_cct() == false).
ProfileFrame to_callgraph(const ProfileFrame& pf);

enum class GroupBy { name, file };

/// Flat profile: groups sorted descending by the metric summed over the
/// group's nodes and ranks. Nodes without a file group under "<unknown>".
struct FlatProfile {
  GroupBy groupby;
  std::string metric;
  std::vector<std::pair<std::string, std::optional<double>>> rows;
};

FlatProfile flat_profile(const ProfileFrame& pf, GroupBy groupby,
                         std::string_view metric);

/// Verbose per-node imbalance statistics.
struct ImbalanceStats {
  std::vector<int> top_ranks;          // <= 5, by descending value then rank
  std::array<double, 5> percentiles;   // 0th, 25th, 50th, 75th, 100th
  std::array<int, 10> hist;            // equal-width bins over [min, max]
};

struct ImbalanceRow {
  NodeId node;
  double max = 0.0;
  double mean = 0.0;
  double imbalance = 0.0;  // max / mean
  std::optional<ImbalanceStats> stats;
};

struct ImbalanceResult {
  std::string metric;
  bool verbose = false;
  std::vector<ImbalanceRow> rows;  // retained nodes, in node-id order
  // Nodes excluded from the result and why.
  std::size_t dropped_no_data = 0;
  std::size_t dropped_below_threshold = 0;
  std::size_t dropped_zero_mean = 0;
  std::shared_ptr<const CallGraph> graph;
};

/// Per-node load imbalance: max across ranks divided by mean across ranks.
/// With a threshold, nodes whose max is <= threshold are dropped before
/// anything else is computed; zero-mean nodes are dropped rather than
/// producing infinities, and both drops are counted in the result.
/// Verbose adds the top-five ranks, five percentiles and a ten-bin
/// frequency histogram per retained node. Throws UnknownMetric and, for a
/// negative threshold, InvalidThreshold.
ImbalanceResult load_imbalance(const ProfileFrame& pf, std::string_view metric,
                               std::optional<double> threshold = {},
                               bool verbose = false);

/// Follows the most expensive chain of calls: starting at `start` (default:
/// the most time-consuming root by rank-aggregated inclusive metric),
/// repeatedly descend to the child with the largest value while that child
/// exceeds stop_pct of its parent (strict, ties broken by child order).
/// Returns the chain from the start node down to the hot node.
///
/// The metric must be inclusive; an exclusive metric is converted with
/// inclusive_from_exclusive() first (which requires a CCT). Ranks are
/// aggregated by `agg` (sum by default) before any comparison. A start
/// node whose value is null or zero yields just [start].
std::vector<NodeId> hot_path(const ProfileFrame& pf, std::string_view metric,
                             double stop_pct = 0.5,
                             std::optional<NodeId> start = {},
                             RankStat agg = RankStat::sum);

enum class CorrMethod { pearson, spearman, kendall };

CorrMethod parse_corr_method(std::string_view name);
std::string_view to_string(CorrMethod method);

/// Symmetric matrix of rank-correlation coefficients between metrics,
/// computed over (node, rank) rows. Null entries mark zero-variance
/// metrics or pairs with fewer than two complete observations.
struct CorrelationMatrix {
  std::vector<std::string> metrics;
  CorrMethod method = CorrMethod::pearson;
  std::vector<std::vector<std::optional<double>>> values;
};

/// Rows with a null in either metric of a pair are dropped pairwise.
/// Throws UnknownMetric for absent columns and InsufficientData when a
/// metric has fewer than two non-null observations (or fewer than two
/// metrics were requested).
CorrelationMatrix correlation_analysis(const ProfileFrame& pf,
                                       const std::vector<std::string>& metrics,
                                       CorrMethod method);

/// Nulls every off-diagonal entry with |r| < min_abs; the diagonal is left
/// alone. min_abs outside [0, 1] raises InvalidThreshold.
CorrelationMatrix filter_correlation_matrix(const CorrelationMatrix& matrix,
                                            double min_abs);

/// Ordinary least squares of metric_y against metric_x on rank-summed
/// per-node values, plus each node's fitted value and signed residual
/// (observed - fitted). Nodes far from the line are the outliers worth a
/// look, discoverable by sorting |distance|.
struct PairwiseFit {
  std::string metric_x;
  std::string metric_y;
  double slope = 0.0;
  double intercept = 0.0;
  struct Row {
    NodeId node;
    std::optional<double> x, y, fitted, distance;
  };
  std::vector<Row> rows;  // every node, in node-id order
  std::shared_ptr<const CallGraph> graph;
};

/// Throws UnknownMetric, InsufficientData (< 2 complete points) and
/// DegenerateFit (all x equal).
PairwiseFit pairwise_correlation(const ProfileFrame& pf,
                                 std::string_view metric_x,
                                 std::string_view metric_y);

}  // namespace chopper
