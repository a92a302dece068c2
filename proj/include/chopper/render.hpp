#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chopper/multi_run.hpp"
#include "chopper/profile_frame.hpp"
#include "chopper/single_run.hpp"

namespace chopper {

/// Controls for render_tree.
struct RenderOptions {
  std::string metric;
  std::optional<int> depth_limit;     // >= 1; roots are depth 0
  std::vector<NodeId> highlight;      // e.g. a hot path
  bool color = false;                 // ANSI red on highlighted nodes
  int precision = 3;
  RankStat agg = RankStat::sum;
};

/// One line per node in DFS order, indented by depth, with the
/// rank-aggregated metric. Highlighted nodes get a trailing " *" marker
/// (plus red coloring when enabled). Byte-deterministic with color off.
std::string render_tree(const ProfileFrame& pf, const RenderOptions& opts);

/// Generic rectangular view every analysis result can be lowered to.
/// Cells are JSON values: numbers, strings, arrays (e.g. histograms) or
/// null for missing entries.
struct TableView {
  std::string index_name;
  std::vector<std::string> index;   // row labels
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> cells;  // [row][col]
};

enum class TableFormat { csv, json, tty };

TableFormat parse_table_format(std::string_view name);

/// csv: RFC 4180, nulls as empty fields. json: object of row-objects keyed
/// by the index. tty: aligned grid, nulls as "-", numbers at `precision`.
/// All byte-deterministic.
std::string emit_table(const TableView& table, TableFormat format,
                       int precision = 3);

/// Lowerings into TableView.
TableView to_table(const FlatProfile& flat);
TableView to_table(const ImbalanceResult& result);
TableView to_table(const CorrelationMatrix& matrix);
TableView to_table(const PairwiseFit& fit);
TableView to_table(const PivotTable& pivot);
TableView to_table(const ScalingResult& scaling);

/// Fixed-point formatting used by all tty output ("-0" never appears).
std::string format_fixed(double value, int precision);

}  // namespace chopper
