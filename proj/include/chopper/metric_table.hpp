#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chopper/call_graph.hpp"

namespace chopper {

/// Columnar table of metric values keyed by (node, rank). Every node owns
/// exactly num_ranks rows per column; a missing measurement is an explicit
/// null (std::nullopt), never silently zero. Rows are stored row-major:
/// row(node, rank) = node * num_ranks + rank.
class MetricTable {
 public:
  MetricTable(std::size_t num_nodes, int num_ranks);

  std::size_t num_nodes() const { return num_nodes_; }
  int num_ranks() const { return num_ranks_; }
  std::size_t row_count() const { return num_nodes_ * num_ranks_; }

  const std::vector<std::string>& columns() const { return names_; }
  bool has_column(std::string_view name) const;

  /// Index of `name`, throwing UnknownMetric when absent.
  std::size_t column_index(std::string_view name) const;

  /// Adds an all-null column and returns its storage. Throws Error if the
  /// name is already taken.
  std::vector<std::optional<double>>& add_column(const std::string& name);

  /// Drops a column if present (used when recomputing derived columns).
  void remove_column(std::string_view name);

  std::span<const std::optional<double>> column(std::string_view name) const {
    return columns_[column_index(name)];
  }

  std::size_t row(NodeId node, int rank) const {
    return static_cast<std::size_t>(node) * num_ranks_ + rank;
  }

  std::optional<double> cell(std::string_view metric, NodeId node,
                             int rank) const {
    return columns_[column_index(metric)][row(node, rank)];
  }

  void set_cell(std::string_view metric, NodeId node, int rank,
                std::optional<double> value) {
    columns_[column_index(metric)][row(node, rank)] = value;
  }

  /// Cell-by-cell equality with null == null.
  friend bool operator==(const MetricTable&, const MetricTable&) = default;

 private:
  std::size_t num_nodes_;
  int num_ranks_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::optional<double>>> columns_;
};

/// Column name carried by inclusive (subtree-summed) variants of a metric.
inline constexpr std::string_view kInclusiveSuffix = " (inc)";

inline bool is_inclusive_name(std::string_view metric) {
  return metric.size() > kInclusiveSuffix.size() &&
         metric.substr(metric.size() - kInclusiveSuffix.size()) ==
             kInclusiveSuffix;
}

inline std::string inclusive_name(std::string_view metric) {
  return std::string(metric) + std::string(kInclusiveSuffix);
}

/// "time (inc)" -> "time"; exclusive names pass through.
inline std::string_view exclusive_base(std::string_view metric) {
  return is_inclusive_name(metric)
             ? metric.substr(0, metric.size() - kInclusiveSuffix.size())
             : metric;
}

}  // namespace chopper
