#include "chopper/metric_table.hpp"

#include <algorithm>

#include "chopper/errors.hpp"

namespace chopper {

MetricTable::MetricTable(std::size_t num_nodes, int num_ranks)
    : num_nodes_(num_nodes), num_ranks_(num_ranks) {
  if (num_ranks < 1) throw Error("a metric table needs at least one rank");
}

bool MetricTable::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t MetricTable::column_index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw UnknownMetric(std::string(name));
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<std::optional<double>>& MetricTable::add_column(
    const std::string& name) {
  if (has_column(name)) throw Error("duplicate metric column: " + name);
  names_.push_back(name);
  return columns_.emplace_back(row_count());
}

void MetricTable::remove_column(std::string_view name) {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return;
  columns_.erase(columns_.begin() + (it - names_.begin()));
  names_.erase(it);
}

}  // namespace chopper
