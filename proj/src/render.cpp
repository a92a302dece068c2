#include "chopper/render.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "chopper/errors.hpp"

namespace chopper {

std::string format_fixed(double value, int precision) {
  if (value == 0.0) value = 0.0;  // normalize -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::fixed, precision);
  if (ec != std::errc()) return "?";
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// tree rendering

std::string render_tree(const ProfileFrame& pf, const RenderOptions& opts) {
  if (opts.depth_limit && *opts.depth_limit < 1)
    throw InvalidThreshold("depth limit must be at least 1, got " +
                           std::to_string(*opts.depth_limit));
  const auto values = aggregate_over_ranks(pf, opts.metric, opts.agg);
  const CallGraph& graph = pf.graph();
  std::vector<bool> marked(graph.size(), false);
  for (NodeId id : opts.highlight)
    if (graph.contains(id)) marked[id] = true;

  std::string out;
  std::vector<bool> seen(graph.size(), false);
  std::vector<std::pair<NodeId, int>> stack;
  auto roots = graph.roots();
  for (auto it = roots.rbegin(); it != roots.rend(); ++it)
    stack.emplace_back(*it, 0);
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    if (seen[id]) continue;
    seen[id] = true;

    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    std::string line = graph.frame(id).name + " ";
    line += values[id] ? format_fixed(*values[id], opts.precision) : "-";
    if (marked[id]) line += " *";
    if (opts.color && marked[id])
      out += "\x1b[31m" + line + "\x1b[0m";
    else
      out += line;
    out += '\n';

    if (opts.depth_limit && depth + 1 >= *opts.depth_limit) continue;
    auto kids = graph.children(id);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      if (!seen[*it]) stack.emplace_back(*it, depth + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// table emission

TableFormat parse_table_format(std::string_view name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "json") return TableFormat::json;
  if (name == "tty") return TableFormat::tty;
  throw Error("unknown table format: " + std::string(name));
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_cell(const nlohmann::json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_string()) return csv_escape(cell.get<std::string>());
  return csv_escape(cell.dump());
}

std::string emit_csv(const TableView& table) {
  std::string out = csv_escape(table.index_name);
  for (const auto& col : table.columns) out += "," + csv_escape(col);
  out += '\n';
  for (std::size_t r = 0; r < table.index.size(); ++r) {
    out += csv_escape(table.index[r]);
    for (const auto& cell : table.cells[r]) out += "," + csv_cell(cell);
    out += '\n';
  }
  return out;
}

std::string emit_json(const TableView& table) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (std::size_t r = 0; r < table.index.size(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      row[table.columns[c]] = table.cells[r][c];
    doc[table.index[r]] = std::move(row);
  }
  return doc.dump(2) + "\n";
}

std::string tty_cell(const nlohmann::json& cell, int precision) {
  if (cell.is_null()) return "-";
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number()) return format_fixed(cell.get<double>(), precision);
  if (cell.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < cell.size(); ++i) {
      if (i) out += ", ";
      out += cell[i].is_number()
                 ? (cell[i].is_number_integer()
                        ? std::to_string(cell[i].get<long long>())
                        : format_fixed(cell[i].get<double>(), precision))
                 : cell[i].dump();
    }
    return out + "]";
  }
  return cell.dump();
}

std::string emit_tty(const TableView& table, int precision) {
  const std::size_t ncols = table.columns.size();
  std::vector<std::vector<std::string>> grid;
  std::vector<bool> numeric(ncols + 1, true);
  numeric[0] = false;  // index column

  std::vector<std::string> header{table.index_name};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  grid.push_back(header);
  for (std::size_t r = 0; r < table.index.size(); ++r) {
    std::vector<std::string> row{table.index[r]};
    for (std::size_t c = 0; c < ncols; ++c) {
      const auto& cell = table.cells[r][c];
      row.push_back(tty_cell(cell, precision));
      if (!cell.is_null() && !cell.is_number()) numeric[c + 1] = false;
    }
    grid.push_back(std::move(row));
  }

  std::vector<std::size_t> width(ncols + 1, 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());

  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      std::size_t pad = width[c] - row[c].size();
      if (numeric[c])
        out += std::string(pad, ' ') + row[c];
      else if (c + 1 == row.size())
        out += row[c];  // no trailing spaces
      else
        out += row[c] + std::string(pad, ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string emit_table(const TableView& table, TableFormat format,
                       int precision) {
  switch (format) {
    case TableFormat::csv: return emit_csv(table);
    case TableFormat::json: return emit_json(table);
    case TableFormat::tty: return emit_tty(table, precision);
  }
  return {};
}

// ---------------------------------------------------------------------------
// lowerings

namespace {

nlohmann::json opt_cell(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

TableView to_table(const FlatProfile& flat) {
  TableView out;
  out.index_name = flat.groupby == GroupBy::name ? "name" : "file";
  out.columns = {flat.metric};
  for (const auto& [label, value] : flat.rows) {
    out.index.push_back(label);
    out.cells.push_back({opt_cell(value)});
  }
  return out;
}

TableView to_table(const ImbalanceResult& result) {
  TableView out;
  out.index_name = "node";
  const std::string& m = result.metric;
  out.columns = {"name", m + ".max", m + ".mean", m + ".imbalance"};
  if (result.verbose) {
    out.columns.push_back(m + ".ranks");
    out.columns.push_back(m + ".percentiles");
    out.columns.push_back(m + ".hist");
  }
  for (const auto& row : result.rows) {
    out.index.push_back(std::to_string(row.node));
    std::vector<nlohmann::json> cells{
        result.graph->frame(row.node).label(), row.max, row.mean,
        row.imbalance};
    if (result.verbose) {
      cells.emplace_back(row.stats->top_ranks);
      cells.emplace_back(row.stats->percentiles);
      cells.emplace_back(row.stats->hist);
    }
    out.cells.push_back(std::move(cells));
  }
  return out;
}

TableView to_table(const CorrelationMatrix& matrix) {
  TableView out;
  out.index_name = "metric";
  out.index = matrix.metrics;
  out.columns = matrix.metrics;
  for (const auto& row : matrix.values) {
    std::vector<nlohmann::json> cells;
    for (const auto& v : row) cells.push_back(opt_cell(v));
    out.cells.push_back(std::move(cells));
  }
  return out;
}

TableView to_table(const PairwiseFit& fit) {
  TableView out;
  out.index_name = "node";
  out.columns = {"name", fit.metric_x, fit.metric_y, "fitted", "distance"};
  for (const auto& row : fit.rows) {
    out.index.push_back(std::to_string(row.node));
    out.cells.push_back({fit.graph->frame(row.node).label(), opt_cell(row.x),
                         opt_cell(row.y), opt_cell(row.fitted),
                         opt_cell(row.distance)});
  }
  return out;
}

TableView to_table(const PivotTable& pivot) {
  TableView out;
  out.index_name = pivot.index_label;
  out.index = pivot.index;
  out.columns = pivot.columns;
  for (const auto& row : pivot.values) {
    std::vector<nlohmann::json> cells;
    for (const auto& v : row) cells.push_back(opt_cell(v));
    out.cells.push_back(std::move(cells));
  }
  return out;
}

TableView to_table(const ScalingResult& scaling) {
  TableView out;
  out.index_name = "node";
  out.columns = {"name"};
  out.columns.insert(out.columns.end(), scaling.exec_ids.begin(),
                     scaling.exec_ids.end());
  for (std::size_t i = 0; i < scaling.nodes.size(); ++i) {
    NodeId node = scaling.nodes[i];
    out.index.push_back(std::to_string(node));
    std::vector<nlohmann::json> cells{scaling.graph->frame(node).label()};
    for (const auto& v : scaling.values[i]) cells.push_back(opt_cell(v));
    out.cells.push_back(std::move(cells));
  }
  return out;
}

}  // namespace chopper
