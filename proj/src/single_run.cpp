#include "chopper/single_run.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <utility>

#include "chopper/errors.hpp"

namespace chopper {

// ---------------------------------------------------------------------------
// to_callgraph

ProfileFrame to_callgraph(const ProfileFrame& pf) {
  const CallGraph& graph = pf.graph();
  if (!graph.is_cct())
    throw NotATree("to_callgraph expects a calling context tree");

  const auto& metrics = pf.metric_names();
  const int ranks = pf.num_ranks();

  // A merged node keeps file/line only when every call site agrees.
  std::unordered_map<std::string, Frame> consensus;
  graph.visit([&](NodeId id, int) {
    const Frame& frame = graph.frame(id);
    auto [it, inserted] = consensus.try_emplace(frame.name, frame);
    if (!inserted) {
      if (it->second.file != frame.file) it->second.file.reset();
      if (it->second.line != frame.line) it->second.line.reset();
    }
  });

  CallGraphBuilder builder;
  std::unordered_map<std::string, NodeId> merged;  // name -> provisional id
  std::vector<NodeId> to_merged(graph.size());
  graph.visit([&](NodeId id, int) {
    const std::string& name = graph.frame(id).name;
    auto [it, inserted] = merged.try_emplace(name, 0);
    if (inserted) it->second = builder.add_node(consensus.at(name));
    to_merged[id] = it->second;
  });

  std::set<NodeId> root_set;
  for (NodeId root : graph.roots()) {
    if (root_set.insert(to_merged[root]).second)
      builder.add_root(to_merged[root]);
  }
  std::set<std::pair<NodeId, NodeId>> edges;
  graph.visit([&](NodeId id, int) {
    for (NodeId child : graph.children(id)) {
      auto edge = std::make_pair(to_merged[id], to_merged[child]);
      if (edges.insert(edge).second) builder.add_edge(edge.first, edge.second);
    }
  });

  auto built = builder.build(/*cct=*/false);
  MetricTable table(built.graph->size(), ranks);
  struct Acc {
    double sum = 0.0;
    bool any = false;
  };
  for (const auto& name : metrics) {
    auto& column = table.add_column(name);
    std::vector<Acc> acc(built.graph->size() * ranks);
    const auto source = pf.table().column(name);
    for (NodeId id = 0; id < graph.size(); ++id) {
      NodeId target = built.remap[to_merged[id]];
      for (int r = 0; r < ranks; ++r) {
        if (const auto& v = source[pf.table().row(id, r)]) {
          auto& a = acc[table.row(target, r)];
          a.sum += *v;
          a.any = true;
        }
      }
    }
    for (std::size_t row = 0; row < acc.size(); ++row)
      if (acc[row].any) column[row] = acc[row].sum;
  }

  return ProfileFrame(std::move(built.graph), std::move(table), pf.exec_id(),
                      pf.default_metric());
}

// ---------------------------------------------------------------------------
// flat_profile

FlatProfile flat_profile(const ProfileFrame& pf, GroupBy groupby,
                         std::string_view metric) {
  const auto column = pf.table().column(metric);
  const CallGraph& graph = pf.graph();

  std::vector<std::string> order;  // first-seen group order
  std::map<std::string, std::pair<double, bool>> totals;
  graph.visit([&](NodeId id, int) {
    const Frame& frame = graph.frame(id);
    std::string key = groupby == GroupBy::name
                          ? frame.name
                          : frame.file.value_or("<unknown>");
    auto [it, inserted] = totals.try_emplace(key, 0.0, false);
    if (inserted) order.push_back(key);
    for (int r = 0; r < pf.num_ranks(); ++r) {
      if (const auto& v = column[pf.table().row(id, r)]) {
        it->second.first += *v;
        it->second.second = true;
      }
    }
  });

  FlatProfile out{groupby, std::string(metric), {}};
  for (const auto& key : order) {
    const auto& [sum, any] = totals.at(key);
    out.rows.emplace_back(key, any ? std::optional<double>(sum) : std::nullopt);
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second.has_value() != b.second.has_value())
                       return a.second.has_value();  // nulls last
                     if (a.second && b.second && *a.second != *b.second)
                       return *a.second > *b.second;
                     return a.first < b.first;
                   });
  return out;
}

// ---------------------------------------------------------------------------
// load_imbalance

namespace {

double percentile_sorted(const std::vector<double>& sorted, double q) {
  // Linear interpolation between the closest ranks, inclusive endpoints.
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = q / 100.0 * static_cast<double>(n - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ImbalanceStats verbose_stats(const std::vector<std::pair<double, int>>& by_rank,
                             const std::vector<double>& sorted) {
  ImbalanceStats stats{};
  auto ranked = by_rank;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; i < ranked.size() && i < 5; ++i)
    stats.top_ranks.push_back(ranked[i].second);

  const double qs[5] = {0.0, 25.0, 50.0, 75.0, 100.0};
  for (int i = 0; i < 5; ++i)
    stats.percentiles[i] = percentile_sorted(sorted, qs[i]);

  stats.hist.fill(0);
  const double lo = sorted.front(), hi = sorted.back();
  const double span = hi - lo;
  for (double v : sorted) {
    int bin = 0;
    if (span > 0.0) {
      bin = static_cast<int>((v - lo) / span * 10.0);
      if (bin > 9) bin = 9;  // the last bin is right-inclusive
    }
    ++stats.hist[bin];
  }
  return stats;
}

}  // namespace

ImbalanceResult load_imbalance(const ProfileFrame& pf, std::string_view metric,
                               std::optional<double> threshold, bool verbose) {
  if (threshold && *threshold < 0)
    throw InvalidThreshold("imbalance threshold must be non-negative, got " +
                           std::to_string(*threshold));
  const auto column = pf.table().column(metric);

  ImbalanceResult out;
  out.metric = std::string(metric);
  out.verbose = verbose;
  out.graph = pf.graph_ptr();

  for (NodeId node = 0; node < pf.graph().size(); ++node) {
    std::vector<std::pair<double, int>> by_rank;
    for (int r = 0; r < pf.num_ranks(); ++r)
      if (const auto& v = column[pf.table().row(node, r)])
        by_rank.emplace_back(*v, r);
    if (by_rank.empty()) {
      ++out.dropped_no_data;
      continue;
    }
    // Statistics run over sorted values so that the result is exactly
    // invariant under rank permutation.
    std::vector<double> sorted;
    sorted.reserve(by_rank.size());
    for (const auto& [v, r] : by_rank) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());

    const double max = sorted.back();
    const double mean =
        std::accumulate(sorted.begin(), sorted.end(), 0.0) /
        static_cast<double>(sorted.size());
    if (threshold && !(max > *threshold)) {
      ++out.dropped_below_threshold;
      continue;
    }
    if (mean == 0.0) {
      ++out.dropped_zero_mean;
      continue;
    }

    ImbalanceRow row;
    row.node = node;
    row.max = max;
    row.mean = mean;
    row.imbalance = max / mean;
    if (verbose) row.stats = verbose_stats(by_rank, sorted);
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// hot_path

std::vector<NodeId> hot_path(const ProfileFrame& pf, std::string_view metric,
                             double stop_pct, std::optional<NodeId> start,
                             RankStat agg) {
  if (!(stop_pct > 0.0) || stop_pct > 1.0)
    throw InvalidThreshold("stop fraction must be in (0, 1], got " +
                           std::to_string(stop_pct));
  if (start && !pf.graph().contains(*start))
    throw UnknownNode("start node " + std::to_string(*start) +
                      " is not in the graph");

  const auto values = aggregated_inclusive(pf, metric, agg);
  const CallGraph& graph = pf.graph();

  NodeId current;
  if (start) {
    current = *start;
  } else {
    auto roots = graph.roots();
    current = roots.front();
    std::optional<double> best;
    for (NodeId root : roots) {
      if (values[root] && (!best || *values[root] > *best)) {
        best = values[root];
        current = root;
      }
    }
  }

  std::vector<NodeId> path{current};
  if (!values[current] || *values[current] == 0.0) return path;

  std::vector<bool> visited(graph.size(), false);
  visited[current] = true;
  while (true) {
    std::optional<double> best;
    NodeId next = current;
    for (NodeId child : graph.children(current)) {
      if (visited[child] || !values[child]) continue;
      if (!best || *values[child] > *best) {
        best = values[child];
        next = child;
      }
    }
    if (!best || !(*best > stop_pct * *values[current])) break;
    path.push_back(next);
    visited[next] = true;
    current = next;
  }
  return path;
}

// ---------------------------------------------------------------------------
// correlation

CorrMethod parse_corr_method(std::string_view name) {
  if (name == "pearson") return CorrMethod::pearson;
  if (name == "spearman") return CorrMethod::spearman;
  if (name == "kendall") return CorrMethod::kendall;
  throw Error("unknown correlation method: " + std::string(name));
}

std::string_view to_string(CorrMethod method) {
  switch (method) {
    case CorrMethod::pearson: return "pearson";
    case CorrMethod::spearman: return "spearman";
    case CorrMethod::kendall: return "kendall";
  }
  return "?";
}

namespace {

std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Fractional (average) ranks, 1-based.
std::vector<double> rankify(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// Merge-sort inversion count, used by the O(n log n) Kendall path.
std::size_t count_inversions(std::vector<double>& v, std::vector<double>& tmp,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::size_t count = count_inversions(v, tmp, lo, mid) +
                      count_inversions(v, tmp, mid, hi);
  std::size_t a = lo, b = mid, o = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      count += mid - a;
      tmp[o++] = v[b++];
    } else {
      tmp[o++] = v[a++];
    }
  }
  while (a < mid) tmp[o++] = v[a++];
  while (b < hi) tmp[o++] = v[b++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return count;
}

// Kendall's tau-b (tie-corrected) via Knight's algorithm.
std::optional<double> kendall_tau_b(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  auto pairs = [](std::size_t t) {
    return static_cast<double>(t) * static_cast<double>(t - 1) / 2.0;
  };
  const double n0 = pairs(n);

  double tie_x = 0.0, tie_xy = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    tie_x += pairs(j - i + 1);
    for (std::size_t a = i; a <= j;) {
      std::size_t b = a;
      while (b + 1 <= j && y[idx[b + 1]] == y[idx[a]]) ++b;
      tie_xy += pairs(b - a + 1);
      a = b + 1;
    }
    i = j + 1;
  }

  std::vector<double> ys(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const double swaps =
      static_cast<double>(count_inversions(ys, tmp, 0, n));

  double tie_y = 0.0;
  std::vector<double> ysorted = ys;  // ys is now globally sorted
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && ysorted[j + 1] == ysorted[i]) ++j;
    tie_y += pairs(j - i + 1);
    i = j + 1;
  }

  const double concordant_minus_discordant =
      n0 - tie_x - tie_y + tie_xy - 2.0 * swaps;
  const double denom = std::sqrt((n0 - tie_x) * (n0 - tie_y));
  if (denom == 0.0) return std::nullopt;
  return concordant_minus_discordant / denom;
}

std::optional<double> correlate(CorrMethod method,
                                const std::vector<double>& x,
                                const std::vector<double>& y) {
  std::optional<double> r;
  switch (method) {
    case CorrMethod::pearson:
      r = pearson(x, y);
      break;
    case CorrMethod::spearman:
      r = pearson(rankify(x), rankify(y));
      break;
    case CorrMethod::kendall:
      r = kendall_tau_b(x, y);
      break;
  }
  if (r) r = std::clamp(*r, -1.0, 1.0);  // rounding can overshoot by 1 ulp
  return r;
}

}  // namespace

CorrelationMatrix correlation_analysis(const ProfileFrame& pf,
                                       const std::vector<std::string>& metrics,
                                       CorrMethod method) {
  if (metrics.size() < 2)
    throw InsufficientData("correlation needs at least two metrics");
  std::vector<std::span<const std::optional<double>>> cols;
  for (const auto& m : metrics) {
    cols.push_back(pf.table().column(m));
    std::size_t usable = 0;
    for (const auto& v : cols.back())
      if (v) ++usable;
    if (usable < 2)
      throw InsufficientData("metric " + m + " has " + std::to_string(usable) +
                             " non-null observation(s); need at least 2");
  }

  const std::size_t k = metrics.size();
  CorrelationMatrix out;
  out.metrics = metrics;
  out.method = method;
  out.values.assign(k, std::vector<std::optional<double>>(k));

  const std::size_t rows = pf.table().row_count();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      std::vector<double> x, y;
      for (std::size_t row = 0; row < rows; ++row) {
        if (cols[i][row] && cols[j][row]) {
          x.push_back(*cols[i][row]);
          y.push_back(*cols[j][row]);
        }
      }
      std::optional<double> r;
      if (x.size() >= 2) {
        if (i == j) {
          // 1 on the diagonal unless the metric has zero variance
          bool varies = false;
          for (double v : x) varies = varies || v != x.front();
          if (varies) r = 1.0;
        } else {
          r = correlate(method, x, y);
        }
      }
      out.values[i][j] = r;
      out.values[j][i] = r;
    }
  }
  return out;
}

CorrelationMatrix filter_correlation_matrix(const CorrelationMatrix& matrix,
                                            double min_abs) {
  if (min_abs < 0.0 || min_abs > 1.0)
    throw InvalidThreshold("correlation filter must be in [0, 1], got " +
                           std::to_string(min_abs));
  CorrelationMatrix out = matrix;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    for (std::size_t j = 0; j < out.values.size(); ++j)
      if (i != j && out.values[i][j] &&
          std::abs(*out.values[i][j]) < min_abs)
        out.values[i][j] = std::nullopt;
  return out;
}

PairwiseFit pairwise_correlation(const ProfileFrame& pf,
                                 std::string_view metric_x,
                                 std::string_view metric_y) {
  const auto xs = aggregate_over_ranks(pf, metric_x, RankStat::sum);
  const auto ys = aggregate_over_ranks(pf, metric_y, RankStat::sum);

  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] && ys[i]) {
      sx += *xs[i];
      sy += *ys[i];
      ++n;
    }
  }
  if (n < 2)
    throw InsufficientData("pairwise fit needs at least 2 nodes with values "
                           "in both metrics, got " + std::to_string(n));
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] && ys[i]) {
      sxx += (*xs[i] - mx) * (*xs[i] - mx);
      sxy += (*xs[i] - mx) * (*ys[i] - my);
    }
  }
  if (sxx == 0.0)
    throw DegenerateFit("all nodes have the same " + std::string(metric_x) +
                        " value; cannot fit a line");

  PairwiseFit out;
  out.metric_x = std::string(metric_x);
  out.metric_y = std::string(metric_y);
  out.graph = pf.graph_ptr();
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.rows.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    PairwiseFit::Row row;
    row.node = static_cast<NodeId>(i);
    row.x = xs[i];
    row.y = ys[i];
    if (xs[i]) row.fitted = out.slope * *xs[i] + out.intercept;
    if (xs[i] && ys[i]) row.distance = *ys[i] - *row.fitted;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace chopper
