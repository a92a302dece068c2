#include "chopper/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "chopper/errors.hpp"
#include "chopper/ingest.hpp"
#include "chopper/multi_run.hpp"
#include "chopper/render.hpp"
#include "chopper/single_run.hpp"

namespace chopper {

namespace {

using nlohmann::ordered_json;

struct CommonFlags {
  std::string metric = "time";
  std::string format = "tty";
  std::string output;
  int precision = 3;
  bool color = false;
  bool no_color = false;

  bool use_color() const { return color && !no_color; }
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_metric = true) {
  if (with_metric)
    cmd->add_option("--metric", flags.metric, "Metric column (default: time)");
  cmd->add_option("--format", flags.format, "Output format: tty, csv or json")
      ->check(CLI::IsMember({"tty", "csv", "json"}));
  cmd->add_option("--output", flags.output, "Write the result to a file");
  cmd->add_option("--precision", flags.precision,
                  "Decimal places in tty output (default: 3)");
  cmd->add_flag("--color", flags.color, "Color highlighted tree nodes");
  cmd->add_flag("--no-color", flags.no_color, "Force plain output");
}

void deliver(const std::string& text, const CommonFlags& flags,
             std::ostream& out) {
  if (flags.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(flags.output, std::ios::binary);
  if (!file) throw Error("cannot write " + flags.output);
  file << text;
}

GroupBy parse_groupby(const std::string& name) {
  if (name == "name") return GroupBy::name;
  if (name == "file") return GroupBy::file;
  throw Error("unknown group key: " + name);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<ProfileFrame> load_all(const std::vector<std::string>& paths) {
  std::vector<ProfileSource> sources;
  sources.reserve(paths.size());
  for (const auto& p : paths) sources.emplace_back(std::filesystem::path(p));
  return construct_from(std::move(sources));
}

ordered_json callgraph_json(const ProfileFrame& pf) {
  ordered_json doc;
  doc["schema"] = "chopper-callgraph-v1";
  doc["exec_id"] = pf.exec_id();
  doc["ranks"] = pf.num_ranks();
  doc["metrics"] = pf.metric_names();
  ordered_json nodes = ordered_json::array();
  for (NodeId id = 0; id < pf.graph().size(); ++id) {
    ordered_json node;
    node["id"] = id;
    node["name"] = pf.graph().frame(id).name;
    ordered_json metrics = ordered_json::object();
    for (const auto& name : pf.metric_names()) {
      bool any = false;
      ordered_json arr = ordered_json::array();
      for (int r = 0; r < pf.num_ranks(); ++r) {
        auto v = pf.table().cell(name, id, r);
        if (v) any = true;
        arr.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
      }
      if (any) metrics[name] = std::move(arr);
    }
    if (!metrics.empty()) node["metrics"] = std::move(metrics);
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (NodeId id = 0; id < pf.graph().size(); ++id)
    for (NodeId child : pf.graph().children(id))
      edges.push_back(ordered_json::array({id, child}));
  doc["edges"] = std::move(edges);
  ordered_json roots = ordered_json::array();
  for (NodeId root : pf.graph().roots()) roots.push_back(root);
  doc["roots"] = std::move(roots);
  return doc;
}

TableView hotpath_table(const ProfileFrame& pf, const std::vector<NodeId>& path,
                        const std::string& metric,
                        const std::vector<std::optional<double>>& values) {
  TableView out;
  out.index_name = "node";
  out.columns = {"name", metric};
  for (NodeId id : path) {
    out.index.push_back(std::to_string(id));
    out.cells.push_back({pf.graph().frame(id).label(),
                         values[id] ? nlohmann::json(*values[id])
                                    : nlohmann::json(nullptr)});
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"chopper — analysis of calling-context-tree profiles"};
  app.require_subcommand(1);

  // callgraph ---------------------------------------------------------------
  CommonFlags cg_flags;
  std::string cg_file;
  auto* cg = app.add_subcommand(
      "callgraph", "Merge a CCT into a call graph (one node per name)");
  cg->add_option("file", cg_file, "Canonical profile")->required();
  add_common(cg, cg_flags);

  // flat --------------------------------------------------------------------
  CommonFlags flat_flags;
  std::string flat_file, flat_groupby = "name";
  auto* flat = app.add_subcommand("flat", "Flat profile grouped by name/file");
  flat->add_option("file", flat_file, "Canonical profile")->required();
  flat->add_option("--groupby", flat_groupby, "Group key: name or file")
      ->check(CLI::IsMember({"name", "file"}));
  add_common(flat, flat_flags);

  // imbalance ---------------------------------------------------------------
  CommonFlags imb_flags;
  std::string imb_file;
  std::optional<double> imb_threshold;
  bool imb_verbose = false;
  auto* imb = app.add_subcommand(
      "imbalance", "Per-node load imbalance (max across ranks / mean)");
  imb->add_option("file", imb_file, "Canonical profile")->required();
  imb->add_option("--threshold", imb_threshold,
                  "Drop nodes whose max is at or below this value");
  imb->add_flag("--verbose", imb_verbose,
                "Add top ranks, percentiles and a histogram");
  add_common(imb, imb_flags);

  // hotpath -----------------------------------------------------------------
  CommonFlags hot_flags;
  std::string hot_file, hot_agg = "sum";
  double hot_stop = 0.5;
  std::optional<NodeId> hot_start;
  auto* hot = app.add_subcommand("hotpath",
                                 "Most expensive chain of calls from a root");
  hot->add_option("file", hot_file, "Canonical profile")->required();
  hot->add_option("--stop-pct", hot_stop,
                  "Stop when no child exceeds this fraction of its parent "
                  "(default: 0.5)");
  hot->add_option("--start", hot_start, "Start node id (default: hottest root)");
  hot->add_option("--agg", hot_agg, "Rank aggregation: sum, mean or max")
      ->check(CLI::IsMember({"sum", "mean", "max"}));
  add_common(hot, hot_flags);

  // corr --------------------------------------------------------------------
  CommonFlags corr_flags;
  std::string corr_file, corr_metrics, corr_method = "pearson";
  std::optional<double> corr_min_abs;
  auto* corr =
      app.add_subcommand("corr", "Correlation matrix between metrics");
  corr->add_option("file", corr_file, "Canonical profile")->required();
  corr->add_option("--metrics", corr_metrics,
                   "Comma-separated metric list (default: all)");
  corr->add_option("--method", corr_method, "pearson, spearman or kendall")
      ->check(CLI::IsMember({"pearson", "spearman", "kendall"}));
  corr->add_option("--min-abs", corr_min_abs,
                   "Null out entries with |r| below this value");
  add_common(corr, corr_flags, /*with_metric=*/false);

  // pairwise ----------------------------------------------------------------
  CommonFlags pw_flags;
  std::string pw_file, pw_x, pw_y;
  auto* pw = app.add_subcommand(
      "pairwise", "Least-squares fit of two metrics across nodes");
  pw->add_option("file", pw_file, "Canonical profile")->required();
  pw->add_option("--x", pw_x, "Predictor metric")->required();
  pw->add_option("--y", pw_y, "Response metric")->required();
  add_common(pw, pw_flags, /*with_metric=*/false);

  // unify -------------------------------------------------------------------
  CommonFlags unify_flags;
  std::vector<std::string> unify_files;
  auto* unify = app.add_subcommand(
      "unify", "Rebase several profiles onto one union graph");
  unify->add_option("files", unify_files, "Canonical profiles")
      ->required()
      ->expected(-2);
  add_common(unify, unify_flags, /*with_metric=*/false);

  // pivot -------------------------------------------------------------------
  CommonFlags pivot_flags;
  std::vector<std::string> pivot_files;
  std::string pivot_columns = "name", pivot_index = "exec_id";
  std::optional<double> pivot_threshold;
  auto* pivot = app.add_subcommand(
      "pivot", "Executions-by-code-locations table over several runs");
  pivot->add_option("files", pivot_files, "Canonical profiles")
      ->required()
      ->expected(-1);
  pivot->add_option("--columns", pivot_columns, "Group key: name or file")
      ->check(CLI::IsMember({"name", "file"}));
  pivot->add_option("--index", pivot_index, "Row key: exec_id or ranks")
      ->check(CLI::IsMember({"exec_id", "ranks"}));
  pivot->add_option("--threshold", pivot_threshold,
                    "Drop groups at or below this value in every run");
  add_common(pivot, pivot_flags);

  // scaling -----------------------------------------------------------------
  CommonFlags sc_flags;
  std::vector<std::string> sc_files;
  std::string sc_procs, sc_agg = "mean";
  bool sc_strong = false, sc_weak = false;
  bool sc_speedup = false, sc_efficiency = false;
  std::optional<double> sc_threshold;
  auto* sc = app.add_subcommand(
      "scaling", "Per-node speedup/efficiency against the smallest run");
  sc->add_option("files", sc_files, "Canonical profiles")
      ->required()
      ->expected(-2);
  sc->add_flag("--strong", sc_strong, "Strong-scaling study");
  sc->add_flag("--weak", sc_weak, "Weak-scaling study");
  sc->add_flag("--speedup", sc_speedup, "Report speedup");
  sc->add_flag("--efficiency", sc_efficiency, "Report efficiency");
  sc->add_option("--procs", sc_procs,
                 "Comma-separated process counts, one per file "
                 "(default: each profile's rank count)");
  sc->add_option("--threshold", sc_threshold,
                 "Drop nodes whose baseline value is at or below this");
  sc->add_option("--agg", sc_agg, "Rank aggregation: mean, sum or max")
      ->check(CLI::IsMember({"mean", "sum", "max"}));
  add_common(sc, sc_flags);

  // render ------------------------------------------------------------------
  CommonFlags rd_flags;
  std::string rd_file;
  std::optional<int> rd_depth;
  bool rd_hotpath = false;
  double rd_stop = 0.5;
  auto* rd = app.add_subcommand("render", "Annotated terminal tree of a CCT");
  rd->add_option("file", rd_file, "Canonical profile")->required();
  rd->add_option("--depth", rd_depth, "Print only the first N levels");
  rd->add_flag("--hotpath", rd_hotpath, "Highlight the hot path");
  rd->add_option("--stop-pct", rd_stop, "Hot-path stopping fraction");
  add_common(rd, rd_flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);  // CLI11's vector overload expects reversed args
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  if (cg->parsed()) {
    ProfileFrame pf = read_canonical(cg_file);
    ProfileFrame merged = to_callgraph(pf);
    if (cg_flags.format == "json") {
      deliver(callgraph_json(merged).dump(2) + "\n", cg_flags, out);
    } else if (cg_flags.format == "csv") {
      err << "callgraph has no csv form; use --format json or tty\n";
      return 1;
    } else {
      RenderOptions opts;
      opts.metric = cg_flags.metric;
      opts.precision = cg_flags.precision;
      opts.color = cg_flags.use_color();
      deliver(render_tree(merged, opts), cg_flags, out);
    }
    return 0;
  }

  if (flat->parsed()) {
    ProfileFrame pf = read_canonical(flat_file);
    FlatProfile result =
        flat_profile(pf, parse_groupby(flat_groupby), flat_flags.metric);
    deliver(emit_table(to_table(result), parse_table_format(flat_flags.format),
                       flat_flags.precision),
            flat_flags, out);
    return 0;
  }

  if (imb->parsed()) {
    ProfileFrame pf = read_canonical(imb_file);
    ImbalanceResult result =
        load_imbalance(pf, imb_flags.metric, imb_threshold, imb_verbose);
    // Most imbalanced first, the order the analysis is read in.
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const ImbalanceRow& a, const ImbalanceRow& b) {
                       if (a.imbalance != b.imbalance)
                         return a.imbalance > b.imbalance;
                       return a.node < b.node;
                     });
    deliver(emit_table(to_table(result), parse_table_format(imb_flags.format),
                       imb_flags.precision),
            imb_flags, out);
    return 0;
  }

  if (hot->parsed()) {
    ProfileFrame pf = read_canonical(hot_file);
    std::vector<NodeId> path = hot_path(pf, hot_flags.metric, hot_stop,
                                        hot_start, parse_rank_stat(hot_agg));
    bool derive = false;
    std::string column = resolve_inclusive_column(pf, hot_flags.metric, derive);
    std::optional<ProfileFrame> derived;
    if (derive)
      derived = inclusive_from_exclusive(pf, exclusive_base(hot_flags.metric));
    const ProfileFrame& frame = derived ? *derived : pf;
    auto values = aggregate_over_ranks(frame, column, parse_rank_stat(hot_agg));
    deliver(emit_table(hotpath_table(frame, path, column, values),
                       parse_table_format(hot_flags.format),
                       hot_flags.precision),
            hot_flags, out);
    return 0;
  }

  if (corr->parsed()) {
    ProfileFrame pf = read_canonical(corr_file);
    std::vector<std::string> metrics = corr_metrics.empty()
                                           ? pf.metric_names()
                                           : split_list(corr_metrics);
    CorrelationMatrix matrix =
        correlation_analysis(pf, metrics, parse_corr_method(corr_method));
    if (corr_min_abs)
      matrix = filter_correlation_matrix(matrix, *corr_min_abs);
    deliver(emit_table(to_table(matrix), parse_table_format(corr_flags.format),
                       corr_flags.precision),
            corr_flags, out);
    return 0;
  }

  if (pw->parsed()) {
    ProfileFrame pf = read_canonical(pw_file);
    PairwiseFit fit = pairwise_correlation(pf, pw_x, pw_y);
    // Outliers first: sort by |distance|, nulls last.
    std::stable_sort(fit.rows.begin(), fit.rows.end(),
                     [](const PairwiseFit::Row& a, const PairwiseFit::Row& b) {
                       if (a.distance.has_value() != b.distance.has_value())
                         return a.distance.has_value();
                       if (a.distance && b.distance &&
                           std::abs(*a.distance) != std::abs(*b.distance))
                         return std::abs(*a.distance) > std::abs(*b.distance);
                       return a.node < b.node;
                     });
    TableFormat format = parse_table_format(pw_flags.format);
    if (format == TableFormat::json) {
      ordered_json doc;
      doc["slope"] = fit.slope;
      doc["intercept"] = fit.intercept;
      doc["nodes"] =
          ordered_json::parse(emit_table(to_table(fit), TableFormat::json));
      deliver(doc.dump(2) + "\n", pw_flags, out);
    } else if (format == TableFormat::tty) {
      std::string head = "slope " + format_fixed(fit.slope, pw_flags.precision) +
                         "  intercept " +
                         format_fixed(fit.intercept, pw_flags.precision) + "\n";
      deliver(head + emit_table(to_table(fit), format, pw_flags.precision),
              pw_flags, out);
    } else {
      deliver(emit_table(to_table(fit), format, pw_flags.precision), pw_flags,
              out);
    }
    return 0;
  }

  if (unify->parsed()) {
    std::vector<ProfileFrame> pfs = load_all(unify_files);
    for (std::size_t i = 0; i < pfs.size(); ++i)
      for (std::size_t j = i + 1; j < pfs.size(); ++j)
        if (pfs[i].exec_id() == pfs[j].exec_id())
          throw Error("duplicate exec_id " + pfs[i].exec_id() +
                      "; outputs would collide");
    std::vector<std::size_t> before;
    for (const auto& pf : pfs) before.push_back(pf.graph().size());
    unify_multiple_graphframes(pfs);
    if (unify_flags.format == "csv") {
      err << "unify has no csv form; use --format json or tty\n";
      return 1;
    }
    if (unify_flags.format == "tty") {
      std::string text =
          "union nodes: " + std::to_string(pfs.front().graph().size()) + "\n";
      for (std::size_t i = 0; i < pfs.size(); ++i) {
        text += pfs[i].exec_id() + ": " + std::to_string(before[i]) + " -> " +
                std::to_string(pfs[i].graph().size()) + " nodes, " +
                std::to_string(pfs[i].table().row_count()) + " rows\n";
      }
      deliver(text, unify_flags, out);
    } else {
      ordered_json doc = ordered_json::object();
      for (const auto& pf : pfs) doc[pf.exec_id()] = canonical_json(pf);
      deliver(doc.dump(2) + "\n", unify_flags, out);
    }
    return 0;
  }

  if (pivot->parsed()) {
    std::vector<ProfileFrame> pfs = load_all(pivot_files);
    PivotTable table = multirun_analysis(
        pfs, pivot_flags.metric,
        pivot_index == "ranks" ? PivotIndex::ranks : PivotIndex::exec_id,
        parse_groupby(pivot_columns), pivot_threshold);
    deliver(emit_table(to_table(table), parse_table_format(pivot_flags.format),
                       pivot_flags.precision),
            pivot_flags, out);
    return 0;
  }

  if (sc->parsed()) {
    if (sc_strong == sc_weak)
      throw Error("pass exactly one of --strong or --weak");
    if (sc_speedup == sc_efficiency)
      throw Error("pass exactly one of --speedup or --efficiency");
    std::vector<ProfileFrame> pfs = load_all(sc_files);
    std::vector<int> procs;
    if (!sc_procs.empty()) {
      for (const auto& item : split_list(sc_procs)) {
        try {
          procs.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw Error("--procs expects integers, got \"" + item + "\"");
        }
      }
      if (procs.size() != pfs.size())
        throw Error("--procs lists " + std::to_string(procs.size()) +
                    " counts for " + std::to_string(pfs.size()) + " files");
    } else {
      for (const auto& pf : pfs) procs.push_back(pf.num_ranks());
    }
    std::vector<ScalingRun> runs;
    runs.reserve(pfs.size());
    for (std::size_t i = 0; i < pfs.size(); ++i)
      runs.push_back(ScalingRun{std::move(pfs[i]), procs[i]});
    ScalingResult result = speedup_efficiency(
        runs, sc_flags.metric,
        sc_strong ? ScalingMode::strong : ScalingMode::weak,
        sc_speedup ? ScalingMeasure::speedup : ScalingMeasure::efficiency,
        sc_threshold, parse_rank_stat(sc_agg));
    deliver(emit_table(to_table(result), parse_table_format(sc_flags.format),
                       sc_flags.precision),
            sc_flags, out);
    return 0;
  }

  if (rd->parsed()) {
    ProfileFrame pf = read_canonical(rd_file);
    if (rd_flags.format == "json") {
      deliver(canonical_json(pf).dump(2) + "\n", rd_flags, out);
      return 0;
    }
    if (rd_flags.format == "csv") {
      err << "render has no csv form; use --format json or tty\n";
      return 1;
    }
    RenderOptions opts;
    opts.metric = rd_flags.metric;
    opts.depth_limit = rd_depth;
    opts.precision = rd_flags.precision;
    opts.color = rd_flags.use_color();
    if (rd_hotpath) opts.highlight = hot_path(pf, rd_flags.metric, rd_stop);
    deliver(render_tree(pf, opts), rd_flags, out);
    return 0;
  }

  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace chopper
