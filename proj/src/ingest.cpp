#include "chopper/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "chopper/errors.hpp"

namespace chopper {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kSchemaTag = "chopper-profile-v1";

std::string pick_default_metric(const std::vector<std::string>& metrics) {
  if (std::find(metrics.begin(), metrics.end(), "time") != metrics.end())
    return "time";
  return metrics.front();
}

// Shared accumulator for both the JSON and the literal readers.
struct FrameAssembly {
  CallGraphBuilder builder;
  std::vector<std::string> metrics;  // declared column order
  int ranks = 0;
  // per provisional node: metric index -> values (empty vector = all null)
  std::vector<std::vector<std::vector<std::optional<double>>>> values;

  std::size_t metric_index(const std::string& name) const {
    auto it = std::find(metrics.begin(), metrics.end(), name);
    return it == metrics.end() ? metrics.size()
                               : static_cast<std::size_t>(it - metrics.begin());
  }

  NodeId add_node(Frame frame) {
    values.emplace_back(metrics.size());
    return builder.add_node(std::move(frame));
  }

  // The table invariant: an inclusive value is never smaller than its
  // exclusive counterpart on the same row.
  void check_inclusive(NodeId node, const std::string& node_path) {
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      if (is_inclusive_name(metrics[m])) continue;
      std::size_t inc = metric_index(inclusive_name(metrics[m]));
      if (inc == metrics.size()) continue;
      const auto& exc_vals = values[node][m];
      const auto& inc_vals = values[node][inc];
      if (exc_vals.empty() || inc_vals.empty()) continue;
      for (int r = 0; r < ranks; ++r) {
        if (exc_vals[r] && inc_vals[r] && *inc_vals[r] < *exc_vals[r])
          throw SchemaError(
              node_path + "/metrics/" + metrics[inc] + "[" + std::to_string(r) +
                  "]",
              "inclusive value is smaller than the exclusive value");
      }
    }
  }

  ProfileFrame finish(bool cct, const std::string& exec_id) {
    auto built = builder.build(cct);
    MetricTable table(built.graph->size(), ranks);
    for (const auto& name : metrics) table.add_column(name);
    for (NodeId prov = 0; prov < values.size(); ++prov) {
      NodeId node = built.remap[prov];
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        const auto& vals = values[prov][m];
        if (vals.empty()) continue;
        for (int r = 0; r < ranks; ++r)
          table.set_cell(metrics[m], node, r, vals[r]);
      }
    }
    return ProfileFrame(std::move(built.graph), std::move(table), exec_id,
                        pick_default_metric(metrics));
  }
};

// ---------------------------------------------------------------------------
// canonical JSON reader

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key, "missing");
  return *it;
}

Frame parse_frame(const json& node, const std::string& path) {
  const json& frame = require(node, "frame", path);
  if (!frame.is_object()) throw SchemaError(path + "/frame", "not an object");
  Frame out;
  const json& name = require(frame, "name", path + "/frame");
  if (!name.is_string() || name.get<std::string>().empty())
    throw SchemaError(path + "/frame/name", "must be a non-empty string");
  out.name = name.get<std::string>();
  if (auto it = frame.find("file"); it != frame.end() && !it->is_null()) {
    if (!it->is_string())
      throw SchemaError(path + "/frame/file", "must be a string");
    out.file = it->get<std::string>();
  }
  if (auto it = frame.find("line"); it != frame.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long long>() < 0)
      throw SchemaError(path + "/frame/line",
                        "must be a non-negative integer");
    out.line = static_cast<int>(it->get<long long>());
  }
  return out;
}

void parse_node(const json& node, const std::string& path, FrameAssembly& out,
                NodeId parent) {
  if (!node.is_object()) throw SchemaError(path, "node must be an object");
  NodeId id = out.add_node(parse_frame(node, path));
  if (parent == kNoParent)
    out.builder.add_root(id);
  else
    out.builder.add_edge(parent, id);

  if (auto it = node.find("metrics"); it != node.end()) {
    if (!it->is_object())
      throw SchemaError(path + "/metrics", "must be an object");
    for (const auto& [name, arr] : it->items()) {
      std::size_t m = out.metric_index(name);
      if (m == out.metrics.size())
        throw SchemaError(path + "/metrics/" + name,
                          "metric not declared in /metrics");
      if (!arr.is_array() || static_cast<int>(arr.size()) != out.ranks)
        throw SchemaError(path + "/metrics/" + name,
                          "expected an array of " + std::to_string(out.ranks) +
                              " values (one per rank)");
      auto& vals = out.values[id][m];
      vals.resize(out.ranks);
      for (int r = 0; r < out.ranks; ++r) {
        const json& v = arr[r];
        if (v.is_null()) continue;
        if (!v.is_number())
          throw SchemaError(
              path + "/metrics/" + name + "[" + std::to_string(r) + "]",
              "must be a number or null");
        vals[r] = v.get<double>();
      }
    }
  }
  out.check_inclusive(id, path);

  if (auto it = node.find("children"); it != node.end()) {
    if (!it->is_array())
      throw SchemaError(path + "/children", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      parse_node((*it)[i], path + "/children/" + std::to_string(i), out, id);
  }
}

ProfileFrame parse_document(const json& doc, const std::string& fallback_id) {
  if (!doc.is_object()) throw SchemaError("", "document must be an object");
  const json& tag = require(doc, "schema", "");
  if (!tag.is_string() || tag.get<std::string>() != kSchemaTag)
    throw SchemaError("/schema", "expected \"" + std::string(kSchemaTag) +
                                     "\", got " + tag.dump());

  FrameAssembly out;
  const json& ranks = require(doc, "ranks", "");
  if (!ranks.is_number_integer() || ranks.get<long long>() < 1)
    throw SchemaError("/ranks", "must be an integer >= 1");
  out.ranks = static_cast<int>(ranks.get<long long>());

  const json& metrics = require(doc, "metrics", "");
  if (!metrics.is_array() || metrics.empty())
    throw SchemaError("/metrics", "must be a non-empty array");
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const json& m = metrics[i];
    if (!m.is_string() || m.get<std::string>().empty())
      throw SchemaError("/metrics/" + std::to_string(i),
                        "must be a non-empty string");
    if (out.metric_index(m.get<std::string>()) != out.metrics.size())
      throw SchemaError("/metrics/" + std::to_string(i),
                        "duplicate metric " + m.dump());
    out.metrics.push_back(m.get<std::string>());
  }

  std::string exec_id = fallback_id;
  if (auto it = doc.find("exec_id"); it != doc.end()) {
    if (!it->is_string()) throw SchemaError("/exec_id", "must be a string");
    exec_id = it->get<std::string>();
  }

  const json& roots = require(doc, "roots", "");
  if (!roots.is_array() || roots.empty())
    throw SchemaError("/roots", "must be a non-empty array");
  for (std::size_t i = 0; i < roots.size(); ++i)
    parse_node(roots[i], "/roots/" + std::to_string(i), out, kNoParent);

  return out.finish(/*cct=*/true, exec_id);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ProfileFrame read_canonical_text(const std::string& text,
                                 const std::string& origin) {
  return parse_document(parse_json(text, origin), origin);
}

ProfileFrame read_canonical(const std::filesystem::path& path) {
  return parse_document(parse_json(slurp(path), path.string()),
                        path.stem().string());
}

// ---------------------------------------------------------------------------
// literal reader

namespace {

void walk_literal(const LiteralNode& node, const std::string& path,
                  FrameAssembly& out, NodeId parent) {
  if (node.frame.name.empty())
    throw SchemaError(path + "/frame/name", "must be non-empty");
  if (node.frame.line && *node.frame.line < 0)
    throw SchemaError(path + "/frame/line", "must be non-negative");
  NodeId id = out.add_node(node.frame);
  if (parent == kNoParent)
    out.builder.add_root(id);
  else
    out.builder.add_edge(parent, id);

  for (const auto& [name, vals] : node.metrics) {
    if (out.ranks == 0) out.ranks = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != out.ranks || vals.empty())
      throw SchemaError(path + "/metrics/" + name,
                        "inconsistent rank count: expected " +
                            std::to_string(out.ranks) + ", got " +
                            std::to_string(vals.size()));
    std::size_t m = out.metric_index(name);
    if (m == out.metrics.size()) {
      out.metrics.push_back(name);
      for (auto& per_node : out.values) per_node.emplace_back();
      m = out.metrics.size() - 1;
    }
    out.values[id][m] = vals;
  }
  out.check_inclusive(id, path);

  for (std::size_t i = 0; i < node.children.size(); ++i)
    walk_literal(node.children[i], path + "/children/" + std::to_string(i),
                 out, id);
}

}  // namespace

ProfileFrame from_literal(const Literal& literal, const std::string& exec_id) {
  if (literal.empty()) throw SchemaError("/", "literal has no roots");
  FrameAssembly out;
  for (std::size_t i = 0; i < literal.size(); ++i)
    walk_literal(literal[i], "/" + std::to_string(i), out, kNoParent);
  if (out.metrics.empty() || out.ranks == 0)
    throw SchemaError("/", "literal declares no metric values; "
                           "cannot infer the rank count");
  return out.finish(/*cct=*/true, exec_id);
}

// ---------------------------------------------------------------------------
// detection and batch loading

SourceKind detect_kind(const ProfileSource& source) {
  if (std::holds_alternative<Literal>(source.data)) return SourceKind::literal;
  const auto& path = std::get<std::filesystem::path>(source.data);
  // Extension first, then the schema tag; both must point at the canonical
  // format. Other readers would hang their fingerprints here.
  std::string text;
  try {
    text = slurp(path);
  } catch (const Error&) {
    return SourceKind::unknown;
  }
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return SourceKind::unknown;
  auto tag = doc.find("schema");
  if (tag == doc.end() || !tag->is_string() ||
      tag->get<std::string>() != kSchemaTag)
    return SourceKind::unknown;
  return SourceKind::canonical_json;
}

std::vector<ProfileFrame> construct_from(std::vector<ProfileSource> sources) {
  if (sources.empty())
    throw InvalidArity("construct_from needs at least one source");
  std::vector<ProfileFrame> frames;
  frames.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto& source = sources[i];
    source.detected_kind = detect_kind(source);
    switch (source.detected_kind) {
      case SourceKind::literal:
        frames.push_back(from_literal(std::get<Literal>(source.data),
                                      source.exec_id.value_or("literal")));
        break;
      case SourceKind::canonical_json: {
        ProfileFrame pf = read_canonical(std::get<std::filesystem::path>(source.data));
        if (source.exec_id && *source.exec_id != pf.exec_id())
          pf = ProfileFrame(pf.graph_ptr(), pf.table(), *source.exec_id,
                            pf.default_metric());
        frames.push_back(std::move(pf));
        break;
      }
      case SourceKind::unknown:
        throw UnknownFormat(
            i, "unrecognized profile format: " +
                   std::get<std::filesystem::path>(source.data).string());
    }
  }
  return frames;
}

// ---------------------------------------------------------------------------
// canonical writer

namespace {

ordered_json frame_to_json(const Frame& frame) {
  ordered_json out;
  out["name"] = frame.name;
  if (frame.file) out["file"] = *frame.file;
  if (frame.line) out["line"] = *frame.line;
  return out;
}

ordered_json node_to_json(const ProfileFrame& pf, NodeId id) {
  ordered_json out;
  out["frame"] = frame_to_json(pf.graph().frame(id));
  ordered_json metrics = ordered_json::object();
  for (const auto& name : pf.metric_names()) {
    bool any = false;
    ordered_json arr = ordered_json::array();
    for (int r = 0; r < pf.num_ranks(); ++r) {
      auto v = pf.table().cell(name, id, r);
      if (v) {
        arr.push_back(*v);
        any = true;
      } else {
        arr.push_back(nullptr);
      }
    }
    if (any) metrics[name] = std::move(arr);  // all-null columns are implied
  }
  if (!metrics.empty()) out["metrics"] = std::move(metrics);
  auto kids = pf.graph().children(id);
  if (!kids.empty()) {
    ordered_json children = ordered_json::array();
    for (NodeId child : kids) children.push_back(node_to_json(pf, child));
    out["children"] = std::move(children);
  }
  return out;
}

}  // namespace

nlohmann::ordered_json canonical_json(const ProfileFrame& pf) {
  if (!pf.graph().is_cct())
    throw NotATree("only calling context trees fit the canonical schema");
  ordered_json doc;
  doc["schema"] = kSchemaTag;
  doc["exec_id"] = pf.exec_id();
  doc["ranks"] = pf.num_ranks();
  doc["metrics"] = pf.metric_names();
  ordered_json roots = ordered_json::array();
  for (NodeId root : pf.graph().roots())
    roots.push_back(node_to_json(pf, root));
  doc["roots"] = std::move(roots);
  return doc;
}

std::string write_canonical(const ProfileFrame& pf) {
  return canonical_json(pf).dump(2) + "\n";
}

}  // namespace chopper
