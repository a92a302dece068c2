#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "chopper/profile_frame.hpp"

namespace chopper {

/// One node of an in-memory literal profile, the quick way to build small
/// trees in tests and examples. Every node names a frame and carries
/// per-rank metric arrays; all arrays in a literal must agree on length.
struct LiteralNode {
  Frame frame;
  std::map<std::string, std::vector<std::optional<double>>> metrics;
  std::vector<LiteralNode> children;
};

using Literal = std::vector<LiteralNode>;  // forest, one entry per root

/// What detection concluded about a source.
enum class SourceKind { unknown, canonical_json, literal };

/// A profile to ingest: either a path to a canonical JSON document or an
/// in-memory literal tree. `exec_id` overrides the execution identifier
/// (default: document's exec_id, then the file stem).
struct ProfileSource {
  std::variant<std::filesystem::path, Literal> data;
  std::optional<std::string> exec_id;
  SourceKind detected_kind = SourceKind::unknown;

  ProfileSource(std::filesystem::path path) : data(std::move(path)) {}
  ProfileSource(Literal literal) : data(std::move(literal)) {}
  ProfileSource(std::filesystem::path path, std::string id)
      : data(std::move(path)), exec_id(std::move(id)) {}
  ProfileSource(Literal literal, std::string id)
      : data(std::move(literal)), exec_id(std::move(id)) {}
};

/// Reads one canonical "chopper-profile-v1" JSON document.
/// Node order in the result matches document order. Malformed JSON raises
/// ParseError; any schema violation raises SchemaError naming the
/// offending element.
ProfileFrame read_canonical(const std::filesystem::path& path);

/// Same, from an already-loaded buffer. `origin` seeds the default
/// exec_id and error messages.
ProfileFrame read_canonical_text(const std::string& text,
                                 const std::string& origin = "<memory>");

/// Builds a ProfileFrame from a literal forest. Rank count is inferred
/// from the metric arrays; inconsistent lengths, empty names, or a literal
/// with no metric data at all raise SchemaError.
ProfileFrame from_literal(const Literal& literal,
                          const std::string& exec_id = "literal");

/// Batch loader: one ProfileFrame per source, order preserved, or nothing.
/// Detection looks at the file extension first, then the document's schema
/// tag; a source that fails detection aborts the whole batch with
/// UnknownFormat carrying its index.
std::vector<ProfileFrame> construct_from(std::vector<ProfileSource> sources);

/// Detection only; pure function of the source's bytes and extension.
SourceKind detect_kind(const ProfileSource& source);

/// Serializes to the canonical schema (the inverse of read_canonical).
/// Only forests can be nested into the schema, so merged graphs are
/// rejected with NotATree.
std::string write_canonical(const ProfileFrame& pf);

/// The canonical document as a JSON value rather than text.
nlohmann::ordered_json canonical_json(const ProfileFrame& pf);

}  // namespace chopper
