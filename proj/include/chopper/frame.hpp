#pragma once

#include <functional>
#include <optional>
#include <string>
#include <tuple>

namespace chopper {

/// Identity of a code location: a function/region name plus an optional
/// source file and line. Two frames are equal iff all present fields are
/// equal; a missing file or line is distinct from any present value.
struct Frame {
  std::string name;
  std::optional<std::string> file;
  std::optional<int> line;

  friend bool operator==(const Frame&, const Frame&) = default;

  bool operator<(const Frame& other) const {
    return std::tie(name, file, line) <
           std::tie(other.name, other.file, other.line);
  }

  /// "name" or "name (file:line)" depending on what is present.
  std::string label() const {
    if (!file && !line) return name;
    std::string out = name + " (";
    if (file) out += *file;
    if (line) out += (file ? ":" : "") + std::to_string(*line);
    return out + ")";
  }
};

struct FrameHash {
  std::size_t operator()(const Frame& f) const {
    std::size_t h = std::hash<std::string>{}(f.name);
    if (f.file) h ^= std::hash<std::string>{}(*f.file) + 0x9e3779b9 + (h << 6);
    if (f.line) h ^= std::hash<int>{}(*f.line) + 0x9e3779b9 + (h << 6);
    return h;
  }
};

}  // namespace chopper
