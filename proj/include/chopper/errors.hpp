#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chopper {

/// Base class for every error chopper raises on bad input or bad usage.
/// Anything else escaping the library is a genuine bug.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A metric name that is not a column of the profile's table.
class UnknownMetric : public Error {
 public:
  explicit UnknownMetric(const std::string& metric)
      : Error("unknown metric: " + metric), metric_(metric) {}
  UnknownMetric(const std::string& metric, const std::string& run)
      : Error("unknown metric: " + metric + " (in run " + run + ")"),
        metric_(metric) {}
  const std::string& metric() const { return metric_; }

 private:
  std::string metric_;
};

/// A node id outside the graph.
class UnknownNode : public Error {
 public:
  explicit UnknownNode(const std::string& msg) : Error(msg) {}
};

/// An operation that requires a calling context tree was handed a merged
/// (or otherwise non-forest) graph.
class NotATree : public Error {
 public:
  explicit NotATree(const std::string& msg) : Error(msg) {}
};

/// Input bytes are not valid JSON.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Valid JSON that violates the canonical profile schema. `path()` points
/// at the offending element, JSON-pointer style.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& msg)
      : Error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A source whose format could not be detected. `index()` is the position
/// in the construct_from() source list.
class UnknownFormat : public Error {
 public:
  UnknownFormat(std::size_t index, const std::string& msg)
      : Error("source " + std::to_string(index) + ": " + msg), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A threshold or fraction outside its documented range.
class InvalidThreshold : public Error {
 public:
  explicit InvalidThreshold(const std::string& msg) : Error(msg) {}
};

/// Too few non-null observations to compute a statistic.
class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

/// A regression whose predictor has zero variance.
class DegenerateFit : public Error {
 public:
  explicit DegenerateFit(const std::string& msg) : Error(msg) {}
};

/// A multi-run operation called with the wrong number or shape of runs.
class InvalidArity : public Error {
 public:
  explicit InvalidArity(const std::string& msg) : Error(msg) {}
};

/// A flag combination the analysis rejects (e.g. weak-scaling speedup).
class UnsupportedCombination : public Error {
 public:
  explicit UnsupportedCombination(const std::string& msg) : Error(msg) {}
};

}  // namespace chopper
