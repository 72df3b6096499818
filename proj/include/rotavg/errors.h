#pragma once

#include <stdexcept>
#include <string>

namespace rotavg {

// Base class for every error raised by the toolkit. `kind()` is the stable
// machine-readable tag reported by the command line tool.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error("parse", "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

class DuplicateEdge : public Error {
 public:
  explicit DuplicateEdge(const std::string& message)
      : Error("duplicate_edge", message) {}
};

class NonUnitQuaternion : public Error {
 public:
  explicit NonUnitQuaternion(const std::string& message)
      : Error("non_unit_quaternion", message) {}
};

class NearPiAmbiguity : public Error {
 public:
  explicit NearPiAmbiguity(const std::string& message)
      : Error("near_pi_ambiguity", message) {}
};

class NoValidSeed : public Error {
 public:
  explicit NoValidSeed(const std::string& message)
      : Error("no_valid_seed", message) {}
};

class EmptyFrontier : public Error {
 public:
  explicit EmptyFrontier(const std::string& message)
      : Error("empty_frontier", message) {}
};

class Stalled : public Error {
 public:
  explicit Stalled(const std::string& message) : Error("stalled", message) {}
};

class TooLarge : public Error {
 public:
  explicit TooLarge(const std::string& message) : Error("too_large", message) {}
};

class NoAlignmentPath : public Error {
 public:
  explicit NoAlignmentPath(const std::string& message)
      : Error("no_alignment_path", message) {}
};

class EmptyIntersection : public Error {
 public:
  explicit EmptyIntersection(const std::string& message)
      : Error("empty_intersection", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

}  // namespace rotavg
