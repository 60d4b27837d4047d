#pragma once

#include <stdexcept>
#include <string>

namespace symbolact {

// Base for everything this library throws on purpose. Callers that need to
// tell failure families apart catch the subtypes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad value handed in by a caller (empty text, unknown conclusion, ...).
class InputError : public Error {
  using Error::Error;
};

// Malformed file content (wrong schema, bad version, dangling ids on load).
class FormatError : public Error {
  using Error::Error;
};

// Oracle response that could not be turned into the expected payload.
// Keeps the raw response so the caller can log or retry.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Scripted-table or replay-cache lookup had no entry for the request.
class OracleMissError : public Error {
  using Error::Error;
};

// HTTP transport gave up after its retry budget.
class TransportError : public Error {
  using Error::Error;
};

// A scoring backend has no evidence for an (image, statement) pair.
class CoverageError : public Error {
  using Error::Error;
};

// Rule with the same premise set and conclusion already exists.
class DuplicateRuleError : public Error {
 public:
  DuplicateRuleError(const std::string& what, int existing_id)
      : Error(what), existing_id_(existing_id) {}
  int existing_id() const { return existing_id_; }

 private:
  int existing_id_;
};

}  // namespace symbolact
