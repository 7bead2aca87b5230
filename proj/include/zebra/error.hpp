#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace zebra {

// Base of every error the library throws. `code()` is the machine-readable
// token that also appears in HTTP error bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Document is not shaped like the schema (missing/unknown key, wrong type).
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& detail) : Error("schema", detail) {}
};

// Raw capture could not be parsed; `line()` is 1-based, 0 when not tied to a line.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& reason)
      : Error("format", line == 0 ? reason : "line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Rows of a raw capture disagree on the bin count.
class InconsistencyError : public Error {
 public:
  InconsistencyError(std::size_t line, const std::string& reason)
      : Error("inconsistent", "line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A value outside the domain an operation accepts (bad radius, bad plan, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& detail) : Error("precondition", detail) {}
};

class OutOfRangeError : public Error {
 public:
  OutOfRangeError(std::size_t index, const std::string& detail)
      : Error("out-of-range", detail), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class EmptyJourneyError : public Error {
 public:
  EmptyJourneyError() : Error("empty-journey", "journey has no sweeps") {}
};

class EmptyChannelError : public Error {
 public:
  explicit EmptyChannelError(std::size_t channel)
      : Error("empty-channel",
              "channel " + std::to_string(channel) + " contains no bin centre"),
        channel_(channel) {}

  std::size_t channel() const noexcept { return channel_; }

 private:
  std::size_t channel_;
};

class DegenerateBandError : public Error {
 public:
  explicit DegenerateBandError(const std::string& detail) : Error("degenerate-band", detail) {}
};

class PlanMismatchError : public Error {
 public:
  explicit PlanMismatchError(const std::string& detail) : Error("plan-mismatch", detail) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& id) : Error("unknown-id", "no journey with id " + id) {}
};

class StorageError : public Error {
 public:
  explicit StorageError(const std::string& detail) : Error("storage", detail) {}
};

class FilterError : public Error {
 public:
  explicit FilterError(const std::string& detail) : Error("malformed-filter", detail) {}
};

// Network-level failure talking to a peer tier. Always safe to retry.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& detail) : Error("transport", detail) {}

  bool retryable() const noexcept { return true; }
};

// The peer answered but refused the request.
class RejectionError : public Error {
 public:
  RejectionError(int status, const std::string& reason)
      : Error("rejected", reason), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace zebra
