#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>

namespace camf {

/// Root of every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class EmptyText : public PreconditionError {
 public:
  EmptyText() : PreconditionError("input text is empty after trimming") {}
};

class UnboundPlaceholder : public Error {
 public:
  explicit UnboundPlaceholder(const std::string& name)
      : Error("unbound template placeholder {{" + name + "}}"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A JSON document did not match the expected schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Gateway errors
// ---------------------------------------------------------------------------

class GatewayError : public Error {
 public:
  using Error::Error;
};

class AuthError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RateLimited : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Connection failures, timeouts, 5xx after retries and non-retryable HTTP
/// statuses. `status()` is 0 when no HTTP response was received.
class TransportError : public GatewayError {
 public:
  explicit TransportError(const std::string& what, int status = 0)
      : GatewayError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class MalformedResponse : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// The cassette has no entry for the request key. Usually means a prompt
/// template or the pipeline changed since recording.
class ReplayMiss : public GatewayError {
 public:
  explicit ReplayMiss(const std::string& key)
      : GatewayError("replay miss for key " + key), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// ---------------------------------------------------------------------------
// Corpus errors
// ---------------------------------------------------------------------------

class CorpusError : public Error {
 public:
  CorpusError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  /// 1-based line number, or 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public CorpusError {
 public:
  using CorpusError::CorpusError;
};

class DuplicateId : public CorpusError {
 public:
  using CorpusError::CorpusError;
};

class InvalidLabel : public CorpusError {
 public:
  using CorpusError::CorpusError;
};

class EmptyCorpus : public CorpusError {
 public:
  explicit EmptyCorpus(const std::string& what) : CorpusError(what, 0) {}
};

// ---------------------------------------------------------------------------
// Metrics errors
// ---------------------------------------------------------------------------

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Wraps whatever went wrong while processing one sample. The original
/// exception is kept so callers can inspect its dynamic type.
class SampleFailed : public Error {
 public:
  SampleFailed(std::string sample_id, std::string stage, const std::string& cause_message,
               std::exception_ptr cause)
      : Error("sample '" + sample_id + "' failed in " + stage + ": " + cause_message),
        sample_id_(std::move(sample_id)),
        stage_(std::move(stage)),
        cause_(std::move(cause)) {}

  const std::string& sample_id() const noexcept { return sample_id_; }
  const std::string& stage() const noexcept { return stage_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::string sample_id_;
  std::string stage_;
  std::exception_ptr cause_;
};

}  // namespace camf
