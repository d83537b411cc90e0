#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autokg {

// Base of every error thrown by the library. Callers that only need a message
// can catch this; the subclasses carry the structured context.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class NonPositiveLambda : public Error {
public:
    explicit NonPositiveLambda(double lambda)
        : Error("lambda_max must be positive, got " + std::to_string(lambda)) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

class StopwordFileMissing : public IoError {
public:
    explicit StopwordFileMissing(const std::string& path)
        : IoError("stopword file not found: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Raised when a JSON document does not match the expected schema. `field`
// is a JSON-pointer-like path to the offending element.
class SchemaViolation : public Error {
public:
    SchemaViolation(std::string field, const std::string& what)
        : Error("schema violation at " + (field.empty() ? std::string("/") : field) + ": " + what),
          field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class Timeout : public Error {
public:
    using Error::Error;
};

class HttpStatus : public Error {
public:
    HttpStatus(int code, int attempts)
        : Error("HTTP status " + std::to_string(code) + " after " + std::to_string(attempts) + " attempt(s)"),
          code_(code), attempts_(attempts) {}
    int code() const noexcept { return code_; }
    int attempts() const noexcept { return attempts_; }

private:
    int code_;
    int attempts_;
};

// Connection refused, DNS failure and similar transport-level problems.
class TransportError : public Error {
public:
    using Error::Error;
};

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_no, const std::string& why)
        : Error("malformed line " + std::to_string(line_no) + ": " + why), line_no_(line_no) {}
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotEnoughNonEdges : public Error {
public:
    NotEnoughNonEdges(std::size_t requested, std::size_t available)
        : Error("requested " + std::to_string(requested) + " non-edges but only " +
                std::to_string(available) + " exist"),
          requested_(requested), available_(available) {}
    std::size_t requested() const noexcept { return requested_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t requested_;
    std::size_t available_;
};

class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(int stage, std::size_t epoch, double value)
        : Error("non-finite loss " + std::to_string(value) + " in stage " + std::to_string(stage) +
                " at epoch " + std::to_string(epoch)),
          stage_(stage), epoch_(epoch) {}
    int stage() const noexcept { return stage_; }
    std::size_t epoch() const noexcept { return epoch_; }

private:
    int stage_;
    std::size_t epoch_;
};

class EmptyEdgeSet : public Error {
public:
    EmptyEdgeSet() : Error("graph has no edges") {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Wraps an error raised inside one pipeline stage so the stage name survives.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace autokg
