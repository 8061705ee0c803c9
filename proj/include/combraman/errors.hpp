#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace combraman {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OrderOutOfRange : public Error {
 public:
  using Error::Error;
};

class ArgumentOutOfRange : public Error {
 public:
  using Error::Error;
};

class TruncationInsufficient : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(const std::string& what, double t, double h)
      : Error(what), time_(t), step_(h) {}
  double time() const { return time_; }
  double step() const { return step_; }

 private:
  double time_;
  double step_;
};

class TrackingAmbiguous : public Error {
 public:
  TrackingAmbiguous(const std::string& what, double t) : Error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& msg)
      : Error("invalid " + field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class UnknownPreset : public Error {
 public:
  explicit UnknownPreset(const std::string& name) : Error("unknown preset '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

}  // namespace combraman
