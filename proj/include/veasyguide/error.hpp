#pragma once

#include <stdexcept>
#include <string>

namespace veasyguide {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input bytes match none of the supported container formats.
class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

/// An image directory without a usable `meta.json`.
class MissingMeta : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptySource : public Error {
 public:
  using Error::Error;
};

/// Hu signature requested for a region with no set pixels.
class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

/// A manifest or ground-truth document failed validation. `path()` names the
/// offending field, e.g. `activities[3].end_ms`.
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ScriptInvalid : public Error {
 public:
  using Error::Error;
};

class TimelineMismatch : public Error {
 public:
  using Error::Error;
};

/// A configuration value outside its documented range. `flag()` is the CLI
/// spelling of the parameter.
class InvalidParameter : public Error {
 public:
  InvalidParameter(std::string flag, const std::string& what)
      : Error(flag + ": " + what), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

}  // namespace veasyguide
