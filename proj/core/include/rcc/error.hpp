#pragma once

#include <stdexcept>
#include <string>

namespace rcc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Segmentation found no foreground component to box.
class NoObjectError : public Error {
 public:
  NoObjectError() : Error("no foreground object found") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

enum class PpmErrorKind { kMalformedHeader, kBadMaxval, kTruncated };

class PpmError : public Error {
 public:
  PpmError(PpmErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  PpmErrorKind kind() const noexcept { return kind_; }

 private:
  PpmErrorKind kind_;
};

enum class CheckpointErrorKind { kBadMagic, kBadVersion, kTruncated, kMalformed };

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  CheckpointErrorKind kind() const noexcept { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

}  // namespace rcc
