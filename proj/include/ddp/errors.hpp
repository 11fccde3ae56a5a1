#pragma once

#include <stdexcept>
#include <string>

namespace ddp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Container format errors.
class IoError : public Error {
 public:
  using Error::Error;
};

class MagicError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedError : public IoError {
 public:
  using IoError::IoError;
};

class DTypeError : public IoError {
 public:
  using IoError::IoError;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class ArchMismatch : public IoError {
 public:
  using IoError::IoError;
};

class CenterTooWide : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace ddp
