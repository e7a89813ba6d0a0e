// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ndl {

/// Base class for every error raised by the library. The C API maps each
/// subclass onto one `ndl_status` code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain (non-finite input,
/// non-unit vector where a unit vector is required, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An index or order exceeds a supported bound.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this object (e.g. σ'' of ReLU).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration (aliasing guard, bad step size, unknown id).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ndl
