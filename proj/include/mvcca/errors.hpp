#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvcca {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or construction parameter lies outside its domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Matrix or subspace shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite input reached a decomposition.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A covariance eigenvalue fell below the whitening floor.
class NearSingularError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// Target canonical spectra admit no per-view gains in (0,1).
class InfeasibleSpectrumError : public Error {
 public:
  InfeasibleSpectrumError(const std::string& what, std::size_t view, std::size_t mode)
      : Error(what), view_(view), mode_(mode) {}
  std::size_t view() const noexcept { return view_; }
  std::size_t mode() const noexcept { return mode_; }

 private:
  std::size_t view_;
  std::size_t mode_;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Mode enumeration would exceed the combinatorial cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

class InversionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Observation-level moments disagree with source-level moments.
class WiringError : public Error {
 public:
  WiringError(const std::string& what, std::size_t view) : Error(what), view_(view) {}
  std::size_t view() const noexcept { return view_; }

 private:
  std::size_t view_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvcca
