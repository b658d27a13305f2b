/**
 * @file error.hpp
 * @brief Exception types shared by every streamgov module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace streamgov {

/// Malformed or inconsistent input data (bad flow value, date mismatch, degenerate series).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed result broke one of its documented invariants.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace streamgov
