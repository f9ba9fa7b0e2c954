#pragma once

#include <stdexcept>
#include <string>

namespace entropy_cpd {

// Malformed or unusable input data (files, series, labels). CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical method was asked to operate outside its validity window
// (e.g. a bound evaluated below its admissible x, an unreachable level,
// a zero reference probability). CLI exit code 4.
class ValidityError : public std::runtime_error {
 public:
  explicit ValidityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace entropy_cpd
