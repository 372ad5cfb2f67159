#pragma once

#include <stdexcept>
#include <string>

namespace guru {

// Argument outside the mathematical domain of a function (p outside (0,1),
// non-positive perspective scale, conjugate evaluated off its domain).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Shape mismatch between a model and a sample.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent dataset, file or model content.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training or refinement could not proceed (bad config, non-finite objective).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace guru
