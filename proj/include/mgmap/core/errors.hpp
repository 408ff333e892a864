#pragma once

#include <stdexcept>
#include <string>

namespace mgmap {

// Error taxonomy mirrored by the CLI exit codes:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.
// Everything else (shape/domain/generation/planning) is a programming or
// data-regime failure and maps to 2 when it escapes to the CLI.

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlanningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mgmap
