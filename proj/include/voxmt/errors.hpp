#pragma once

#include <stdexcept>
#include <string>

namespace voxmt {

// Bad external input (files, point data). CLI exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration or weight shapes. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Broken internal contract between pipeline stages.
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace voxmt
