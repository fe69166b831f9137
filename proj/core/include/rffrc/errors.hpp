#pragma once

#include <stdexcept>
#include <string>

namespace rffrc {

/// Invalid user-supplied configuration: bad dimensions, out-of-range
/// hyperparameters, malformed option values.  The CLI maps this to
/// exit code 2.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during computation: integrator divergence,
/// non-finite state, a linear solve that cannot reach the required
/// residual.  The CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem and serialization failures: unreadable files, malformed
/// CSV, checksum or version mismatch in a model container.  The CLI
/// maps this to exit code 4.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rffrc
