#ifndef DQPT_ERRORS_HPP
#define DQPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dqpt {

// Bad input: out-of-range sizes, mismatched bases, invalid parameters.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical invariant broke (norm drift, trace drift, positivity, NaN,
// failed eigensolver convergence, unreachable tolerance).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A configured size or cost cap would be exceeded.
class ResourceCapError : public std::runtime_error {
 public:
  explicit ResourceCapError(const std::string& what) : std::runtime_error(what) {}
};

// Process exit codes used by the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitResource = 4,
};

}  // namespace dqpt

#endif  // DQPT_ERRORS_HPP
