#ifndef N3POM_ERRORS_HPP
#define N3POM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace n3pom {

/// Argument outside the response interval or a dimension mismatch.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration (bad flags, eta too small, inconsistent shapes).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File or parse failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or an invalid state reached during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace n3pom

#endif  // N3POM_ERRORS_HPP
