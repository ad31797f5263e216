#pragma once

#include <stdexcept>
#include <string>

namespace eqlift {

/// Point or path outside every chart of the atlas.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Chart-overlap data that disagrees beyond tolerance.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step doubling changed a result by more than the accuracy budget.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The monodromy system has no solution: the input class is not integral.
class IntegralityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A kernel lattice direction (null-homologous orbit) has nontrivial monodromy.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace eqlift
