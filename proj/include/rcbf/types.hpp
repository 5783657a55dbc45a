#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace rcbf {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when the direction L_g~h vanishes and a worst case is undefined.
class DegenerateGradient : public std::domain_error {
 public:
  explicit DegenerateGradient(const std::string& what) : std::domain_error(what) {}
};

// Raised when a model or barrier callable produces NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value. `field` is the dotted key, e.g. "uncertainty.design_theta";
// `line` is the 1-based source line when the value came from a file, 0 otherwise.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0)
      : std::invalid_argument(format(field, message, line)),
        field_(std::move(field)),
        message_(message),
        line_(line) {}

  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& message, int line) {
    std::string out = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    if (!field.empty()) out += field + ": ";
    return out + message;
  }

  std::string field_;
  std::string message_;
  int line_ = 0;
};

}  // namespace rcbf
