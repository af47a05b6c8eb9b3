#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rpmixl {

/// Malformed or semantically invalid model specification document.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string key_path, const std::string& message)
      : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// Input data failed validation. Row is 1-based over data lines (header excluded), 0 when not row-specific.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::size_t row = 0, std::string column = {})
      : std::runtime_error(message), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Both the Hessian and BHHH information matrices were singular.
class SingularCovarianceError : public EstimationError {
 public:
  SingularCovarianceError(const std::string& message, std::vector<double> direction)
      : EstimationError(message), direction_(std::move(direction)) {}

  /// Unit vector spanning the (near) null space of the information matrix.
  const std::vector<double>& direction() const noexcept { return direction_; }

 private:
  std::vector<double> direction_;
};

}  // namespace rpmixl
