#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace omramsey {

/// A value outside the domain of a formula (negative power, non-positive step, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One or more violated construction invariants. `clauses()` lists each one.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> clauses)
      : std::invalid_argument(join(clauses)), clauses_(std::move(clauses)) {}

  const std::vector<std::string>& clauses() const noexcept { return clauses_; }

 private:
  static std::string join(const std::vector<std::string>& clauses) {
    std::string out = "invalid configuration:";
    for (const auto& c : clauses) {
      out += "\n  - ";
      out += c;
    }
    return out;
  }

  std::vector<std::string> clauses_;
};

}  // namespace omramsey
