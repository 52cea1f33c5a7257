#pragma once

#include <stdexcept>
#include <string>

namespace tubespec {

enum class ErrorKind {
  Config,
  Geometry,
  Parse,
  Budget,
  Numerical,
  BranchAmbiguity,
  SimplicityViolated,
  FitUnstable,
  OrderUncertain,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // 2 for bad input, 3 for numerical failures
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Config:
      case ErrorKind::Geometry:
      case ErrorKind::Parse:
        return 2;
      default:
        return 3;
    }
  }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind);

}  // namespace tubespec
