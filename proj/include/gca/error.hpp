#pragma once

#include <stdexcept>
#include <string>

namespace gca {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// process exit codes: data-shaped problems exit 2, configuration problems 3,
// numeric failures 4.
enum class ErrorKind {
  Data,        // malformed input data, empty sequences, unusable datasets
  Config,      // invalid configuration or hyperparameters
  Dimension,   // shape mismatch between tensors
  Index,       // out-of-range id or position
  Numeric,     // NaN/overflow or a failed numeric check
  Capability,  // operation not available for the current mode
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Data:
      case ErrorKind::Index:
        return 2;
      case ErrorKind::Config:
      case ErrorKind::Dimension:
      case ErrorKind::Capability:
        return 3;
      case ErrorKind::Numeric:
        return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_data(const std::string& msg) {
  throw Error(ErrorKind::Data, msg);
}
[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorKind::Config, msg);
}
[[noreturn]] inline void throw_dimension(const std::string& msg) {
  throw Error(ErrorKind::Dimension, msg);
}
[[noreturn]] inline void throw_index(const std::string& msg) {
  throw Error(ErrorKind::Index, msg);
}
[[noreturn]] inline void throw_numeric(const std::string& msg) {
  throw Error(ErrorKind::Numeric, msg);
}
[[noreturn]] inline void throw_capability(const std::string& msg) {
  throw Error(ErrorKind::Capability, msg);
}

}  // namespace gca
