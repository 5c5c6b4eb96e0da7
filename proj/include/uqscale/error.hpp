#ifndef UQSCALE_ERROR_HPP
#define UQSCALE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace uqscale {

/// Failure category, mapped to process exit codes by the CLI.
enum class ErrorKind {
  config,     // invalid configuration or inputs (exit 2)
  model,      // model evaluation failed (exit 3)
  estimator,  // estimator or optimizer failed (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& what) { return Error(ErrorKind::config, what); }
inline Error model_error(const std::string& what) { return Error(ErrorKind::model, what); }
inline Error estimator_error(const std::string& what) { return Error(ErrorKind::estimator, what); }

}  // namespace uqscale

#endif
