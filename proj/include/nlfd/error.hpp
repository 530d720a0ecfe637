#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlfd {

enum class ErrorCode {
  invalid_argument = 1,
  singular_point,
  degenerate_ball,
  grid_mismatch,
  no_barenblatt,
  newton_failure,
  scheme_violation,
  config_error,
  io_error,
  not_applicable,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration failure carrying every validation message, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> messages);

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  std::vector<std::string> messages_;
};

}  // namespace nlfd
