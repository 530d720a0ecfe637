#include "nlfd/error.hpp"

namespace nlfd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::singular_point: return "singular_point";
    case ErrorCode::degenerate_ball: return "degenerate_ball";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::no_barenblatt: return "no_barenblatt";
    case ErrorCode::newton_failure: return "newton_failure";
    case ErrorCode::scheme_violation: return "scheme_violation";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::not_applicable: return "not_applicable";
  }
  return "unknown";
}

namespace {

std::string join_messages(const std::vector<std::string>& messages) {
  std::string out = "invalid configuration";
  for (const auto& m : messages) {
    out += "\n  - ";
    out += m;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : Error(ErrorCode::config_error, join_messages(messages)), messages_(std::move(messages)) {}

}  // namespace nlfd
