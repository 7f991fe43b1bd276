#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratt {

enum class ErrorKind {
  invalid_input,
  invalid_argument,
  invalid_config,
  invalid_state,
  not_found,
  structure,
  degenerate_vector,
  index_corruption,
  provider_unavailable,
  provider_protocol,
  script_mismatch,
  schema,
  io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (and tests) can branch on the category instead of the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ratt
