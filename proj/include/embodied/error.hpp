#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace embodied {

/// Base for every error the runtime reports. `code()` is a stable
/// identifier ("InvalidTransition", "BadChecksum", ...) that also appears in
/// service error bodies and CLI output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace embodied
