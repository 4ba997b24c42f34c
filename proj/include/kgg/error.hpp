#pragma once

#include <stdexcept>
#include <string>

namespace kgg {

// Base for every error the library raises. `code()` is a stable,
// machine-readable identifier used by the CLI and HTTP error payloads.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace kgg
