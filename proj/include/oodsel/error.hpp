#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace oodsel {

// Rejected input: malformed files, violated preconditions, bad arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated on-disk data.
class FormatError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Failure while computing or writing results.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(const std::string&)>;

// Installs a process-wide sink for non-fatal warnings and returns the previous
// one. The default writes "warning: <msg>" lines to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace oodsel
