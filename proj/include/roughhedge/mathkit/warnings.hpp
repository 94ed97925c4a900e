#pragma once

#include <functional>
#include <string>

namespace roughhedge {

using WarningHandler = std::function<void(const std::string&)>;

/// Routes a non-fatal diagnostic to the installed handler (stderr by default).
void emit_warning(const std::string& message);

/// Installs a handler and returns the previous one. Pass an empty function
/// to restore the default.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace roughhedge
