#include "roughhedge/mathkit/warnings.hpp"

#include <iostream>
#include <mutex>

namespace roughhedge {

namespace {
std::mutex& handler_mutex() {
  static std::mutex mu;
  return mu;
}
WarningHandler& handler_slot() {
  static WarningHandler h;
  return h;
}
}  // namespace

void emit_warning(const std::string& message) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  if (handler_slot())
    handler_slot()(message);
  else
    std::cerr << "warning: " << message << '\n';
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  WarningHandler prev = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return prev;
}

}  // namespace roughhedge
