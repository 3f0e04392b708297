#include "log.hpp"

#include <iostream>
#include <mutex>

namespace bucktop::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](Level level, const std::string& msg) {
    std::cerr << (level == Level::Warning ? "[warning] " : "[info] ") << msg << '\n';
  };
  return sink;
}

void emit(Level level, const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(sink);
}

void info(const std::string& message) { emit(Level::Info, message); }
void warning(const std::string& message) { emit(Level::Warning, message); }

}  // namespace bucktop::log
