#pragma once

#include <functional>
#include <string>

namespace bucktop::log {

enum class Level { Info, Warning };

using Sink = std::function<void(Level, const std::string&)>;

// Replaces the process-wide sink. Passing an empty function silences output.
void set_sink(Sink sink);

void info(const std::string& message);
void warning(const std::string& message);

}  // namespace bucktop::log
