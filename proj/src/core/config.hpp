#pragma once

// Run configuration: a flat key = value text file (TOML-style scalars, tuples
// written as {a, b, c}) plus programmatic overrides.

#include "design_field.hpp"
#include "optimizer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bucktop {

struct RunConfig {
  std::string preset = "column";
  int nelx = 240;
  int nely = 120;
  double lx = 2.0;
  std::string output_dir = "out";
  std::string x0;  // checkpoint path, empty for the default start
  int maxit = 300;
  int image_every = 0;
  bool write_images = true;
  OptimizerSettings settings;
};

/// Ordered key/value store with validation against the known key set.
class ConfigMap {
 public:
  ConfigMap();

  /// Reads a file; later keys override earlier ones. Throws ConfigError/IoError.
  void load_file(const std::filesystem::path& path);
  /// Parses file-format text (used by load_file and tests).
  void load_string(const std::string& text, const std::string& origin = "<string>");
  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;

  /// Typed view with every value validated. Throws ConfigError.
  RunConfig resolve() const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

/// Parses "{a, b, c}" (braces optional) into numbers. Throws ConfigError.
std::vector<double> parse_tuple(const std::string& text, const std::string& key);

/// Continuation schedule from a 4-tuple {istart, max, isteps, delta}.
ContinuationSchedule parse_schedule(const std::string& text, const std::string& key);

}  // namespace bucktop
