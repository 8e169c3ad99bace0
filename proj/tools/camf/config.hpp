#pragma once

// Run configuration for the command-line front end.
//
// File format: one `key = value` per line, '#' starts a comment, blank
// lines ignored. Every key can also be given as a flag (`--key value`,
// underscores written as dashes). Precedence: flags > file > defaults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camf/errors.hpp"
#include "camf/types.hpp"

namespace camf::cli {

class ConfigParse : public Error {
 public:
  ConfigParse(const std::string& what, std::size_t line)
      : Error(line ? "config line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownKey : public Error {
 public:
  UnknownKey(std::string key, std::size_t line)
      : Error("unknown config key \"" + key + "\"" +
              (line ? " (line " + std::to_string(line) + ")" : std::string())),
        key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct Settings {
  PipelineConfig pipeline;
  std::string backend = "live";
  std::string cache_dir;  // empty: no cache
  double timeout_seconds = 120.0;
  int max_attempts = 3;
  std::string prompt_dir;  // empty: built-in templates
  std::uint64_t seed = 0;
  std::size_t limit_per_class = 0;  // 0: whole corpus
};

/// Every recognised key, in documentation order.
const std::vector<std::string_view>& config_keys();

/// Sets one key. Throws UnknownKey or ConfigParse (`line` is 0 for flags).
void apply_setting(Settings& s, std::string_view key, std::string_view value, std::size_t line = 0);

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Entries in file order. Throws ConfigParse / UnknownKey.
std::vector<ConfigEntry> parse_config_text(std::string_view text);

/// Defaults, then `file` (if any), then `overrides` in order. Validates the
/// result (PreconditionError on out-of-range values).
Settings load_config(const std::optional<std::filesystem::path>& file,
                     const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// The resolved settings as `key = value` lines, loadable by load_config.
std::string render_config(const Settings& s);

}  // namespace camf::cli
