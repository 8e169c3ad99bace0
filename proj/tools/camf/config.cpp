#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace camf::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected,
                            std::size_t line) {
  throw ConfigParse("invalid value \"" + std::string(value) + "\" for " + std::string(key) +
                        " (expected " + std::string(expected) + ")",
                    line);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view expected,
               std::size_t line) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) bad_value(key, value, expected, line);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value, std::size_t line) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false", line);
}

using Setter = std::function<void(Settings&, std::string_view, std::string_view, std::size_t)>;

Setter int_field(int PipelineConfig::*field) {
  return [field](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
    s.pipeline.*field = parse_number<int>(k, v, "an integer", line);
  };
}

Setter bool_field(bool PipelineConfig::*field) {
  return [field](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
    s.pipeline.*field = parse_bool(k, v, line);
  };
}

const std::vector<std::pair<std::string_view, Setter>>& setters() {
  static const std::vector<std::pair<std::string_view, Setter>> table = {
      {"rounds", int_field(&PipelineConfig::rounds)},
      {"include_ls", bool_field(&PipelineConfig::include_ls)},
      {"include_sc", bool_field(&PipelineConfig::include_sc)},
      {"include_rl", bool_field(&PipelineConfig::include_rl)},
      {"enable_probing", bool_field(&PipelineConfig::enable_probing)},
      {"enable_judge", bool_field(&PipelineConfig::enable_judge)},
      {"model",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         if (v.empty()) bad_value(k, v, "a model id", line);
         s.pipeline.model_id = std::string(v);
       }},
      {"temperature",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         s.pipeline.sampling.temperature = parse_number<double>(k, v, "a number", line);
       }},
      {"top_p",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         s.pipeline.sampling.top_p = parse_number<double>(k, v, "a number", line);
       }},
      {"max_tokens",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         s.pipeline.sampling.max_tokens = parse_number<int>(k, v, "an integer", line);
       }},
      {"concurrency", int_field(&PipelineConfig::concurrency_limit)},
      {"parse_retry_limit", int_field(&PipelineConfig::parse_retry_limit)},
      {"concurrent_profiling", bool_field(&PipelineConfig::concurrent_profiling)},
      {"text_char_budget",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         s.pipeline.text_char_budget = parse_number<std::size_t>(k, v, "a count", line);
       }},
      {"backend",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         if (v.empty()) bad_value(k, v, "a backend selector", line);
         s.backend = std::string(v);
       }},
      {"cache_dir",
       [](Settings& s, std::string_view, std::string_view v, std::size_t) {
         s.cache_dir = std::string(v);
       }},
      {"timeout_seconds",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         const auto t = parse_number<double>(k, v, "a number of seconds", line);
         if (!(t > 0)) bad_value(k, v, "a positive number of seconds", line);
         s.timeout_seconds = t;
       }},
      {"max_attempts",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         const auto n = parse_number<int>(k, v, "an integer", line);
         if (n < 1) bad_value(k, v, "an integer >= 1", line);
         s.max_attempts = n;
       }},
      {"prompt_dir",
       [](Settings& s, std::string_view, std::string_view v, std::size_t) {
         s.prompt_dir = std::string(v);
       }},
      {"seed",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         s.seed = parse_number<std::uint64_t>(k, v, "an unsigned integer", line);
       }},
      {"limit_per_class",
       [](Settings& s, std::string_view k, std::string_view v, std::size_t line) {
         s.limit_per_class = parse_number<std::size_t>(k, v, "a count", line);
       }},
  };
  return table;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

void apply_setting(Settings& s, std::string_view key, std::string_view value, std::size_t line) {
  for (const auto& [k, set] : setters()) {
    if (k == key) {
      set(s, key, value, line);
      return;
    }
  }
  throw UnknownKey(std::string(key), line);
}

std::vector<ConfigEntry> parse_config_text(std::string_view text) {
  std::vector<ConfigEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParse("expected key = value", line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigParse("missing key before '='", line_no);
    const auto known = config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UnknownKey(std::string(key), line_no);
    }
    out.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

Settings load_config(const std::optional<std::filesystem::path>& file,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  Settings s;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ConfigParse("cannot read config file " + file->string(), 0);
    std::stringstream buffer;
    buffer << in.rdbuf();
    for (const auto& e : parse_config_text(buffer.str())) apply_setting(s, e.key, e.value, e.line);
  }
  for (const auto& [k, v] : overrides) apply_setting(s, k, v, 0);
  s.pipeline.validate();
  return s;
}

std::string render_config(const Settings& s) {
  const auto& p = s.pipeline;
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream out;
  out << "rounds = " << p.rounds << '\n'
      << "include_ls = " << b(p.include_ls) << '\n'
      << "include_sc = " << b(p.include_sc) << '\n'
      << "include_rl = " << b(p.include_rl) << '\n'
      << "enable_probing = " << b(p.enable_probing) << '\n'
      << "enable_judge = " << b(p.enable_judge) << '\n'
      << "model = " << p.model_id << '\n'
      << "temperature = " << format_double(p.sampling.temperature) << '\n'
      << "top_p = " << format_double(p.sampling.top_p) << '\n'
      << "max_tokens = " << p.sampling.max_tokens << '\n'
      << "concurrency = " << p.concurrency_limit << '\n'
      << "parse_retry_limit = " << p.parse_retry_limit << '\n'
      << "concurrent_profiling = " << b(p.concurrent_profiling) << '\n'
      << "text_char_budget = " << p.text_char_budget << '\n'
      << "backend = " << s.backend << '\n'
      << "cache_dir = " << s.cache_dir << '\n'
      << "timeout_seconds = " << format_double(s.timeout_seconds) << '\n'
      << "max_attempts = " << s.max_attempts << '\n'
      << "prompt_dir = " << s.prompt_dir << '\n'
      << "seed = " << s.seed << '\n'
      << "limit_per_class = " << s.limit_per_class << '\n';
  return out.str();
}

}  // namespace camf::cli
