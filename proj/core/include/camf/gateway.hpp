#pragma once

// Chat-completion gateway: one interface, several interchangeable backends.
//
//   LiveBackend       OpenAI-compatible HTTP endpoint with retry/backoff
//   ScriptedBackend   rule-driven canned responses
//   CountingBackend   per-agent call counters with minimal valid outputs
//   CachingBackend    content-addressed on-disk response cache (decorator)
//   CassetteRecorder  appends every exchange to a JSONL cassette (decorator)
//   ReplayBackend     serves responses from a cassette, never touches the network
//   TracingBackend    keeps an in-memory log of requests (decorator)
//
// Every backend is safe to call from many threads at once.

#include <array>
#include <atomic>
#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "camf/types.hpp"

namespace camf {

enum class Role : std::uint8_t { System, User, Assistant };

std::string_view to_string(Role role) noexcept;  // "system" / "user" / "assistant"

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  SamplingParams sampling;

  /// Throws PreconditionError if there are no messages or the first one is
  /// an assistant turn.
  void validate() const;

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct ChatResponse {
  std::string content;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  double latency_seconds = 0.0;
  bool from_cache = false;
};

struct CacheKey {
  std::string digest;  // 64 lowercase hex chars (SHA-256)

  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

/// The exact bytes that get hashed: compact JSON with sorted keys over the
/// model id, every message and the sampling parameters as sent on the wire
/// (top_p already clamped).
std::string canonical_request_json(const ChatRequest& request);

CacheKey cache_key(const ChatRequest& request);

/// Agent attribution from the "[AGENT:xx]" tag on the first line of the
/// first system message.
std::optional<AgentId> find_agent_tag(const ChatRequest& request) noexcept;

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Live HTTP backend
// ---------------------------------------------------------------------------

struct HttpResult {
  int status = 0;  // 0: no HTTP response (connect failure, timeout, ...)
  std::string body;
  std::string error;
};

/// Seam between LiveBackend and the network, so tests can substitute a
/// fake server or a stub that refuses to connect.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResult post(const std::string& url,
                          const std::vector<std::pair<std::string, std::string>>& headers,
                          const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib based transport. Supports http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_http_transport();

struct RetryPolicy {
  int max_attempts = 3;
  /// Base delay before retry k (1-based) is delays[k-1]; the last entry
  /// repeats if there are more retries than entries.
  std::vector<double> delays_seconds = {1.0, 2.0, 4.0};
  double jitter = 0.2;  // relative, uniformly drawn from [-jitter, +jitter]
};

struct LiveSettings {
  static constexpr const char* kDefaultBaseUrl = "https://api.openai.com/v1";

  std::string base_url = kDefaultBaseUrl;
  std::string api_key;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
  RetryPolicy retry;

  /// Reads CAMF_API_KEY (required, AuthError if unset) and CAMF_BASE_URL.
  static LiveSettings from_environment();
};

/// True for statuses worth retrying: no response, 429 and 5xx.
bool is_transient_status(int status) noexcept;

class LiveBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::duration<double>)>;

  LiveBackend(LiveSettings settings, std::shared_ptr<HttpTransport> transport,
              Sleeper sleeper = {}, std::uint64_t jitter_seed = 0x5eed);

  ChatResponse complete(const ChatRequest& request) override;

  /// Total HTTP attempts made so far, retries included.
  std::uint64_t attempts() const noexcept { return attempts_.load(); }

  /// Request body as sent to <base_url>/chat/completions.
  static std::string request_body(const ChatRequest& request);
  /// Parses choices[0].message.content and usage; MalformedResponse otherwise.
  static ChatResponse parse_response_body(const std::string& body);

 private:
  double backoff_seconds(int retry_number);

  LiveSettings settings_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  std::mutex rng_mutex_;
  std::uint64_t rng_state_;
  std::atomic<std::uint64_t> attempts_{0};
};

// ---------------------------------------------------------------------------
// Mocks
// ---------------------------------------------------------------------------

/// A rule fires when the request matches its agent (if set) and every
/// `contains` needle occurs somewhere in the concatenated message contents.
struct ScriptRule {
  std::optional<AgentId> agent;
  std::vector<std::string> contains;
  std::string response;
};

class ScriptedBackend final : public ChatBackend {
 public:
  /// Rules are tried in order; the first match wins. With no match the
  /// fallback is returned.
  explicit ScriptedBackend(std::vector<ScriptRule> rules, std::string fallback = "LEANING: UNCERTAIN");

  ChatResponse complete(const ChatRequest& request) override;
  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  std::vector<ScriptRule> rules_;
  std::string fallback_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Rules for a mock that behaves as a perfect detector on texts marked with
/// `sentinel`: every agent leans MACHINE iff the sentinel is visible in its
/// prompt, and machine-leaning answers repeat the sentinel so it propagates
/// into downstream prompts. The judge therefore echoes the profilers.
std::vector<ScriptRule> sentinel_oracle_rules(const std::string& sentinel);

class CountingBackend final : public ChatBackend {
 public:
  ChatResponse complete(const ChatRequest& request) override;

  std::uint64_t count(AgentId id) const noexcept;
  std::uint64_t untagged() const noexcept { return untagged_.load(); }
  std::uint64_t total() const noexcept;
  std::map<AgentId, std::uint64_t> snapshot() const;
  void reset() noexcept;

  /// Canned replies; each carries the trailer the agent's parser expects.
  static std::string canned_response(std::optional<AgentId> id);

 private:
  std::array<std::atomic<std::uint64_t>, 6> counts_{};
  std::atomic<std::uint64_t> untagged_{0};
};

// ---------------------------------------------------------------------------
// Decorators
// ---------------------------------------------------------------------------

/// One file per key under `dir`: `<key>.json`, holding the same JSON object
/// as a cassette line. Writes go through a temp file and rename.
class CachingBackend final : public ChatBackend {
 public:
  CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir);

  ChatResponse complete(const ChatRequest& request) override;

  std::uint64_t hits() const noexcept { return hits_.load(); }
  std::uint64_t misses() const noexcept { return misses_.load(); }
  std::filesystem::path path_for(const CacheKey& key) const;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path dir_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> temp_counter_{0};
};

/// Serializes one (key, request, response) entry as a single JSON line
/// (no trailing newline).
std::string cassette_line(const CacheKey& key, const ChatRequest& request,
                          const ChatResponse& response);

class CassetteRecorder final : public ChatBackend {
 public:
  /// Opens `path` for appending; existing entries are kept.
  CassetteRecorder(std::shared_ptr<ChatBackend> inner, const std::filesystem::path& path);

  ChatResponse complete(const ChatRequest& request) override;
  std::uint64_t recorded() const noexcept { return recorded_.load(); }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::mutex mutex_;
  std::ofstream out_;
  std::atomic<std::uint64_t> recorded_{0};
};

class ReplayBackend final : public ChatBackend {
 public:
  /// Loads the whole cassette. Throws MalformedResponse on an unreadable
  /// file or line. When a key appears more than once the first entry wins.
  explicit ReplayBackend(const std::filesystem::path& path);

  /// Throws ReplayMiss when the key is absent.
  ChatResponse complete(const ChatRequest& request) override;

  std::size_t entries() const noexcept { return entries_.size(); }
  std::uint64_t lookups() const noexcept { return lookups_.load(); }
  std::uint64_t misses() const noexcept { return misses_.load(); }

 private:
  std::unordered_map<std::string, ChatResponse> entries_;
  std::atomic<std::uint64_t> lookups_{0};
  std::atomic<std::uint64_t> misses_{0};
};

struct TraceEntry {
  std::uint64_t sequence = 0;  // order in which requests were issued
  ChatRequest request;
  std::optional<std::uint64_t> response_sequence;  // set once the response arrived
};

/// Records every request (and when its response came back) in issue order.
class TracingBackend final : public ChatBackend {
 public:
  explicit TracingBackend(std::shared_ptr<ChatBackend> inner);

  ChatResponse complete(const ChatRequest& request) override;
  std::vector<TraceEntry> entries() const;
  void clear();

 private:
  std::shared_ptr<ChatBackend> inner_;
  mutable std::mutex mutex_;
  std::vector<TraceEntry> entries_;
  std::uint64_t clock_ = 0;
};

/// Counts calls and token usage passing through to a borrowed backend.
/// The pipeline wraps the shared backend in one of these per sample.
class MeteredBackend final : public ChatBackend {
 public:
  explicit MeteredBackend(ChatBackend& inner) : inner_(inner) {}

  ChatResponse complete(const ChatRequest& request) override;

  std::uint64_t calls() const noexcept { return calls_.load(); }
  TokenUsage usage() const noexcept { return {prompt_.load(), completion_.load()}; }

 private:
  ChatBackend& inner_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> prompt_{0};
  std::atomic<std::uint64_t> completion_{0};
};

}  // namespace camf
