#include "camf/gateway.hpp"

#include <chrono>
#include <sstream>

#include "camf/errors.hpp"
#include "json_io.hpp"
#include "text_util.hpp"

namespace camf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string joined_contents(const ChatRequest& request) {
  std::string all;
  for (const auto& m : request.messages) {
    all += m.content;
    all += '\n';
  }
  return all;
}

}  // namespace

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System:
      return "system";
    case Role::User:
      return "user";
    case Role::Assistant:
      break;
  }
  return "assistant";
}

void ChatRequest::validate() const {
  if (messages.empty()) throw PreconditionError("chat request has no messages");
  if (messages.front().role == Role::Assistant) {
    throw PreconditionError("chat request must start with a system or user message");
  }
}

std::string canonical_request_json(const ChatRequest& request) {
  return detail::dump_compact(detail::to_json(request));
}

CacheKey cache_key(const ChatRequest& request) {
  return CacheKey{detail::sha256_hex(canonical_request_json(request))};
}

std::optional<AgentId> find_agent_tag(const ChatRequest& request) noexcept {
  for (const auto& m : request.messages) {
    if (m.role != Role::System) continue;
    std::string_view first_line(m.content);
    first_line = first_line.substr(0, first_line.find('\n'));
    first_line = detail::trim(first_line);
    constexpr std::string_view kPrefix = "[AGENT:";
    if (first_line.size() < kPrefix.size() + 1 || first_line.substr(0, kPrefix.size()) != kPrefix ||
        first_line.back() != ']') {
      return std::nullopt;
    }
    return agent_from_string(
        first_line.substr(kPrefix.size(), first_line.size() - kPrefix.size() - 1));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  request.validate();
  calls_.fetch_add(1);
  const auto agent = find_agent_tag(request);
  const auto haystack = joined_contents(request);

  ChatResponse response;
  response.content = fallback_;
  for (const auto& rule : rules_) {
    if (rule.agent && rule.agent != agent) continue;
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (haystack.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) {
      response.content = rule.response;
      break;
    }
  }
  response.prompt_tokens = haystack.size() / 4;
  response.completion_tokens = response.content.size() / 4;
  return response;
}

std::vector<ScriptRule> sentinel_oracle_rules(const std::string& sentinel) {
  std::vector<ScriptRule> rules;
  rules.push_back({AgentId::SJ, {sentinel},
                   "The collected evidence points to generation (" + sentinel +
                       ").\nVERDICT: MACHINE\nCONFIDENCE: 0.9"});
  rules.push_back({AgentId::SJ, {}, "The collected evidence points to a human writer.\nVERDICT: HUMAN\nCONFIDENCE: 0.9"});
  rules.push_back({AgentId::GM, {sentinel},
                   "Counterpoint: the marker " + sentinel + " might be incidental."});
  rules.push_back({AgentId::GM, {}, "Counterpoint: the text could have been generated."});
  for (AgentId id : {AgentId::LS, AgentId::SC, AgentId::RL, AgentId::DE}) {
    rules.push_back({id, {sentinel},
                     "Marker " + sentinel + " observed; the text reads as generated.\nLEANING: MACHINE"});
    rules.push_back({id, {}, "No generation marker observed; the text reads as human.\nLEANING: HUMAN"});
  }
  return rules;
}

// ---------------------------------------------------------------------------
// CountingBackend
// ---------------------------------------------------------------------------

std::string CountingBackend::canned_response(std::optional<AgentId> id) {
  if (!id) return "Canned reply.";
  switch (*id) {
    case AgentId::GM:
      return "Canned counter-argument.";
    case AgentId::SJ:
      return "Canned decision.\nVERDICT: HUMAN";
    default:
      return "Canned analysis.\nLEANING: UNCERTAIN";
  }
}

ChatResponse CountingBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto agent = find_agent_tag(request);
  if (agent) {
    counts_[static_cast<std::size_t>(*agent)].fetch_add(1);
  } else {
    untagged_.fetch_add(1);
  }
  ChatResponse response;
  response.content = canned_response(agent);
  response.prompt_tokens = 1;
  response.completion_tokens = 1;
  return response;
}

std::uint64_t CountingBackend::count(AgentId id) const noexcept {
  return counts_[static_cast<std::size_t>(id)].load();
}

std::uint64_t CountingBackend::total() const noexcept {
  std::uint64_t sum = untagged_.load();
  for (const auto& c : counts_) sum += c.load();
  return sum;
}

std::map<AgentId, std::uint64_t> CountingBackend::snapshot() const {
  std::map<AgentId, std::uint64_t> out;
  for (AgentId id : kAllAgents) out[id] = count(id);
  return out;
}

void CountingBackend::reset() noexcept {
  for (auto& c : counts_) c.store(0);
  untagged_.store(0);
}

// ---------------------------------------------------------------------------
// CachingBackend
// ---------------------------------------------------------------------------

std::string cassette_line(const CacheKey& key, const ChatRequest& request,
                          const ChatResponse& response) {
  detail::json entry = {
      {"key", key.digest}, {"request", detail::to_json(request)}, {"response", detail::to_json(response)}};
  return detail::dump_compact(entry);
}

CachingBackend::CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path CachingBackend::path_for(const CacheKey& key) const {
  return dir_ / (key.digest + ".json");
}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
  const auto start = Clock::now();
  const auto key = cache_key(request);
  const auto path = path_for(key);

  if (std::ifstream in{path, std::ios::binary}) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      const auto entry = detail::json::parse(buffer.str());
      if (entry.at("key").get<std::string>() == key.digest) {
        auto response = detail::response_from_json(entry.at("response"));
        response.from_cache = true;
        response.latency_seconds = seconds_since(start);
        hits_.fetch_add(1);
        return response;
      }
    } catch (const detail::json::exception&) {
      // Corrupt entry: fall through and overwrite it.
    }
  }

  misses_.fetch_add(1);
  auto response = inner_->complete(request);

  const auto tmp = dir_ / (key.digest + ".tmp." + std::to_string(temp_counter_.fetch_add(1)) + "." +
                           std::to_string(reinterpret_cast<std::uintptr_t>(this)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << cassette_line(key, request, response) << '\n';
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
  return response;
}

// ---------------------------------------------------------------------------
// Cassettes
// ---------------------------------------------------------------------------

CassetteRecorder::CassetteRecorder(std::shared_ptr<ChatBackend> inner,
                                   const std::filesystem::path& path)
    : inner_(std::move(inner)) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw TransportError("cannot open cassette for writing: " + path.string());
}

ChatResponse CassetteRecorder::complete(const ChatRequest& request) {
  auto response = inner_->complete(request);
  const auto line = cassette_line(cache_key(request), request, response);
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  recorded_.fetch_add(1);
  return response;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedResponse("cannot open cassette: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const auto entry = detail::json::parse(line);
      entries_.try_emplace(entry.at("key").get<std::string>(),
                           detail::response_from_json(entry.at("response")));
    } catch (const detail::json::exception& e) {
      throw MalformedResponse("cassette " + path.string() + " line " + std::to_string(line_no) +
                              ": " + e.what());
    }
  }
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  const auto start = Clock::now();
  lookups_.fetch_add(1);
  const auto key = cache_key(request);
  const auto it = entries_.find(key.digest);
  if (it == entries_.end()) {
    misses_.fetch_add(1);
    throw ReplayMiss(key.digest);
  }
  auto response = it->second;
  response.from_cache = true;
  response.latency_seconds = seconds_since(start);
  return response;
}

// ---------------------------------------------------------------------------
// TracingBackend / MeteredBackend
// ---------------------------------------------------------------------------

TracingBackend::TracingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

ChatResponse TracingBackend::complete(const ChatRequest& request) {
  std::size_t index = 0;
  {
    std::lock_guard lock(mutex_);
    index = entries_.size();
    entries_.push_back({clock_++, request, std::nullopt});
  }
  auto response = inner_->complete(request);
  {
    std::lock_guard lock(mutex_);
    entries_[index].response_sequence = clock_++;
  }
  return response;
}

std::vector<TraceEntry> TracingBackend::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void TracingBackend::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  clock_ = 0;
}

ChatResponse MeteredBackend::complete(const ChatRequest& request) {
  calls_.fetch_add(1);
  auto response = inner_.complete(request);
  prompt_.fetch_add(response.prompt_tokens);
  completion_.fetch_add(response.completion_tokens);
  return response;
}

}  // namespace camf
