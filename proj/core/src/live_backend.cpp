#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "camf/errors.hpp"
#include "camf/gateway.hpp"
#include "json_io.hpp"

namespace camf {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/', may be just "/"
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError("URL without scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResult post(const std::string& url,
                  const std::vector<std::pair<std::string, std::string>>& headers,
                  const std::string& body, std::chrono::milliseconds timeout) override {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    auto res = client.Post(parts.path, h, body, "application/json");
    if (!res) return {0, {}, httplib::to_string(res.error())};
    return {res->status, res->body, {}};
  }
};

std::string join_url(const std::string& base, const std::string& suffix) {
  if (!base.empty() && base.back() == '/') return base.substr(0, base.size() - 1) + suffix;
  return base + suffix;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string snippet(const std::string& body) {
  constexpr std::size_t kMax = 300;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

LiveSettings LiveSettings::from_environment() {
  LiveSettings s;
  const char* key = std::getenv("CAMF_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw AuthError("CAMF_API_KEY is not set; the live backend needs a credential");
  }
  s.api_key = key;
  if (const char* base = std::getenv("CAMF_BASE_URL"); base != nullptr && *base != '\0') {
    s.base_url = base;
  }
  return s;
}

bool is_transient_status(int status) noexcept {
  return status == 0 || status == 429 || (status >= 500 && status <= 599);
}

LiveBackend::LiveBackend(LiveSettings settings, std::shared_ptr<HttpTransport> transport,
                         Sleeper sleeper, std::uint64_t jitter_seed)
    : settings_(std::move(settings)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      rng_state_(jitter_seed) {
  if (!transport_) throw PreconditionError("live backend needs a transport");
  if (settings_.retry.max_attempts < 1) throw PreconditionError("max_attempts must be >= 1");
  if (!sleeper_) {
    sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  }
}

std::string LiveBackend::request_body(const ChatRequest& request) {
  return detail::dump_compact(detail::to_json(request));
}

ChatResponse LiveBackend::parse_response_body(const std::string& body) {
  detail::json j;
  try {
    j = detail::json::parse(body);
  } catch (const detail::json::exception& e) {
    throw MalformedResponse(std::string("response is not JSON: ") + e.what());
  }
  const auto* content = [&]() -> const detail::json* {
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
      return nullptr;
    }
    const auto& choice = j["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
      return nullptr;
    }
    const auto& msg = choice["message"];
    if (!msg.contains("content") || !msg["content"].is_string()) return nullptr;
    return &msg["content"];
  }();
  if (content == nullptr) {
    throw MalformedResponse("response lacks choices[0].message.content: " + snippet(body));
  }

  ChatResponse out;
  out.content = content->get<std::string>();
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& usage = j["usage"];
    if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number_unsigned()) {
      out.prompt_tokens = usage["prompt_tokens"].get<std::uint64_t>();
    }
    if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_unsigned()) {
      out.completion_tokens = usage["completion_tokens"].get<std::uint64_t>();
    }
  }
  return out;
}

double LiveBackend::backoff_seconds(int retry_number) {
  const auto& delays = settings_.retry.delays_seconds;
  if (delays.empty()) return 0.0;
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(retry_number - 1), delays.size() - 1);
  double u = 0.0;
  {
    std::lock_guard lock(rng_mutex_);
    u = static_cast<double>(splitmix64(rng_state_) >> 11) * 0x1.0p-53;  // [0, 1)
  }
  const double factor = 1.0 + settings_.retry.jitter * (2.0 * u - 1.0);
  return delays[idx] * factor;
}

ChatResponse LiveBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto url = join_url(settings_.base_url, "/chat/completions");
  const auto body = request_body(request);
  const std::vector<std::pair<std::string, std::string>> headers = {
      {"Authorization", "Bearer " + settings_.api_key}};

  HttpResult last;
  for (int attempt = 1; attempt <= settings_.retry.max_attempts; ++attempt) {
    if (attempt > 1) sleeper_(std::chrono::duration<double>(backoff_seconds(attempt - 1)));
    attempts_.fetch_add(1);
    last = transport_->post(url, headers, body, settings_.timeout);

    if (last.status >= 200 && last.status < 300) {
      auto response = parse_response_body(last.body);
      response.latency_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return response;
    }
    if (last.status == 401 || last.status == 403) {
      throw AuthError("authentication rejected (HTTP " + std::to_string(last.status) +
                      "): " + snippet(last.body));
    }
    if (!is_transient_status(last.status)) {
      throw TransportError("HTTP " + std::to_string(last.status) + ": " + snippet(last.body),
                           last.status);
    }
  }

  const auto attempts = std::to_string(settings_.retry.max_attempts);
  if (last.status == 429) {
    throw RateLimited("rate limited after " + attempts + " attempts: " + snippet(last.body));
  }
  if (last.status == 0) {
    throw TransportError("no response after " + attempts + " attempts: " + last.error);
  }
  throw TransportError("HTTP " + std::to_string(last.status) + " after " + attempts +
                           " attempts: " + snippet(last.body),
                       last.status);
}

}  // namespace camf
