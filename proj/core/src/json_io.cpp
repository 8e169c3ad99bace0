#include "json_io.hpp"

#include "camf/errors.hpp"
#include "camf/serialization.hpp"
#include "text_util.hpp"

namespace camf::detail {

namespace {

template <typename T, typename F>
T parse_enum(const json& j, const char* what, F&& from_string) {
  const auto s = j.get<std::string>();
  if (auto v = from_string(s)) return *v;
  throw FormatError(std::string("invalid ") + what + ": " + s);
}

}  // namespace

std::string dump_compact(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string dump_pretty(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace); }

json to_json(const LinguisticProfile& p) {
  return {{"dimension", to_string(p.dimension)},
          {"narrative", p.narrative},
          {"leaning", to_string(p.leaning)},
          {"raw_response", p.raw_response}};
}

LinguisticProfile profile_from_json(const json& j) {
  LinguisticProfile p;
  p.dimension = parse_enum<Dimension>(j.at("dimension"), "dimension", dimension_from_string);
  p.narrative = j.at("narrative").get<std::string>();
  p.leaning = parse_enum<Leaning>(j.at("leaning"), "leaning", leaning_from_string);
  p.raw_response = j.at("raw_response").get<std::string>();
  return p;
}

json to_json(const ProfileSet& s) {
  json out = json::object();
  for (Dimension d : kAllDimensions) {
    const auto key = to_lower(to_string(d));
    out[key] = s.get(d) ? to_json(*s.get(d)) : json(nullptr);
  }
  return out;
}

ProfileSet profile_set_from_json(const json& j) {
  auto slot = [&](Dimension d) -> std::optional<LinguisticProfile> {
    const auto key = to_lower(to_string(d));
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return profile_from_json(j.at(key));
  };
  return ProfileSet(slot(Dimension::Stylistic), slot(Dimension::Semantic), slot(Dimension::Logical));
}

json to_json(const ProbingTranscript& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds()) {
    rounds.push_back({{"argument",
                       {{"round_index", r.argument.round_index},
                        {"narrative", r.argument.narrative},
                        {"raw_response", r.argument.raw_response}}},
                      {"refinement",
                       {{"round_index", r.refinement.round_index},
                        {"narrative", r.refinement.narrative},
                        {"leaning", to_string(r.refinement.leaning)},
                        {"raw_response", r.refinement.raw_response}}}});
  }
  return {{"rounds", rounds}};
}

ProbingTranscript transcript_from_json(const json& j) {
  ProbingTranscript t;
  for (const auto& r : j.at("rounds")) {
    const auto& a = r.at("argument");
    const auto& d = r.at("refinement");
    AdversarialArgument arg{a.at("round_index").get<int>(), a.at("narrative").get<std::string>(),
                            a.at("raw_response").get<std::string>()};
    RefinedAnalysis ref{d.at("round_index").get<int>(), d.at("narrative").get<std::string>(),
                        parse_enum<Leaning>(d.at("leaning"), "leaning", leaning_from_string),
                        d.at("raw_response").get<std::string>()};
    t.append(std::move(arg), std::move(ref));
  }
  return t;
}

json to_json(const Verdict& v) {
  return {{"label", to_string(v.label)},
          {"label_code", label_encode(v.label)},
          {"confidence", v.confidence ? json(*v.confidence) : json(nullptr)},
          {"rationale", v.rationale},
          {"parse_failed", v.parse_failed},
          {"source", to_string(v.source)}};
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  const auto code = j.at("label_code").get<int>();
  const auto label = label_decode(code);
  if (!label) throw FormatError("invalid label code " + std::to_string(code));
  if (j.at("label").get<std::string>() != to_string(*label)) {
    throw FormatError("label does not match label_code " + std::to_string(code));
  }
  v.label = *label;
  if (!j.at("confidence").is_null()) v.confidence = j.at("confidence").get<double>();
  v.rationale = j.at("rationale").get<std::string>();
  v.parse_failed = j.at("parse_failed").get<bool>();
  v.source = parse_enum<VerdictSource>(j.at("source"), "verdict source", verdict_source_from_string);
  return v;
}

json to_json(const SamplingParams& s) {
  return {{"temperature", s.temperature}, {"top_p", s.top_p}, {"max_tokens", s.max_tokens}};
}

SamplingParams sampling_from_json(const json& j) {
  SamplingParams s;
  s.temperature = j.at("temperature").get<double>();
  s.top_p = j.at("top_p").get<double>();
  s.max_tokens = j.at("max_tokens").get<int>();
  return s;
}

json to_json(const PipelineConfig& c) {
  return {{"rounds", c.rounds},
          {"include_ls", c.include_ls},
          {"include_sc", c.include_sc},
          {"include_rl", c.include_rl},
          {"enable_probing", c.enable_probing},
          {"enable_judge", c.enable_judge},
          {"model", c.model_id},
          {"sampling", to_json(c.sampling)},
          {"concurrency", c.concurrency_limit},
          {"parse_retry_limit", c.parse_retry_limit},
          {"concurrent_profiling", c.concurrent_profiling},
          {"text_char_budget", c.text_char_budget}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.rounds = j.at("rounds").get<int>();
  c.include_ls = j.at("include_ls").get<bool>();
  c.include_sc = j.at("include_sc").get<bool>();
  c.include_rl = j.at("include_rl").get<bool>();
  c.enable_probing = j.at("enable_probing").get<bool>();
  c.enable_judge = j.at("enable_judge").get<bool>();
  c.model_id = j.at("model").get<std::string>();
  c.sampling = sampling_from_json(j.at("sampling"));
  c.concurrency_limit = j.at("concurrency").get<int>();
  c.parse_retry_limit = j.at("parse_retry_limit").get<int>();
  c.concurrent_profiling = j.at("concurrent_profiling").get<bool>();
  c.text_char_budget = j.at("text_char_budget").get<std::size_t>();
  return c;
}

json to_json(const DetectionResult& r) {
  return {{"sample_id", r.sample_id},
          {"verdict", to_json(r.verdict)},
          {"profiles", to_json(r.profiles)},
          {"transcript", to_json(r.transcript)},
          {"latency_seconds", r.latency_seconds},
          {"llm_calls", r.llm_calls},
          {"token_usage", {{"prompt", r.token_usage.prompt}, {"completion", r.token_usage.completion}}}};
}

DetectionResult detection_result_from_json(const json& j) {
  const auto& usage = j.at("token_usage");
  return DetectionResult{j.at("sample_id").get<std::string>(),
                         verdict_from_json(j.at("verdict")),
                         profile_set_from_json(j.at("profiles")),
                         transcript_from_json(j.at("transcript")),
                         j.at("latency_seconds").get<double>(),
                         j.at("llm_calls").get<std::uint64_t>(),
                         {usage.at("prompt").get<std::uint64_t>(),
                          usage.at("completion").get<std::uint64_t>()}};
}

json to_json(const ChatRequest& r) {
  json messages = json::array();
  for (const auto& m : r.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", r.model_id},
          {"messages", messages},
          {"temperature", r.sampling.temperature},
          {"top_p", r.sampling.wire_top_p()},
          {"max_tokens", r.sampling.max_tokens}};
}

json to_json(const ChatResponse& r) {
  return {{"content", r.content},
          {"prompt_tokens", r.prompt_tokens},
          {"completion_tokens", r.completion_tokens}};
}

ChatResponse response_from_json(const json& j) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  r.prompt_tokens = j.value("prompt_tokens", std::uint64_t{0});
  r.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
  return r;
}

}  // namespace camf

// ---------------------------------------------------------------------------
// Public string API
// ---------------------------------------------------------------------------

namespace camf {

namespace {

template <typename F>
auto parse_document(std::string_view text, const char* what, F&& convert) {
  try {
    return convert(detail::json::parse(text));
  } catch (const detail::json::exception& e) {
    throw FormatError(std::string("malformed ") + what + " document: " + e.what());
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("inconsistent ") + what + " document: " + e.what());
  }
}

std::string dump(const detail::json& j, int indent) {
  return j.dump(indent, ' ', false, detail::json::error_handler_t::replace);
}

}  // namespace

std::string to_json_string(const DetectionResult& result, int indent) {
  return dump(detail::to_json(result), indent);
}
std::string to_json_string(const ProfileSet& profiles, int indent) {
  return dump(detail::to_json(profiles), indent);
}
std::string to_json_string(const ProbingTranscript& transcript, int indent) {
  return dump(detail::to_json(transcript), indent);
}
std::string to_json_string(const PipelineConfig& config, int indent) {
  return dump(detail::to_json(config), indent);
}

DetectionResult detection_result_from_json(std::string_view text) {
  return parse_document(text, "detection result",
                        [](const detail::json& j) { return detail::detection_result_from_json(j); });
}
ProfileSet profile_set_from_json(std::string_view text) {
  return parse_document(text, "profile set",
                        [](const detail::json& j) { return detail::profile_set_from_json(j); });
}
ProbingTranscript transcript_from_json(std::string_view text) {
  return parse_document(text, "transcript",
                        [](const detail::json& j) { return detail::transcript_from_json(j); });
}
PipelineConfig pipeline_config_from_json(std::string_view text) {
  return parse_document(text, "pipeline config",
                        [](const detail::json& j) { return detail::config_from_json(j); });
}

}  // namespace camf
