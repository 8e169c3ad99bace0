#include "camf/agents.hpp"

#include <charconv>

#include "camf/errors.hpp"
#include "text_util.hpp"

namespace camf {

namespace {

constexpr std::string_view kNoAnalysis = "(no analysis returned)";

bool is_placeholder_char(char c) noexcept { return (c >= 'a' && c <= 'z') || c == '_'; }

const std::optional<std::string>* binding_for(std::string_view name, const PromptContext& ctx) {
  if (name == "text") return &ctx.text;
  if (name == "profiles") return &ctx.profiles;
  if (name == "argument") return &ctx.argument;
  if (name == "transcript") return &ctx.transcript;
  if (name == "round_index") return &ctx.round_index;
  return nullptr;
}

// Visits literal runs and placeholder names of a template in order.
template <typename OnLiteral, typename OnPlaceholder>
void scan_template(std::string_view tmpl, OnLiteral&& on_literal, OnPlaceholder&& on_placeholder) {
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    std::size_t end = open + 2;
    while (end < tmpl.size() && is_placeholder_char(tmpl[end])) ++end;
    if (end == open + 2 || tmpl.substr(end, 2) != "}}") {
      on_literal(tmpl.substr(pos, open + 2 - pos));
      pos = open + 2;
      continue;
    }
    on_literal(tmpl.substr(pos, open - pos));
    on_placeholder(tmpl.substr(open + 2, end - open - 2));
    pos = end + 2;
  }
  on_literal(tmpl.substr(pos));
}

std::string narrative_of(std::string_view raw) {
  const auto body = detail::trim(raw);
  return body.empty() ? std::string(kNoAnalysis) : std::string(body);
}

ChatRequest make_request(const AgentSpec& spec, const AgentEnv& env, const PromptContext& ctx) {
  return ChatRequest{env.model_id, render_prompt(spec, ctx), spec.sampling};
}

void expect_agent(const AgentSpec& spec, AgentId expected) {
  if (spec.agent_id != expected) {
    throw PreconditionError("agent spec for " + std::string(to_string(spec.agent_id)) +
                            " used where " + std::string(to_string(expected)) + " is required");
  }
}

// Case-insensitive match of "<key>:" followed by optional whitespace at the
// start of an (already left-trimmed) line. Returns the remainder.
std::optional<std::string_view> after_key(std::string_view line, std::string_view key) {
  line = detail::ltrim(line);
  if (!detail::istarts_with(line, key)) return std::nullopt;
  line.remove_prefix(key.size());
  if (line.empty() || line.front() != ':') return std::nullopt;
  line.remove_prefix(1);
  return detail::ltrim(line);
}

// Matches `word` at the start of `s` case-insensitively, followed by a word
// boundary.
bool starts_with_word(std::string_view s, std::string_view word) {
  if (!detail::istarts_with(s, word)) return false;
  return s.size() == word.size() || !detail::is_word_char(s[word.size()]);
}

std::optional<double> parse_confidence_value(std::string_view s) {
  // [01](\.\d+)?
  if (s.empty() || (s[0] != '0' && s[0] != '1')) return std::nullopt;
  std::size_t len = 1;
  if (s.size() > 2 && s[1] == '.' && s[2] >= '0' && s[2] <= '9') {
    len = 2;
    while (len < s.size() && s[len] >= '0' && s[len] <= '9') ++len;
  }
  // "10" is not a confidence of 1.
  if (len < s.size() && s[len] >= '0' && s[len] <= '9') return std::nullopt;
  double value = 0.0;
  const auto token = s.substr(0, len);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  if (value < 0.0 || value > 1.0) return std::nullopt;
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::vector<std::string> template_placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  scan_template(
      tmpl, [](std::string_view) {},
      [&](std::string_view name) {
        for (const auto& n : names) {
          if (n == name) return;
        }
        names.emplace_back(name);
      });
  return names;
}

std::string render_template(std::string_view tmpl, const PromptContext& ctx) {
  std::string out;
  out.reserve(tmpl.size());
  scan_template(
      tmpl, [&](std::string_view literal) { out.append(literal); },
      [&](std::string_view name) {
        const auto* binding = binding_for(name, ctx);
        if (binding == nullptr || !binding->has_value()) throw UnboundPlaceholder(std::string(name));
        out.append(**binding);
      });
  return out;
}

std::vector<ChatMessage> render_prompt(const AgentSpec& spec, const PromptContext& ctx) {
  if (spec.system_template.find("[AGENT:") != std::string::npos) {
    throw PreconditionError("system template must not carry its own agent tag");
  }
  std::string system = agent_tag(spec.agent_id);
  system += '\n';
  system += render_template(spec.system_template, ctx);
  return {ChatMessage{Role::System, std::move(system)},
          ChatMessage{Role::User, render_template(spec.user_template, ctx)}};
}

std::string render_profiles(const ProfileSet& profiles) {
  std::string out;
  for (const auto& p : profiles.present()) {
    if (!out.empty()) out += "\n\n";
    out += "### ";
    out += to_string(p.dimension);
    out += " profile\n";
    out += p.narrative;
  }
  return out;
}

std::string render_argument(const AdversarialArgument& argument) { return argument.narrative; }

std::string render_previous_refinement(const ProbingTranscript& transcript) {
  const auto* last = transcript.last();
  if (last == nullptr) return {};
  return "\n## Refined assessment from round " + std::to_string(last->refinement.round_index) +
         "\n" + last->refinement.narrative + "\n";
}

std::string render_transcript(const ProbingTranscript& transcript) {
  if (transcript.empty()) return {};
  const auto n = transcript.size();
  std::string out = "\n## Adversarial probing record\n";
  out += "A generator-mimic challenged the profiles and a detector-enhancer evaluated each "
         "challenge, over " +
         std::to_string(n) + (n == 1 ? " round" : " rounds") +
         ". Consider how convincingly each challenge was answered. The final round carries the "
         "most refined assessment.\n";
  for (const auto& round : transcript.rounds()) {
    const auto idx = std::to_string(round.argument.round_index);
    const std::string label =
        "Round " + idx + (round.argument.round_index == static_cast<int>(n) ? " (FINAL)" : "");
    out += "\n### " + label + ": counter-argument (generator-mimic)\n";
    out += round.argument.narrative;
    out += "\n\n### " + label + ": refined assessment (detector-enhancer)\n";
    out += round.refinement.narrative;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

Leaning parse_leaning(std::string_view raw) noexcept {
  const auto lines = detail::split_lines(raw);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    const auto rest = after_key(*it, "LEANING");
    if (!rest) continue;
    if (starts_with_word(*rest, "HUMAN")) return Leaning::Human;
    if (starts_with_word(*rest, "MACHINE")) return Leaning::Machine;
    if (starts_with_word(*rest, "UNCERTAIN")) return Leaning::Uncertain;
  }
  return Leaning::Uncertain;
}

std::optional<ParsedVerdict> parse_verdict(std::string_view raw) noexcept {
  const auto lines = detail::split_lines(raw);
  std::optional<AuthorshipLabel> label;
  for (auto it = lines.rbegin(); it != lines.rend() && !label; ++it) {
    const auto rest = after_key(*it, "VERDICT");
    if (!rest) continue;
    if (starts_with_word(*rest, "HUMAN")) {
      label = AuthorshipLabel::Human;
    } else if (starts_with_word(*rest, "MACHINE")) {
      label = AuthorshipLabel::Machine;
    }
  }
  if (!label) return std::nullopt;

  ParsedVerdict out{*label, std::nullopt};
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    const auto rest = after_key(*it, "CONFIDENCE");
    if (!rest) continue;
    out.confidence = parse_confidence_value(*rest);
    break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

LinguisticProfile profile_text(Dimension dimension, std::string_view text, const AgentSpec& spec,
                               const AgentEnv& env) {
  expect_agent(spec, profiling_agent(dimension));
  if (detail::is_blank(text)) throw EmptyText();

  PromptContext ctx;
  ctx.text = detail::utf8_truncate(text, env.text_char_budget, kTruncationMarker);
  const auto response = env.backend.complete(make_request(spec, env, ctx));
  return LinguisticProfile{dimension, narrative_of(response.content), parse_leaning(response.content),
                           response.content};
}

LinguisticProfile analyze_style(std::string_view text, const AgentSpec& spec, const AgentEnv& env) {
  return profile_text(Dimension::Stylistic, text, spec, env);
}

LinguisticProfile evaluate_coherence(std::string_view text, const AgentSpec& spec,
                                     const AgentEnv& env) {
  return profile_text(Dimension::Semantic, text, spec, env);
}

LinguisticProfile assess_logic(std::string_view text, const AgentSpec& spec, const AgentEnv& env) {
  return profile_text(Dimension::Logical, text, spec, env);
}

AdversarialArgument generate_argument(const ProfileSet& profiles, const ProbingTranscript& prior,
                                      int round_index, const AgentSpec& spec, const AgentEnv& env) {
  expect_agent(spec, AgentId::GM);
  if (round_index != static_cast<int>(prior.size()) + 1) {
    throw PreconditionError("argument round " + std::to_string(round_index) +
                            " does not follow a transcript of " + std::to_string(prior.size()) +
                            " rounds");
  }
  PromptContext ctx;
  ctx.profiles = render_profiles(profiles);
  ctx.transcript = render_previous_refinement(prior);
  ctx.round_index = std::to_string(round_index);
  const auto response = env.backend.complete(make_request(spec, env, ctx));
  return AdversarialArgument{round_index, narrative_of(response.content), response.content};
}

RefinedAnalysis refine_analysis(const ProfileSet& profiles, const AdversarialArgument& argument,
                                const AgentSpec& spec, const AgentEnv& env) {
  expect_agent(spec, AgentId::DE);
  if (argument.round_index < 1) throw PreconditionError("argument round index must be >= 1");
  PromptContext ctx;
  ctx.profiles = render_profiles(profiles);
  ctx.argument = render_argument(argument);
  ctx.round_index = std::to_string(argument.round_index);
  const auto response = env.backend.complete(make_request(spec, env, ctx));
  return RefinedAnalysis{argument.round_index, narrative_of(response.content),
                         parse_leaning(response.content), response.content};
}

Verdict synthesize_judgment(const ProfileSet& profiles, const ProbingTranscript& transcript,
                            const AgentSpec& spec, const AgentEnv& env, int retry_limit) {
  expect_agent(spec, AgentId::SJ);
  if (retry_limit < 0) throw PreconditionError("retry limit must be >= 0");
  PromptContext ctx;
  ctx.profiles = render_profiles(profiles);
  ctx.transcript = render_transcript(transcript);
  auto request = make_request(spec, env, ctx);

  std::string last_reply;
  for (int attempt = 0; attempt <= retry_limit; ++attempt) {
    if (attempt > 0) {
      request.messages.push_back(
          {Role::Assistant, last_reply.empty() ? std::string("(empty reply)") : last_reply});
      request.messages.push_back({Role::User, std::string(kVerdictReminder)});
    }
    last_reply = env.backend.complete(request).content;
    if (const auto parsed = parse_verdict(last_reply)) {
      return Verdict{parsed->label, parsed->confidence, std::string(detail::trim(last_reply)), false,
                     VerdictSource::SynthesisJudge};
    }
  }
  return Verdict{AuthorshipLabel::Human, std::nullopt, std::string(detail::trim(last_reply)), true,
                 VerdictSource::SynthesisJudge};
}

}  // namespace camf
