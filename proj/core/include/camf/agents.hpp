#pragma once

// The six agent roles: prompt construction and response parsing.
//
// Each agent call renders its AgentSpec templates against a PromptContext,
// sends one chat request and parses a structured trailer from the reply:
//
//   profiling agents, refinement   ... LEANING: HUMAN|MACHINE|UNCERTAIN
//   synthesis judge                ... VERDICT: HUMAN|MACHINE [CONFIDENCE: x]
//
// The parsers are total: any string yields a defined result.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camf/gateway.hpp"
#include "camf/types.hpp"

namespace camf {

inline constexpr std::string_view kTruncationMarker = "[TRUNCATED]";
inline constexpr std::size_t kDefaultTextCharBudget = 12000;

/// Pre-rendered values for the template placeholders. An absent field
/// means "no binding"; an empty string is a valid binding.
struct PromptContext {
  std::optional<std::string> text;
  std::optional<std::string> profiles;
  std::optional<std::string> argument;
  std::optional<std::string> transcript;
  std::optional<std::string> round_index;
};

/// Placeholder names found in `tmpl`, in order of first appearance.
std::vector<std::string> template_placeholders(std::string_view tmpl);

/// Single-pass {{name}} substitution. Substituted values are never
/// rescanned, so input text containing braces is inserted verbatim.
/// Throws UnboundPlaceholder for unknown names or missing bindings.
std::string render_template(std::string_view tmpl, const PromptContext& ctx);

/// [system, user] messages. The system message starts with the agent tag
/// line followed by the rendered system template.
std::vector<ChatMessage> render_prompt(const AgentSpec& spec, const PromptContext& ctx);

// Section renderers. Profiles come out in Stylistic, Semantic, Logical order;
// absent dimensions leave no trace.
std::string render_profiles(const ProfileSet& profiles);
std::string render_argument(const AdversarialArgument& argument);
/// The previous round's refinement, or "" before the first round.
std::string render_previous_refinement(const ProbingTranscript& transcript);
/// Every round in order with the final one flagged; "" for an empty transcript.
std::string render_transcript(const ProbingTranscript& transcript);

Leaning parse_leaning(std::string_view raw) noexcept;

struct ParsedVerdict {
  AuthorshipLabel label = AuthorshipLabel::Human;
  std::optional<double> confidence;

  friend bool operator==(const ParsedVerdict&, const ParsedVerdict&) = default;
};

std::optional<ParsedVerdict> parse_verdict(std::string_view raw) noexcept;

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

struct AgentTemplate {
  std::string system;
  std::string user;
};

/// One template per agent. Files use this layout:
///
///     [system]
///     ...system prompt...
///     [user]
///     ...user prompt...
class TemplateSet {
 public:
  /// Templates compiled into the library from core/prompts/.
  static const TemplateSet& defaults();

  /// Reads `<dir>/<agent>.txt` (lowercase id, e.g. "ls.txt"); agents with
  /// no file keep the default template.
  static TemplateSet from_directory(const std::filesystem::path& dir);

  /// Throws Error if either section is missing or a template contains an
  /// agent tag of its own.
  static AgentTemplate parse(std::string_view file_content);

  const AgentTemplate& get(AgentId id) const;
  void set(AgentId id, AgentTemplate tmpl);
  AgentSpec spec(AgentId id, const SamplingParams& sampling) const;

  /// SHA-256 over every template, for provenance in reports.
  std::string digest() const;

 private:
  std::map<AgentId, AgentTemplate> templates_;
};

// ---------------------------------------------------------------------------
// Agent operations
// ---------------------------------------------------------------------------

/// What every agent call needs besides its spec: where to send requests and
/// which model to ask for.
struct AgentEnv {
  ChatBackend& backend;
  std::string model_id;
  std::size_t text_char_budget = kDefaultTextCharBudget;
};

LinguisticProfile analyze_style(std::string_view text, const AgentSpec& spec, const AgentEnv& env);
LinguisticProfile evaluate_coherence(std::string_view text, const AgentSpec& spec,
                                     const AgentEnv& env);
LinguisticProfile assess_logic(std::string_view text, const AgentSpec& spec, const AgentEnv& env);

/// Dispatches to the three functions above.
LinguisticProfile profile_text(Dimension dimension, std::string_view text, const AgentSpec& spec,
                               const AgentEnv& env);

/// Round `round_index` must equal prior.size() + 1.
AdversarialArgument generate_argument(const ProfileSet& profiles, const ProbingTranscript& prior,
                                      int round_index, const AgentSpec& spec, const AgentEnv& env);

RefinedAnalysis refine_analysis(const ProfileSet& profiles, const AdversarialArgument& argument,
                                const AgentSpec& spec, const AgentEnv& env);

inline constexpr std::string_view kVerdictReminder =
    "Your previous reply did not end with a decision line. Reply again and finish with exactly one "
    "line reading VERDICT: HUMAN or VERDICT: MACHINE, optionally followed by a line CONFIDENCE: "
    "<number between 0 and 1>.";

/// Asks the judge for a verdict. If the reply has no parseable verdict the
/// judge is re-prompted up to `retry_limit` times; after that the verdict
/// falls back to Human with parse_failed set. Only gateway errors escape.
Verdict synthesize_judgment(const ProfileSet& profiles, const ProbingTranscript& transcript,
                            const AgentSpec& spec, const AgentEnv& env, int retry_limit);

}  // namespace camf
