#pragma once

// Domain types shared by the gateway, agents, pipeline and evaluation code.
// Everything here is a plain value type; once built, instances are never
// mutated and may be shared freely between threads.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace camf {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class AuthorshipLabel : std::uint8_t { Human = 0, Machine = 1 };

int label_encode(AuthorshipLabel label) noexcept;
/// Inverse of label_encode. Any code other than 0 or 1 yields nullopt.
std::optional<AuthorshipLabel> label_decode(int code) noexcept;
std::string_view to_string(AuthorshipLabel label) noexcept;  // "HUMAN" / "MACHINE"

/// Per-agent hint attached to profiles and refinements.
enum class Leaning : std::uint8_t { Human, Machine, Uncertain };

std::string_view to_string(Leaning leaning) noexcept;  // "HUMAN" / "MACHINE" / "UNCERTAIN"
std::optional<Leaning> leaning_from_string(std::string_view s) noexcept;

enum class Dimension : std::uint8_t { Stylistic, Semantic, Logical };

inline constexpr std::array<Dimension, 3> kAllDimensions = {
    Dimension::Stylistic, Dimension::Semantic, Dimension::Logical};

std::string_view to_string(Dimension d) noexcept;  // "Stylistic" / ...
std::optional<Dimension> dimension_from_string(std::string_view s) noexcept;

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

enum class AgentId : std::uint8_t { LS, SC, RL, GM, DE, SJ };

inline constexpr std::array<AgentId, 6> kAllAgents = {AgentId::LS, AgentId::SC, AgentId::RL,
                                                      AgentId::GM, AgentId::DE, AgentId::SJ};

std::string_view to_string(AgentId id) noexcept;  // "LS", "SC", ...
std::optional<AgentId> agent_from_string(std::string_view s) noexcept;
/// "[AGENT:LS]" etc. Injected as the first line of every system prompt.
std::string agent_tag(AgentId id);
AgentId profiling_agent(Dimension d) noexcept;

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

struct TextSample {
  std::string id;
  std::string text;
  std::optional<AuthorshipLabel> gold_label;
  std::optional<std::string> domain_tag;
};

/// True when the sample has a nonempty id and non-blank text.
bool is_valid(const TextSample& sample) noexcept;

// ---------------------------------------------------------------------------
// Stage 1
// ---------------------------------------------------------------------------

struct LinguisticProfile {
  Dimension dimension = Dimension::Stylistic;
  std::string narrative;
  Leaning leaning = Leaning::Uncertain;
  std::string raw_response;

  friend bool operator==(const LinguisticProfile&, const LinguisticProfile&) = default;
};

/// Up to one profile per dimension. A missing slot means that profiling
/// agent was ablated.
class ProfileSet {
 public:
  /// Throws PreconditionError if all slots are empty or a profile sits in a
  /// slot that does not match its dimension.
  ProfileSet(std::optional<LinguisticProfile> stylistic,
             std::optional<LinguisticProfile> semantic,
             std::optional<LinguisticProfile> logical);

  /// Builds from an unordered list; duplicate dimensions are rejected.
  static ProfileSet from_list(const std::vector<LinguisticProfile>& profiles);

  const std::optional<LinguisticProfile>& stylistic() const noexcept { return stylistic_; }
  const std::optional<LinguisticProfile>& semantic() const noexcept { return semantic_; }
  const std::optional<LinguisticProfile>& logical() const noexcept { return logical_; }
  const std::optional<LinguisticProfile>& get(Dimension d) const noexcept;

  bool has(Dimension d) const noexcept { return get(d).has_value(); }
  std::size_t size() const noexcept;
  /// Present profiles in Stylistic, Semantic, Logical order.
  std::vector<LinguisticProfile> present() const;

  friend bool operator==(const ProfileSet&, const ProfileSet&) = default;

 private:
  std::optional<LinguisticProfile> stylistic_;
  std::optional<LinguisticProfile> semantic_;
  std::optional<LinguisticProfile> logical_;
};

// ---------------------------------------------------------------------------
// Stage 2
// ---------------------------------------------------------------------------

struct AdversarialArgument {
  int round_index = 1;
  std::string narrative;
  std::string raw_response;

  friend bool operator==(const AdversarialArgument&, const AdversarialArgument&) = default;
};

struct RefinedAnalysis {
  int round_index = 1;
  std::string narrative;
  Leaning leaning = Leaning::Uncertain;
  std::string raw_response;

  friend bool operator==(const RefinedAnalysis&, const RefinedAnalysis&) = default;
};

struct ProbingRound {
  AdversarialArgument argument;
  RefinedAnalysis refinement;

  friend bool operator==(const ProbingRound&, const ProbingRound&) = default;
};

/// Ordered exchange rounds. Round indices are always 1..n.
class ProbingTranscript {
 public:
  ProbingTranscript() = default;

  /// Throws PreconditionError unless both halves carry index size()+1.
  void append(AdversarialArgument argument, RefinedAnalysis refinement);

  const std::vector<ProbingRound>& rounds() const noexcept { return rounds_; }
  std::size_t size() const noexcept { return rounds_.size(); }
  bool empty() const noexcept { return rounds_.empty(); }
  const ProbingRound* last() const noexcept { return rounds_.empty() ? nullptr : &rounds_.back(); }

  friend bool operator==(const ProbingTranscript&, const ProbingTranscript&) = default;

 private:
  std::vector<ProbingRound> rounds_;
};

// ---------------------------------------------------------------------------
// Stage 3
// ---------------------------------------------------------------------------

enum class VerdictSource : std::uint8_t { SynthesisJudge, Heuristic };

std::string_view to_string(VerdictSource s) noexcept;
std::optional<VerdictSource> verdict_source_from_string(std::string_view s) noexcept;

struct Verdict {
  AuthorshipLabel label = AuthorshipLabel::Human;
  std::optional<double> confidence;  // in [0, 1] when present
  std::string rationale;
  bool parse_failed = false;
  VerdictSource source = VerdictSource::SynthesisJudge;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct SamplingParams {
  double temperature = 0.0;
  double top_p = 0.0;  // recorded verbatim; see wire_top_p()
  int max_tokens = 1024;

  /// Many chat APIs reject top_p == 0, so the value sent on the wire is
  /// clamped up to kMinWireTopP.
  static constexpr double kMinWireTopP = 1e-9;
  double wire_top_p() const noexcept { return top_p < kMinWireTopP ? kMinWireTopP : top_p; }

  /// Throws PreconditionError on out-of-range values.
  void validate() const;

  friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

struct AgentSpec {
  AgentId agent_id = AgentId::LS;
  std::string system_template;
  std::string user_template;
  SamplingParams sampling;
};

struct PipelineConfig {
  int rounds = 2;
  bool include_ls = true;
  bool include_sc = true;
  bool include_rl = true;
  bool enable_probing = true;
  bool enable_judge = true;
  std::string model_id = "gpt-3.5-turbo";
  SamplingParams sampling;
  int concurrency_limit = 4;
  int parse_retry_limit = 1;
  /// Run the enabled profiling agents in parallel.
  bool concurrent_profiling = true;
  /// Inputs longer than this many code points are cut and marked.
  std::size_t text_char_budget = 12000;

  bool includes(Dimension d) const noexcept;
  std::size_t enabled_profile_count() const noexcept;
  /// Throws PreconditionError when the configuration is inconsistent.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

struct TokenUsage {
  std::uint64_t prompt = 0;
  std::uint64_t completion = 0;

  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct DetectionResult {
  std::string sample_id;
  Verdict verdict;
  ProfileSet profiles;
  ProbingTranscript transcript;
  double latency_seconds = 0.0;
  std::uint64_t llm_calls = 0;
  TokenUsage token_usage;
};

}  // namespace camf
