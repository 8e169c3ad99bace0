#include "camf/types.hpp"

#include <cmath>

#include "camf/errors.hpp"
#include "text_util.hpp"

namespace camf {

int label_encode(AuthorshipLabel label) noexcept { return static_cast<int>(label); }

std::optional<AuthorshipLabel> label_decode(int code) noexcept {
  switch (code) {
    case 0:
      return AuthorshipLabel::Human;
    case 1:
      return AuthorshipLabel::Machine;
    default:
      return std::nullopt;
  }
}

std::string_view to_string(AuthorshipLabel label) noexcept {
  return label == AuthorshipLabel::Human ? "HUMAN" : "MACHINE";
}

std::string_view to_string(Leaning leaning) noexcept {
  switch (leaning) {
    case Leaning::Human:
      return "HUMAN";
    case Leaning::Machine:
      return "MACHINE";
    case Leaning::Uncertain:
      break;
  }
  return "UNCERTAIN";
}

std::optional<Leaning> leaning_from_string(std::string_view s) noexcept {
  if (s == "HUMAN") return Leaning::Human;
  if (s == "MACHINE") return Leaning::Machine;
  if (s == "UNCERTAIN") return Leaning::Uncertain;
  return std::nullopt;
}

std::string_view to_string(Dimension d) noexcept {
  switch (d) {
    case Dimension::Stylistic:
      return "Stylistic";
    case Dimension::Semantic:
      return "Semantic";
    case Dimension::Logical:
      break;
  }
  return "Logical";
}

std::optional<Dimension> dimension_from_string(std::string_view s) noexcept {
  for (Dimension d : kAllDimensions) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::string_view to_string(AgentId id) noexcept {
  switch (id) {
    case AgentId::LS:
      return "LS";
    case AgentId::SC:
      return "SC";
    case AgentId::RL:
      return "RL";
    case AgentId::GM:
      return "GM";
    case AgentId::DE:
      return "DE";
    case AgentId::SJ:
      break;
  }
  return "SJ";
}

std::optional<AgentId> agent_from_string(std::string_view s) noexcept {
  for (AgentId id : kAllAgents) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

std::string agent_tag(AgentId id) { return "[AGENT:" + std::string(to_string(id)) + "]"; }

AgentId profiling_agent(Dimension d) noexcept {
  switch (d) {
    case Dimension::Stylistic:
      return AgentId::LS;
    case Dimension::Semantic:
      return AgentId::SC;
    case Dimension::Logical:
      break;
  }
  return AgentId::RL;
}

bool is_valid(const TextSample& sample) noexcept {
  return !sample.id.empty() && !detail::is_blank(sample.text);
}

// ---------------------------------------------------------------------------

namespace {

void check_slot(const std::optional<LinguisticProfile>& slot, Dimension expected) {
  if (slot && slot->dimension != expected) {
    throw PreconditionError("profile of dimension " + std::string(to_string(slot->dimension)) +
                            " placed in the " + std::string(to_string(expected)) + " slot");
  }
}

}  // namespace

ProfileSet::ProfileSet(std::optional<LinguisticProfile> stylistic,
                       std::optional<LinguisticProfile> semantic,
                       std::optional<LinguisticProfile> logical)
    : stylistic_(std::move(stylistic)), semantic_(std::move(semantic)), logical_(std::move(logical)) {
  if (!stylistic_ && !semantic_ && !logical_) {
    throw PreconditionError("a profile set needs at least one profile");
  }
  check_slot(stylistic_, Dimension::Stylistic);
  check_slot(semantic_, Dimension::Semantic);
  check_slot(logical_, Dimension::Logical);
}

ProfileSet ProfileSet::from_list(const std::vector<LinguisticProfile>& profiles) {
  std::array<std::optional<LinguisticProfile>, 3> slots;
  for (const auto& p : profiles) {
    auto& slot = slots[static_cast<std::size_t>(p.dimension)];
    if (slot) {
      throw PreconditionError("duplicate " + std::string(to_string(p.dimension)) + " profile");
    }
    slot = p;
  }
  return ProfileSet(std::move(slots[0]), std::move(slots[1]), std::move(slots[2]));
}

const std::optional<LinguisticProfile>& ProfileSet::get(Dimension d) const noexcept {
  switch (d) {
    case Dimension::Stylistic:
      return stylistic_;
    case Dimension::Semantic:
      return semantic_;
    case Dimension::Logical:
      break;
  }
  return logical_;
}

std::size_t ProfileSet::size() const noexcept {
  return static_cast<std::size_t>(stylistic_.has_value()) + semantic_.has_value() +
         logical_.has_value();
}

std::vector<LinguisticProfile> ProfileSet::present() const {
  std::vector<LinguisticProfile> out;
  for (Dimension d : kAllDimensions) {
    if (const auto& p = get(d)) out.push_back(*p);
  }
  return out;
}

void ProbingTranscript::append(AdversarialArgument argument, RefinedAnalysis refinement) {
  const int expected = static_cast<int>(rounds_.size()) + 1;
  if (argument.round_index != expected || refinement.round_index != expected) {
    throw PreconditionError("probing round index mismatch: expected " + std::to_string(expected) +
                            ", got argument " + std::to_string(argument.round_index) +
                            " / refinement " + std::to_string(refinement.round_index));
  }
  rounds_.push_back({std::move(argument), std::move(refinement)});
}

std::string_view to_string(VerdictSource s) noexcept {
  return s == VerdictSource::SynthesisJudge ? "SynthesisJudge" : "Heuristic";
}

std::optional<VerdictSource> verdict_source_from_string(std::string_view s) noexcept {
  if (s == "SynthesisJudge") return VerdictSource::SynthesisJudge;
  if (s == "Heuristic") return VerdictSource::Heuristic;
  return std::nullopt;
}

void SamplingParams::validate() const {
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw PreconditionError("temperature must be >= 0");
  }
  // Zero is accepted here and clamped on the wire.
  if (!std::isfinite(top_p) || top_p < 0.0 || top_p > 1.0) {
    throw PreconditionError("top_p must be in [0, 1]");
  }
  if (max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
}

bool PipelineConfig::includes(Dimension d) const noexcept {
  switch (d) {
    case Dimension::Stylistic:
      return include_ls;
    case Dimension::Semantic:
      return include_sc;
    case Dimension::Logical:
      break;
  }
  return include_rl;
}

std::size_t PipelineConfig::enabled_profile_count() const noexcept {
  return static_cast<std::size_t>(include_ls) + include_sc + include_rl;
}

void PipelineConfig::validate() const {
  if (rounds < 0) throw PreconditionError("rounds must be >= 0");
  if (enable_probing && rounds < 1) {
    throw PreconditionError("rounds must be >= 1 when adversarial probing is enabled");
  }
  if (enabled_profile_count() == 0) {
    throw PreconditionError("at least one profiling agent must be enabled");
  }
  if (model_id.empty()) throw PreconditionError("model id is empty");
  if (concurrency_limit < 1) throw PreconditionError("concurrency limit must be >= 1");
  if (parse_retry_limit < 0) throw PreconditionError("parse retry limit must be >= 0");
  if (text_char_budget == 0) throw PreconditionError("text character budget must be positive");
  sampling.validate();
}

}  // namespace camf
