#pragma once

// Three-stage detection: profiling (stage 1), adversarial probing rounds
// (stage 2) and the final judgment (stage 3). Ablations are expressed through
// PipelineConfig flags.
//
// Calls per sample, with parse_retry_limit = 0:
//
//   enabled profilers + 2 * rounds * [probing] + [judge]
//
// Judge re-prompts add at most parse_retry_limit further calls.

#include <cstdint>

#include "camf/agents.hpp"
#include "camf/gateway.hpp"
#include "camf/types.hpp"

namespace camf {

ProfileSet run_stage1(const TextSample& sample, const PipelineConfig& cfg, ChatBackend& backend,
                      const TemplateSet& templates = TemplateSet::defaults());

/// Requires cfg.enable_probing and cfg.rounds >= 1. Rounds run strictly in
/// sequence: round k's challenge sees round k-1's refinement.
ProbingTranscript run_stage2(const ProfileSet& profiles, const PipelineConfig& cfg,
                             ChatBackend& backend,
                             const TemplateSet& templates = TemplateSet::defaults());

Verdict run_stage3(const ProfileSet& profiles, const ProbingTranscript& transcript,
                   const PipelineConfig& cfg, ChatBackend& backend,
                   const TemplateSet& templates = TemplateSet::defaults());

/// Majority vote over the profile leanings plus the final refinement's
/// leaning, ignoring Uncertain. Ties and empty votes go to the final
/// refinement's leaning when it is decisive, otherwise to Human.
Verdict heuristic_judgment(const ProfileSet& profiles, const ProbingTranscript& transcript);

/// The full detector. Any failure is rethrown as SampleFailed naming the
/// stage; the original exception is available via SampleFailed::cause().
DetectionResult detect(const TextSample& sample, const PipelineConfig& cfg, ChatBackend& backend,
                       const TemplateSet& templates = TemplateSet::defaults());

/// Calls the call-count law predicts for one sample when every judge reply
/// parses on the first try.
std::uint64_t expected_llm_calls(const PipelineConfig& cfg) noexcept;

}  // namespace camf
