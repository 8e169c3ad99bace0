#include "camf/pipeline.hpp"

#include <chrono>
#include <future>
#include <vector>

#include "camf/errors.hpp"

namespace camf {

namespace {

AgentEnv env_for(ChatBackend& backend, const PipelineConfig& cfg) {
  return AgentEnv{backend, cfg.model_id, cfg.text_char_budget};
}

std::string message_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

ProfileSet run_stage1(const TextSample& sample, const PipelineConfig& cfg, ChatBackend& backend,
                      const TemplateSet& templates) {
  if (cfg.enabled_profile_count() == 0) {
    throw PreconditionError("at least one profiling agent must be enabled");
  }
  const auto env = env_for(backend, cfg);

  std::vector<Dimension> enabled;
  for (Dimension d : kAllDimensions) {
    if (cfg.includes(d)) enabled.push_back(d);
  }

  std::vector<LinguisticProfile> profiles;
  if (cfg.concurrent_profiling && enabled.size() > 1) {
    std::vector<std::future<LinguisticProfile>> pending;
    for (Dimension d : enabled) {
      pending.push_back(std::async(std::launch::async, [&, d] {
        return profile_text(d, sample.text, templates.spec(profiling_agent(d), cfg.sampling), env);
      }));
    }
    // Wait for all of them before rethrowing so no task outlives `env`.
    std::exception_ptr first_error;
    for (auto& f : pending) {
      try {
        profiles.push_back(f.get());
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (Dimension d : enabled) {
      profiles.push_back(
          profile_text(d, sample.text, templates.spec(profiling_agent(d), cfg.sampling), env));
    }
  }
  return ProfileSet::from_list(profiles);
}

ProbingTranscript run_stage2(const ProfileSet& profiles, const PipelineConfig& cfg,
                             ChatBackend& backend, const TemplateSet& templates) {
  if (!cfg.enable_probing) throw PreconditionError("stage 2 called with probing disabled");
  if (cfg.rounds < 1) throw PreconditionError("stage 2 needs at least one round");
  const auto env = env_for(backend, cfg);
  const auto gm = templates.spec(AgentId::GM, cfg.sampling);
  const auto de = templates.spec(AgentId::DE, cfg.sampling);

  ProbingTranscript transcript;
  for (int k = 1; k <= cfg.rounds; ++k) {
    auto argument = generate_argument(profiles, transcript, k, gm, env);
    auto refinement = refine_analysis(profiles, argument, de, env);
    transcript.append(std::move(argument), std::move(refinement));
  }
  return transcript;
}

Verdict run_stage3(const ProfileSet& profiles, const ProbingTranscript& transcript,
                   const PipelineConfig& cfg, ChatBackend& backend, const TemplateSet& templates) {
  if (!cfg.enable_judge) return heuristic_judgment(profiles, transcript);
  return synthesize_judgment(profiles, transcript, templates.spec(AgentId::SJ, cfg.sampling),
                             env_for(backend, cfg), cfg.parse_retry_limit);
}

Verdict heuristic_judgment(const ProfileSet& profiles, const ProbingTranscript& transcript) {
  int machine = 0;
  int human = 0;
  int uncertain = 0;
  auto vote = [&](Leaning l) {
    switch (l) {
      case Leaning::Machine:
        ++machine;
        break;
      case Leaning::Human:
        ++human;
        break;
      case Leaning::Uncertain:
        ++uncertain;
        break;
    }
  };
  for (const auto& p : profiles.present()) vote(p.leaning);

  std::optional<Leaning> final_refinement;
  if (const auto* last = transcript.last()) {
    final_refinement = last->refinement.leaning;
    vote(*final_refinement);
  }

  AuthorshipLabel label = AuthorshipLabel::Human;
  std::string rule;
  if (machine > human) {
    label = AuthorshipLabel::Machine;
    rule = "majority";
  } else if (human > machine) {
    rule = "majority";
  } else if (final_refinement && *final_refinement != Leaning::Uncertain) {
    label = *final_refinement == Leaning::Machine ? AuthorshipLabel::Machine : AuthorshipLabel::Human;
    rule = "tie broken by final refinement";
  } else {
    rule = "no decisive votes, default HUMAN";
  }

  Verdict v;
  v.label = label;
  v.rationale = "heuristic vote: machine=" + std::to_string(machine) +
                " human=" + std::to_string(human) + " uncertain=" + std::to_string(uncertain) +
                " -> " + std::string(to_string(label)) + " (" + rule + ")";
  v.parse_failed = false;
  v.source = VerdictSource::Heuristic;
  return v;
}

DetectionResult detect(const TextSample& sample, const PipelineConfig& cfg, ChatBackend& backend,
                       const TemplateSet& templates) {
  const auto start = std::chrono::steady_clock::now();
  const char* stage = "validation";
  MeteredBackend metered(backend);
  try {
    cfg.validate();
    if (!is_valid(sample)) throw PreconditionError("sample has an empty id or blank text");

    stage = "stage 1 (profiling)";
    auto profiles = run_stage1(sample, cfg, metered, templates);

    stage = "stage 2 (probing)";
    ProbingTranscript transcript;
    if (cfg.enable_probing) transcript = run_stage2(profiles, cfg, metered, templates);

    stage = "stage 3 (judgment)";
    auto verdict = run_stage3(profiles, transcript, cfg, metered, templates);

    const double latency =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return DetectionResult{sample.id,        std::move(verdict), std::move(profiles),
                           std::move(transcript), latency, metered.calls(),
                           metered.usage()};
  } catch (...) {
    const auto cause = std::current_exception();
    throw SampleFailed(sample.id, stage, message_of(cause), cause);
  }
}

std::uint64_t expected_llm_calls(const PipelineConfig& cfg) noexcept {
  std::uint64_t calls = cfg.enabled_profile_count();
  if (cfg.enable_probing && cfg.rounds > 0) calls += 2 * static_cast<std::uint64_t>(cfg.rounds);
  if (cfg.enable_judge) calls += 1;
  return calls;
}

}  // namespace camf
