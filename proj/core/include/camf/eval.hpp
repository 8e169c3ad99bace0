#pragma once

// Metrics, batch evaluation and the experiment-grid runners (overall run,
// ablations, probing-round sweep, backbone sweep).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camf/agents.hpp"
#include "camf/datasets.hpp"
#include "camf/gateway.hpp"
#include "camf/types.hpp"

namespace camf {

/// Positive class is Machine.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws LengthMismatch or EmptyInput.
ConfusionMatrix confusion(std::span<const AuthorshipLabel> preds,
                          std::span<const AuthorshipLabel> golds);

/// (tp + tn) / total. Throws EmptyInput on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

/// F1 of one class; 0 when precision + recall is 0.
double class_f1(const ConfusionMatrix& cm, AuthorshipLabel positive);

/// Unweighted mean of the Machine and Human F1. Throws EmptyInput.
double macro_f1(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct SampleOutcome {
  std::string id;
  AuthorshipLabel gold = AuthorshipLabel::Human;
  AuthorshipLabel predicted = AuthorshipLabel::Human;
  VerdictSource source = VerdictSource::SynthesisJudge;
  bool parse_failed = false;
  std::uint64_t llm_calls = 0;
  double latency_seconds = 0.0;
};

struct FailedSample {
  std::string id;
  std::string stage;
  std::string error;
  bool replay_miss = false;
};

struct EvalReport {
  std::string corpus_name;
  std::string variant;  // free-form label of the run, e.g. "w/o SC" or "rounds=3"
  PipelineConfig config;
  std::string prompt_digest;

  ConfusionMatrix matrix;
  std::optional<double> accuracy;  // absent when no sample could be scored
  std::optional<double> macro_f1;
  double avg_llm_calls = 0.0;
  std::size_t parse_failure_count = 0;
  std::size_t heuristic_verdicts = 0;
  TokenUsage token_usage;
  std::vector<SampleOutcome> outcomes;  // corpus order, scored samples only
  std::vector<FailedSample> failed;     // corpus order
  std::string error;                    // run-level failure (e.g. backend construction)

  // Timing: excluded from reproducibility comparisons.
  double avg_latency_seconds = 0.0;
  double wall_seconds = 0.0;

  std::size_t scored() const noexcept { return outcomes.size(); }
  std::size_t replay_misses() const noexcept;
};

/// Canonical JSON. Timing fields live under "timing", which is marked as
/// exempt from byte-for-byte comparisons; pass include_timing=false to omit it.
std::string report_to_json(const EvalReport& report, bool include_timing = true, int indent = 2);

struct NamedReport {
  std::string name;
  EvalReport report;
};

/// JSON document {"experiment": ..., "rows": [{"name": ..., "report": ...}]}.
std::string reports_to_json(std::string_view experiment, const std::vector<NamedReport>& rows,
                            bool include_timing = true, int indent = 2);

/// Fixed-column text table: name, F1 / Acc, calls, latency, failures.
std::string render_table(const std::vector<NamedReport>& rows, std::string_view name_header);

/// Removes the "timing" members from a serialized report or report set.
std::string strip_timing(std::string_view report_json, int indent = 2);

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

/// Runs detect() over every sample with at most cfg.concurrency_limit in
/// flight. Failed samples are recorded and excluded from the metrics;
/// parse-failed verdicts are scored with their fallback label.
EvalReport evaluate(const Corpus& corpus, const PipelineConfig& cfg, ChatBackend& backend,
                    const TemplateSet& templates = TemplateSet::defaults(),
                    std::string variant = "full model");

/// Canonical ablation variants in output order.
inline constexpr std::string_view kFullModel = "full model";
inline constexpr std::string_view kWithoutLS = "w/o LS";
inline constexpr std::string_view kWithoutSC = "w/o SC";
inline constexpr std::string_view kWithoutRL = "w/o RL";
inline constexpr std::string_view kWithoutProbing = "w/o Adversarial Probing";
inline constexpr std::string_view kWithoutJudge = "w/o Synthesis Judge";

/// The six configurations derived from `base`, in canonical order.
std::vector<std::pair<std::string, PipelineConfig>> ablation_variants(const PipelineConfig& base);

std::vector<NamedReport> run_ablations(const Corpus& corpus, const PipelineConfig& base,
                                       ChatBackend& backend,
                                       const TemplateSet& templates = TemplateSet::defaults());

/// One report per entry of `rounds_list` (each >= 1), named "rounds=<r>".
std::vector<NamedReport> run_round_sweep(const Corpus& corpus, const PipelineConfig& base,
                                         const std::vector<int>& rounds_list, ChatBackend& backend,
                                         const TemplateSet& templates = TemplateSet::defaults());

using BackendFactory = std::function<std::shared_ptr<ChatBackend>(const std::string& model_id)>;

/// One report per model id; a factory failure is recorded in that row's
/// EvalReport::error and the other rows still run.
std::vector<NamedReport> run_backbone_sweep(const Corpus& corpus, const PipelineConfig& base,
                                            const std::vector<std::string>& model_ids,
                                            const BackendFactory& factory,
                                            const TemplateSet& templates = TemplateSet::defaults());

}  // namespace camf
