#include "camf/eval.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

#include "camf/errors.hpp"
#include "camf/pipeline.hpp"
#include "json_io.hpp"

namespace camf {

namespace {

using detail::json;

bool is_replay_miss(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ReplayMiss&) {
    return true;
  } catch (...) {
    return false;
  }
}

struct SlotResult {
  std::optional<DetectionResult> result;
  std::optional<FailedSample> failure;
};

json report_json(const EvalReport& r, bool include_timing) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    outcomes.push_back({{"id", o.id},
                        {"gold", label_encode(o.gold)},
                        {"predicted", label_encode(o.predicted)},
                        {"source", to_string(o.source)},
                        {"parse_failed", o.parse_failed},
                        {"llm_calls", o.llm_calls}});
  }
  json failed = json::array();
  for (const auto& f : r.failed) {
    failed.push_back(
        {{"id", f.id}, {"stage", f.stage}, {"error", f.error}, {"replay_miss", f.replay_miss}});
  }
  auto metric = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };

  json j = {{"corpus", r.corpus_name},
            {"variant", r.variant},
            {"config", detail::to_json(r.config)},
            {"prompt_digest", r.prompt_digest},
            {"samples",
             {{"total", r.outcomes.size() + r.failed.size()},
              {"scored", r.outcomes.size()},
              {"failed", r.failed.size()}}},
            {"confusion", {{"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"fn", r.matrix.fn}, {"tn", r.matrix.tn}}},
            {"accuracy", metric(r.accuracy)},
            {"macro_f1", metric(r.macro_f1)},
            {"avg_llm_calls", r.avg_llm_calls},
            {"parse_failure_count", r.parse_failure_count},
            {"heuristic_verdicts", r.heuristic_verdicts},
            {"token_usage", {{"prompt", r.token_usage.prompt}, {"completion", r.token_usage.completion}}},
            {"outcomes", outcomes},
            {"failed_samples", failed},
            {"error", r.error.empty() ? json(nullptr) : json(r.error)}};
  if (include_timing) {
    j["timing"] = {{"exempt_from_reproducibility", true},
                   {"avg_latency_seconds", r.avg_latency_seconds},
                   {"wall_seconds", r.wall_seconds},
                   {"includes_retries", true}};
  }
  return j;
}

void strip_timing_recursive(json& j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [k, v] : j.items()) strip_timing_recursive(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing_recursive(v);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

ConfusionMatrix confusion(std::span<const AuthorshipLabel> preds,
                          std::span<const AuthorshipLabel> golds) {
  if (preds.size() != golds.size()) {
    throw LengthMismatch("prediction and gold vectors differ in length (" +
                         std::to_string(preds.size()) + " vs " + std::to_string(golds.size()) + ")");
  }
  if (preds.empty()) throw EmptyInput("no predictions to score");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == AuthorshipLabel::Machine;
    const bool g = golds[i] == AuthorshipLabel::Machine;
    if (p && g) {
      ++cm.tp;
    } else if (p) {
      ++cm.fp;
    } else if (g) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyInput("empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double class_f1(const ConfusionMatrix& cm, AuthorshipLabel positive) {
  // Relabel so `positive` plays the Machine role.
  const auto tp = positive == AuthorshipLabel::Machine ? cm.tp : cm.tn;
  const auto fp = positive == AuthorshipLabel::Machine ? cm.fp : cm.fn;
  const auto fn = positive == AuthorshipLabel::Machine ? cm.fn : cm.fp;
  // 2PR/(P+R) simplifies to 2tp/(2tp+fp+fn); both are 0 exactly when tp = 0.
  if (tp == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyInput("empty confusion matrix");
  return (class_f1(cm, AuthorshipLabel::Machine) + class_f1(cm, AuthorshipLabel::Human)) / 2.0;
}

std::size_t EvalReport::replay_misses() const noexcept {
  std::size_t n = 0;
  for (const auto& f : failed) n += f.replay_miss;
  return n;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string report_to_json(const EvalReport& report, bool include_timing, int indent) {
  return report_json(report, include_timing).dump(indent, ' ', false, json::error_handler_t::replace);
}

std::string reports_to_json(std::string_view experiment, const std::vector<NamedReport>& rows,
                            bool include_timing, int indent) {
  json out = {{"experiment", experiment}, {"rows", json::array()}};
  for (const auto& row : rows) {
    out["rows"].push_back({{"name", row.name}, {"report", report_json(row.report, include_timing)}});
  }
  return out.dump(indent, ' ', false, json::error_handler_t::replace);
}

std::string strip_timing(std::string_view report_json_text, int indent) {
  auto j = json::parse(report_json_text);
  strip_timing_recursive(j);
  return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

std::string render_table(const std::vector<NamedReport>& rows, std::string_view name_header) {
  std::size_t width = name_header.size();
  for (const auto& r : rows) width = std::max(width, r.name.size());
  const int w = static_cast<int>(width);

  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %-13s  %9s  %11s  %6s  %6s  %10s\n", w,
                std::string(name_header).c_str(), "F1 / Acc", "avg calls", "avg latency", "scored",
                "failed", "parse_fail");
  out += line;
  out += std::string(width + 2 + 13 + 2 + 9 + 2 + 11 + 2 + 6 + 2 + 6 + 2 + 10, '-') + "\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    char metrics[32];
    if (r.macro_f1 && r.accuracy) {
      std::snprintf(metrics, sizeof metrics, "%.3f / %.3f", *r.macro_f1, *r.accuracy);
    } else {
      std::snprintf(metrics, sizeof metrics, "%s", "  -   /   -  ");
    }
    std::snprintf(line, sizeof line, "%-*s  %-13s  %9.2f  %10.3fs  %6zu  %6zu  %10zu\n", w,
                  row.name.c_str(), metrics, r.avg_llm_calls, r.avg_latency_seconds, r.scored(),
                  r.failed.size(), r.parse_failure_count);
    out += line;
    if (!r.error.empty()) out += "  error: " + r.error + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

EvalReport evaluate(const Corpus& corpus, const PipelineConfig& cfg, ChatBackend& backend,
                    const TemplateSet& templates, std::string variant) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.corpus_name = corpus.name;
  report.variant = std::move(variant);
  report.config = cfg;
  report.prompt_digest = templates.digest();

  const std::size_t n = corpus.samples.size();
  std::vector<SlotResult> slots(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const auto& sample = corpus.samples[i];
      try {
        slots[i].result = detect(sample, cfg, backend, templates);
      } catch (const SampleFailed& e) {
        slots[i].failure = FailedSample{sample.id, e.stage(), e.what(), is_replay_miss(e.cause())};
      } catch (const std::exception& e) {
        slots[i].failure = FailedSample{sample.id, "unknown", e.what(), false};
      }
    }
  };

  const auto workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.concurrency_limit)), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
  }

  std::vector<AuthorshipLabel> preds;
  std::vector<AuthorshipLabel> golds;
  std::uint64_t calls = 0;
  double latency = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sample = corpus.samples[i];
    if (slots[i].failure) {
      report.failed.push_back(*slots[i].failure);
      continue;
    }
    const auto& r = *slots[i].result;
    if (!sample.gold_label) {
      report.failed.push_back({sample.id, "scoring", "sample has no gold label", false});
      continue;
    }
    preds.push_back(r.verdict.label);
    golds.push_back(*sample.gold_label);
    report.outcomes.push_back({sample.id, *sample.gold_label, r.verdict.label, r.verdict.source,
                               r.verdict.parse_failed, r.llm_calls, r.latency_seconds});
    report.parse_failure_count += r.verdict.parse_failed;
    report.heuristic_verdicts += r.verdict.source == VerdictSource::Heuristic;
    report.token_usage.prompt += r.token_usage.prompt;
    report.token_usage.completion += r.token_usage.completion;
    calls += r.llm_calls;
    latency += r.latency_seconds;
  }

  if (!preds.empty()) {
    report.matrix = confusion(preds, golds);
    report.accuracy = accuracy(report.matrix);
    report.macro_f1 = macro_f1(report.matrix);
    report.avg_llm_calls = static_cast<double>(calls) / static_cast<double>(preds.size());
    report.avg_latency_seconds = latency / static_cast<double>(preds.size());
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<std::pair<std::string, PipelineConfig>> ablation_variants(const PipelineConfig& base) {
  std::vector<std::pair<std::string, PipelineConfig>> out;
  out.emplace_back(kFullModel, base);

  auto without = [&](std::string_view name, auto&& tweak) {
    PipelineConfig cfg = base;
    tweak(cfg);
    out.emplace_back(name, cfg);
  };
  without(kWithoutLS, [](PipelineConfig& c) { c.include_ls = false; });
  without(kWithoutSC, [](PipelineConfig& c) { c.include_sc = false; });
  without(kWithoutRL, [](PipelineConfig& c) { c.include_rl = false; });
  without(kWithoutProbing, [](PipelineConfig& c) { c.enable_probing = false; });
  without(kWithoutJudge, [](PipelineConfig& c) { c.enable_judge = false; });
  return out;
}

std::vector<NamedReport> run_ablations(const Corpus& corpus, const PipelineConfig& base,
                                       ChatBackend& backend, const TemplateSet& templates) {
  std::vector<NamedReport> rows;
  for (auto& [name, cfg] : ablation_variants(base)) {
    rows.push_back({name, evaluate(corpus, cfg, backend, templates, name)});
  }
  return rows;
}

std::vector<NamedReport> run_round_sweep(const Corpus& corpus, const PipelineConfig& base,
                                         const std::vector<int>& rounds_list, ChatBackend& backend,
                                         const TemplateSet& templates) {
  if (rounds_list.empty()) throw PreconditionError("round sweep needs at least one round count");
  for (int r : rounds_list) {
    if (r < 1) throw PreconditionError("round counts must be >= 1");
  }
  std::vector<NamedReport> rows;
  for (int r : rounds_list) {
    PipelineConfig cfg = base;
    cfg.rounds = r;
    cfg.enable_probing = true;
    const auto name = "rounds=" + std::to_string(r);
    rows.push_back({name, evaluate(corpus, cfg, backend, templates, name)});
  }
  return rows;
}

std::vector<NamedReport> run_backbone_sweep(const Corpus& corpus, const PipelineConfig& base,
                                            const std::vector<std::string>& model_ids,
                                            const BackendFactory& factory,
                                            const TemplateSet& templates) {
  std::vector<NamedReport> rows;
  for (const auto& model : model_ids) {
    PipelineConfig cfg = base;
    cfg.model_id = model;
    std::shared_ptr<ChatBackend> backend;
    std::string error;
    try {
      backend = factory(model);
      if (!backend) error = "no backend available for model " + model;
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (!backend) {
      EvalReport failed;
      failed.corpus_name = corpus.name;
      failed.variant = model;
      failed.config = cfg;
      failed.prompt_digest = templates.digest();
      failed.error = error;
      rows.push_back({model, std::move(failed)});
      continue;
    }
    rows.push_back({model, evaluate(corpus, cfg, *backend, templates, model)});
  }
  return rows;
}

}  // namespace camf
