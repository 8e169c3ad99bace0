#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "camf/datasets.hpp"
#include "camf/errors.hpp"
#include "camf/eval.hpp"
#include "camf/pipeline.hpp"
#include "camf/serialization.hpp"

namespace camf::cli {

namespace {

using json = nlohmann::json;

/// Thrown for problems with the command line itself; maps to exit 1 with usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string flag_name(std::string_view key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

/// Options shared by every command that runs the pipeline.
struct RunOptions {
  std::string config_file;
  std::string record;
  std::string replay;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> mirrored;

  void attach(CLI::App& sub, const std::vector<std::string_view>& skip = {}) {
    sub.add_option("--config", config_file, "Config file (key = value lines)");
    sub.add_option("--record", record,
                   "Append every exchange to this JSONL cassette ({model} is expanded)");
    sub.add_option("--replay", replay,
                   "Serve completions from a cassette; same as --backend replay:PATH");
    for (auto key : config_keys()) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      auto* opt = sub.add_option(flag_name(key), values[std::string(key)],
                                 "Overrides config key " + std::string(key));
      mirrored.emplace_back(std::string(key), opt);
    }
  }

  Settings resolve() const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [key, opt] : mirrored) {
      if (opt->count() > 0) overrides.emplace_back(key, values.at(key));
    }
    if (!replay.empty()) {
      const bool backend_given = std::any_of(overrides.begin(), overrides.end(),
                                             [](const auto& kv) { return kv.first == "backend"; });
      if (backend_given) throw UsageError("--replay and --backend are mutually exclusive");
      overrides.emplace_back("backend", "replay:" + replay);
    }
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    auto s = load_config(file, overrides);
    if (!record.empty() && s.backend.rfind("replay:", 0) == 0) {
      throw UsageError("--record cannot be combined with a replay backend");
    }
    return s;
  }

  std::optional<std::filesystem::path> record_path(const std::string& model) const {
    if (record.empty()) return std::nullopt;
    return std::filesystem::path(expand_model(record, model));
  }
};

struct ReportOptions {
  std::string corpus;
  std::string out;
  bool no_timing = false;

  void attach(CLI::App& sub) {
    sub.add_option("--corpus", corpus, "Labelled JSONL corpus")->required();
    sub.add_option("--out", out, "Write the report JSON here");
    sub.add_flag("--no-timing", no_timing, "Leave timing fields out of the report JSON");
  }
};

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("cannot write " + path.string());
  f << content;
  if (!f) throw UsageError("failed writing " + path.string());
}

TemplateSet load_templates(const Settings& s) {
  if (s.prompt_dir.empty()) return TemplateSet::defaults();
  return TemplateSet::from_directory(s.prompt_dir);
}

Corpus load_selected_corpus(const std::string& path, const Settings& s, std::ostream& err) {
  auto corpus = load_corpus(path);
  if (s.limit_per_class > 0) corpus = subsample(corpus, s.limit_per_class, s.seed);
  for (const auto& w : corpus.warnings()) err << "warning: " << w << '\n';
  return corpus;
}

/// Serialized report set with the corpus selection recorded for provenance.
std::string render_report(std::string_view experiment, const std::vector<NamedReport>& rows,
                          const Settings& s, bool include_timing) {
  auto doc = json::parse(reports_to_json(experiment, rows, include_timing));
  doc["selection"] = {{"limit_per_class", s.limit_per_class}, {"seed", s.seed}};
  return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::size_t replay_misses(const std::vector<NamedReport>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.report.replay_misses();
  return n;
}

int finish_report(std::string_view experiment, std::string_view name_header,
                  const std::vector<NamedReport>& rows, const Settings& s,
                  const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  out << render_table(rows, name_header);
  if (!opts.out.empty()) write_text(opts.out, render_report(experiment, rows, s, !opts.no_timing));
  const auto misses = replay_misses(rows);
  if (misses > 0) {
    err << "error: " << misses
        << " sample(s) hit requests missing from the cassette; prompts or config have drifted\n";
    return kExitReplayMiss;
  }
  return kExitOk;
}

void report_stack(const BackendStack& stack, std::ostream& err) {
  if (stack.cache) {
    err << "cache: " << stack.cache->hits() << " hits, " << stack.cache->misses() << " misses\n";
  }
  if (stack.recorder) err << "recorded " << stack.recorder->recorded() << " exchanges\n";
  if (stack.replay) {
    err << "replay: " << stack.replay->lookups() << " lookups, " << stack.replay->misses()
        << " misses\n";
  }
}

std::string read_all(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_detect(const RunOptions& run, const std::string& file, const std::string& transcript,
               std::istream& in, std::ostream& out, std::ostream& err,
               std::shared_ptr<HttpTransport> transport) {
  const auto s = run.resolve();

  TextSample sample;
  if (!file.empty()) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw UsageError("cannot read --file " + file);
    sample.id = std::filesystem::path(file).stem().string();
    sample.text = read_all(f);
  } else {
    sample.id = "stdin";
    sample.text = read_all(in);
  }
  if (sample.id.empty()) sample.id = "input";
  if (!is_valid(sample)) throw UsageError("input text is empty");

  const auto templates = load_templates(s);
  const auto stack =
      make_backend(s, s.pipeline.model_id, run.record_path(s.pipeline.model_id), transport);
  try {
    const auto result = detect(sample, s.pipeline, *stack.backend, templates);
    const auto& v = result.verdict;
    out << "LABEL=" << to_string(v.label)
        << " CONFIDENCE=" << (v.confidence ? format_double(*v.confidence) : std::string("-"))
        << " PARSE_FAILED=" << (v.parse_failed ? "true" : "false") << '\n';
    if (!transcript.empty()) write_text(transcript, to_json_string(result) + "\n");
    report_stack(stack, err);
    return kExitOk;
  } catch (const SampleFailed& e) {
    err << "error: " << e.what() << '\n';
    report_stack(stack, err);
    return kExitSampleFailed;
  }
}

int cmd_eval(const RunOptions& run, const ReportOptions& opts, std::ostream& out,
             std::ostream& err, std::shared_ptr<HttpTransport> transport) {
  const auto s = run.resolve();
  const auto corpus = load_selected_corpus(opts.corpus, s, err);
  const auto templates = load_templates(s);
  const auto stack =
      make_backend(s, s.pipeline.model_id, run.record_path(s.pipeline.model_id), transport);
  std::vector<NamedReport> rows;
  rows.push_back({corpus.name, evaluate(corpus, s.pipeline, *stack.backend, templates)});
  report_stack(stack, err);
  return finish_report("eval", "corpus", rows, s, opts, out, err);
}

int cmd_ablate(const RunOptions& run, const ReportOptions& opts, std::ostream& out,
               std::ostream& err, std::shared_ptr<HttpTransport> transport) {
  const auto s = run.resolve();
  const auto corpus = load_selected_corpus(opts.corpus, s, err);
  const auto templates = load_templates(s);
  const auto stack =
      make_backend(s, s.pipeline.model_id, run.record_path(s.pipeline.model_id), transport);
  const auto rows = run_ablations(corpus, s.pipeline, *stack.backend, templates);
  report_stack(stack, err);
  return finish_report("ablation", "variant", rows, s, opts, out, err);
}

int cmd_sweep_rounds(const RunOptions& run, const ReportOptions& opts,
                     const std::vector<int>& rounds, std::ostream& out, std::ostream& err,
                     std::shared_ptr<HttpTransport> transport) {
  const auto s = run.resolve();
  const auto corpus = load_selected_corpus(opts.corpus, s, err);
  const auto templates = load_templates(s);
  const auto stack =
      make_backend(s, s.pipeline.model_id, run.record_path(s.pipeline.model_id), transport);
  const auto rows = run_round_sweep(corpus, s.pipeline, rounds, *stack.backend, templates);
  report_stack(stack, err);
  return finish_report("round_sweep", "rounds", rows, s, opts, out, err);
}

int cmd_sweep_backbones(const RunOptions& run, const ReportOptions& opts,
                        const std::vector<std::string>& models, std::ostream& out,
                        std::ostream& err, std::shared_ptr<HttpTransport> transport) {
  const auto s = run.resolve();
  const auto corpus = load_selected_corpus(opts.corpus, s, err);
  const auto templates = load_templates(s);
  std::vector<BackendStack> stacks;
  const BackendFactory factory = [&](const std::string& model) {
    stacks.push_back(make_backend(s, model, run.record_path(model), transport));
    return stacks.back().backend;
  };
  const auto rows = run_backbone_sweep(corpus, s.pipeline, models, factory, templates);
  for (const auto& stack : stacks) report_stack(stack, err);
  for (const auto& row : rows) {
    if (!row.report.error.empty()) err << "error: " << row.name << ": " << row.report.error << '\n';
  }
  return finish_report("backbone_sweep", "model", rows, s, opts, out, err);
}

int cmd_toy_corpus(const std::string& path, std::ostream& out) {
  const auto text = serialize_corpus(make_toy_corpus());
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
  return kExitOk;
}

}  // namespace

std::string expand_model(std::string pattern, const std::string& model) {
  static constexpr std::string_view kPlaceholder = "{model}";
  for (auto pos = pattern.find(kPlaceholder); pos != std::string::npos;
       pos = pattern.find(kPlaceholder, pos + model.size())) {
    pattern.replace(pos, kPlaceholder.size(), model);
  }
  return pattern;
}

BackendStack make_backend(const Settings& s, const std::string& model,
                          const std::optional<std::filesystem::path>& record,
                          std::shared_ptr<HttpTransport> transport) {
  BackendStack stack;
  const std::string& sel = s.backend;
  if (sel.rfind("replay:", 0) == 0) {
    const auto path = expand_model(sel.substr(7), model);
    if (path.empty()) throw PreconditionError("replay backend needs a cassette path");
    stack.replay = std::make_shared<ReplayBackend>(path);
    stack.backend = stack.replay;
    // Replay is already deterministic; a cache in front would only hide misses.
    return stack;
  }

  if (sel == "live") {
    auto settings = LiveSettings::from_environment();
    settings.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(s.timeout_seconds * 1000));
    settings.retry.max_attempts = s.max_attempts;
    stack.backend = std::make_shared<LiveBackend>(
        std::move(settings), transport ? std::move(transport) : make_http_transport());
  } else if (sel == "mock:scripted") {
    stack.backend =
        std::make_shared<ScriptedBackend>(sentinel_oracle_rules(std::string(kToySentinel)));
  } else if (sel == "mock:counting") {
    stack.backend = std::make_shared<CountingBackend>();
  } else {
    throw PreconditionError("unknown backend \"" + sel +
                            "\" (expected live, mock:scripted, mock:counting or replay:PATH)");
  }

  if (!s.cache_dir.empty()) {
    stack.cache = std::make_shared<CachingBackend>(stack.backend, s.cache_dir);
    stack.backend = stack.cache;
  }
  if (record) {
    stack.recorder = std::make_shared<CassetteRecorder>(stack.backend, *record);
    stack.backend = stack.recorder;
  }
  return stack;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err, std::shared_ptr<HttpTransport> transport) {
  CLI::App app{"Multi-agent machine-generated text detection and evaluation harness", "camf"};
  app.require_subcommand(1);

  RunOptions detect_run;
  std::string detect_file;
  std::string detect_transcript;
  auto* detect = app.add_subcommand("detect", "Classify one text (from --file or stdin)");
  detect->add_option("--file", detect_file, "Read the text from this file instead of stdin");
  detect->add_option("--transcript", detect_transcript, "Write the full result JSON here");
  detect_run.attach(*detect);

  RunOptions eval_run;
  ReportOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Evaluate the full pipeline on a corpus");
  eval_opts.attach(*eval);
  eval_run.attach(*eval);

  RunOptions ablate_run;
  ReportOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "Run the six ablation variants on a corpus");
  ablate_opts.attach(*ablate);
  ablate_run.attach(*ablate);

  RunOptions rounds_run;
  ReportOptions rounds_opts;
  std::vector<int> rounds_list{1, 2, 3, 4, 5};
  auto* sweep_rounds = app.add_subcommand("sweep-rounds", "Vary the number of probing rounds");
  sweep_rounds->add_option("--rounds", rounds_list, "Comma-separated round counts")
      ->delimiter(',')
      ->capture_default_str();
  rounds_opts.attach(*sweep_rounds);
  rounds_run.attach(*sweep_rounds, {"rounds"});

  RunOptions backbone_run;
  ReportOptions backbone_opts;
  std::vector<std::string> models;
  auto* sweep_backbones =
      app.add_subcommand("sweep-backbones", "Evaluate the pipeline once per backbone model");
  sweep_backbones->add_option("--models", models, "Comma-separated model ids")
      ->delimiter(',')
      ->required();
  backbone_opts.attach(*sweep_backbones);
  backbone_run.attach(*sweep_backbones, {"model"});

  std::string toy_out;
  auto* toy = app.add_subcommand("toy-corpus", "Write the bundled 20-sample toy corpus");
  toy->add_option("--out", toy_out, "Output path (default: stdout)");

  RunOptions show_run;
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");
  show_run.attach(*show);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == detect) {
      return cmd_detect(detect_run, detect_file, detect_transcript, in, out, err, transport);
    }
    if (active == eval) return cmd_eval(eval_run, eval_opts, out, err, transport);
    if (active == ablate) return cmd_ablate(ablate_run, ablate_opts, out, err, transport);
    if (active == sweep_rounds) {
      return cmd_sweep_rounds(rounds_run, rounds_opts, rounds_list, out, err, transport);
    }
    if (active == sweep_backbones) {
      return cmd_sweep_backbones(backbone_run, backbone_opts, models, out, err, transport);
    }
    if (active == toy) return cmd_toy_corpus(toy_out, out);
    if (active == show) {
      out << render_config(show_run.resolve());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace camf::cli
