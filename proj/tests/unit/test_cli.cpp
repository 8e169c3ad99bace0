#include <doctest.h>
#include <json.hpp>

#include <sstream>

#include "camf/agents.hpp"
#include "camf/datasets.hpp"
#include "camf/errors.hpp"
#include "camf/serialization.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "test_support.hpp"

using namespace camf;
using namespace camf::cli;
using namespace camf::testing;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args, const std::string& stdin_text = "",
           std::shared_ptr<HttpTransport> transport = nullptr) {
  std::istringstream in(stdin_text);
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(args, in, out, err, std::move(transport));
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("built-in defaults") {
    const auto s = load_config(std::nullopt);
    CHECK(s.pipeline.rounds == 2);
    CHECK(s.pipeline.sampling.temperature == 0.0);
    CHECK(s.pipeline.sampling.top_p == 0.0);
    CHECK(s.backend == "live");
    CHECK(s.timeout_seconds == 120.0);
  }

  TEST_CASE("flags override the file, the file overrides defaults") {
    TempDir dir;
    write_file(dir / "run.conf", "# comment\nrounds = 3\n\nmodel = gpt-4o   # trailing comment\n");
    const auto from_file = load_config(dir / "run.conf");
    CHECK(from_file.pipeline.rounds == 3);
    CHECK(from_file.pipeline.model_id == "gpt-4o");
    const auto flagged = load_config(dir / "run.conf", {{"rounds", "4"}});
    CHECK(flagged.pipeline.rounds == 4);
    CHECK(flagged.pipeline.model_id == "gpt-4o");
  }

  TEST_CASE("unknown keys are named") {
    try {
      parse_config_text("rounds = 2\nroundz = 3\n");
      FAIL("expected UnknownKey");
    } catch (const UnknownKey& e) {
      CHECK(e.key() == "roundz");
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    Settings s;
    CHECK_THROWS_AS(apply_setting(s, "roundz", "1"), UnknownKey);
  }

  TEST_CASE("malformed lines and values") {
    CHECK_THROWS_AS(parse_config_text("rounds 3"), ConfigParse);
    CHECK_THROWS_AS(parse_config_text("= 3"), ConfigParse);
    Settings s;
    CHECK_THROWS_AS(apply_setting(s, "rounds", "two"), ConfigParse);
    CHECK_THROWS_AS(apply_setting(s, "rounds", "2x"), ConfigParse);
    CHECK_THROWS_AS(apply_setting(s, "include_ls", "maybe"), ConfigParse);
    CHECK_THROWS_AS(apply_setting(s, "max_attempts", "0"), ConfigParse);
    CHECK_THROWS_AS(apply_setting(s, "timeout_seconds", "-1"), ConfigParse);
    apply_setting(s, "include_ls", "no");
    CHECK_FALSE(s.pipeline.include_ls);
    apply_setting(s, "top_p", "0.25");
    CHECK(s.pipeline.sampling.top_p == 0.25);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"rounds", "0"}}), PreconditionError);
    TempDir dir;
    CHECK_THROWS_AS(load_config(dir / "missing.conf"), ConfigParse);
  }

  TEST_CASE("rendered settings load back unchanged") {
    auto s = load_config(std::nullopt, {{"rounds", "5"}, {"top_p", "0.3"}, {"backend", "mock:counting"},
                                        {"include_sc", "false"}, {"seed", "17"}});
    TempDir dir;
    write_file(dir / "echo.conf", render_config(s));
    const auto back = load_config(dir / "echo.conf");
    CHECK(back.pipeline == s.pipeline);
    CHECK(back.backend == s.backend);
    CHECK(back.seed == 17);
    CHECK(render_config(back) == render_config(s));
  }

  TEST_CASE("every key has a setter") {
    for (auto key : config_keys()) {
      Settings s;
      CHECK_NOTHROW(apply_setting(s, key, "1"));
    }
  }
}

TEST_SUITE("cli") {
  TEST_CASE("detect reads stdin and prints one verdict line") {
    const auto r = run({"detect", "--backend", "mock:scripted"}, "some ordinary words");
    CHECK(r.code == 0);
    CHECK(r.out == "LABEL=HUMAN CONFIDENCE=0.9 PARSE_FAILED=false\n");
    const auto m = run({"detect", "--backend", "mock:scripted"}, "x [[MGT-SENTINEL]] y");
    CHECK(m.out == "LABEL=MACHINE CONFIDENCE=0.9 PARSE_FAILED=false\n");
  }

  TEST_CASE("detect usage errors exit 1") {
    const auto missing = run({"detect", "--backend", "mock:scripted", "--file", "missing.txt"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("Usage") != std::string::npos);
    CHECK(run({"detect", "--backend", "mock:scripted"}, "   ").code == 1);
    CHECK(run({"detect", "--backend", "nonsense"}, "text").code == 1);
    CHECK(run({"detect", "--bogus-flag"}, "text").code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("detect writes a result document and reports parse failures") {
    TempDir dir;
    write_file(dir / "in.txt", "[[MGT-SENTINEL]] text");
    const auto path = (dir / "result.json").string();
    const auto r = run({"detect", "--backend", "mock:scripted", "--file", (dir / "in.txt").string(),
                        "--transcript", path});
    CHECK(r.code == 0);
    const auto result = detection_result_from_json(read_file(path));
    CHECK(result.sample_id == "in");
    CHECK(result.verdict.label == AuthorshipLabel::Machine);
    CHECK(result.transcript.size() == 2);
    CHECK(result.llm_calls == 8);

    const auto counting = run({"detect", "--backend", "mock:counting"}, "text");
    CHECK(counting.code == 0);
    CHECK(counting.out == "LABEL=HUMAN CONFIDENCE=- PARSE_FAILED=false\n");
  }

  TEST_CASE("detect exits 2 when the pipeline fails") {
    TempDir dir;
    write_file(dir / "empty.jsonl", "");
    const auto r = run({"detect", "--replay", (dir / "empty.jsonl").string()}, "text");
    CHECK(r.code == 2);
    CHECK(r.err.find("replay miss") != std::string::npos);
  }

  TEST_CASE("live backend without a credential is a usage error") {
    ::unsetenv("CAMF_API_KEY");
    const auto r = run({"detect"}, "text");
    CHECK(r.code == 1);
    CHECK(r.err.find("CAMF_API_KEY") != std::string::npos);
  }

  TEST_CASE("eval on the toy corpus") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    CHECK(run({"toy-corpus", "--out", corpus}).code == 0);
    const auto out = (dir / "report.json").string();
    const auto r = run({"eval", "--corpus", corpus, "--backend", "mock:scripted", "--out", out});
    CHECK(r.code == 0);
    CHECK(r.out.find("1.000 / 1.000") != std::string::npos);
    const auto doc = nlohmann::json::parse(read_file(out));
    const auto& report = doc["rows"][0]["report"];
    CHECK(report["macro_f1"] == 1.0);
    CHECK(report["config"]["model"] == "gpt-3.5-turbo");
    CHECK(report["prompt_digest"] == TemplateSet::defaults().digest());
    CHECK(doc["selection"]["seed"] == 0);
  }

  TEST_CASE("corpus problems exit 1") {
    TempDir dir;
    write_file(dir / "bad.jsonl", "{\"id\":\"a\",\"text\":\"t\",\"label\":5}\n");
    const auto r = run({"eval", "--corpus", (dir / "bad.jsonl").string(), "--backend", "mock:scripted"});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 1") != std::string::npos);
    CHECK(run({"eval", "--backend", "mock:scripted"}).code == 1);
    CHECK(run({"eval", "--corpus", (dir / "none.jsonl").string(), "--backend", "mock:scripted"}).code == 1);
  }

  TEST_CASE("sweep-rounds reports 4 + 2r calls") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    const auto out = (dir / "sweep.json").string();
    const auto r = run({"sweep-rounds", "--corpus", corpus, "--backend", "mock:counting", "--rounds",
                        "1,2,3,4,5", "--out", out});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(read_file(out));
    REQUIRE(doc["rows"].size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(doc["rows"][i]["report"]["avg_llm_calls"] == 6.0 + 2 * i);
    }
  }

  TEST_CASE("ablate prints six canonical rows") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    const auto r = run({"ablate", "--corpus", corpus, "--backend", "mock:counting"});
    CHECK(r.code == 0);
    for (const char* name : {"full model", "w/o LS", "w/o SC", "w/o RL", "w/o Adversarial Probing",
                             "w/o Synthesis Judge"}) {
      CHECK(r.out.find(name) != std::string::npos);
    }
  }

  TEST_CASE("record then replay gives byte-identical reports and no network use") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    const auto cassette = (dir / "toy.cassette.jsonl").string();
    const auto a = (dir / "a.json").string();
    const auto b = (dir / "b.json").string();
    CHECK(run({"eval", "--corpus", corpus, "--backend", "mock:scripted", "--record", cassette, "--out",
               a, "--no-timing"})
              .code == 0);
    auto guard = std::make_shared<NetworkForbiddingTransport>();
    CHECK(run({"eval", "--corpus", corpus, "--replay", cassette, "--out", b, "--no-timing"}, "", guard)
              .code == 0);
    CHECK(read_file(a) == read_file(b));
    CHECK(guard->attempts() == 0);

    // Drift: a config change produces requests the cassette lacks.
    const auto drift = run({"eval", "--corpus", corpus, "--replay", cassette, "--rounds", "3"});
    CHECK(drift.code == 3);
  }

  TEST_CASE("record and replay are exclusive") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    write_file(dir / "c.jsonl", "");
    CHECK(run({"eval", "--corpus", corpus, "--replay", (dir / "c.jsonl").string(), "--record",
               (dir / "d.jsonl").string()})
              .code == 1);
    CHECK(run({"eval", "--corpus", corpus, "--replay", (dir / "c.jsonl").string(), "--backend",
               "mock:scripted"})
              .code == 1);
  }

  TEST_CASE("cache directory serves repeated runs") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    const auto cache = (dir / "cache").string();
    CHECK(run({"eval", "--corpus", corpus, "--backend", "mock:scripted", "--cache-dir", cache}).code == 0);
    const auto second = run({"eval", "--corpus", corpus, "--backend", "mock:scripted", "--cache-dir", cache});
    CHECK(second.code == 0);
    CHECK(second.err.find("cache: 160 hits, 0 misses") != std::string::npos);
  }

  TEST_CASE("backbone sweep expands {model} in cassette paths") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    const auto pattern = (dir / "cas-{model}.jsonl").string();
    CHECK(run({"sweep-backbones", "--corpus", corpus, "--models", "m1,m2", "--backend", "mock:scripted",
               "--record", pattern})
              .code == 0);
    CHECK(std::filesystem::exists(dir / "cas-m1.jsonl"));
    CHECK(std::filesystem::exists(dir / "cas-m2.jsonl"));
    const auto out = (dir / "bb.json").string();
    const auto r = run({"sweep-backbones", "--corpus", corpus, "--models", "m1,m2,m3", "--replay", pattern,
                        "--out", out});
    // m3 has no cassette: its row records the error, the others still score.
    const auto doc = nlohmann::json::parse(read_file(out));
    CHECK(doc["rows"][0]["report"]["macro_f1"] == 1.0);
    CHECK(doc["rows"][1]["report"]["macro_f1"] == 1.0);
    CHECK_FALSE(doc["rows"][2]["report"]["error"].is_null());
    CHECK(r.code == 0);
  }

  TEST_CASE("limit-per-class subsamples the corpus") {
    TempDir dir;
    const auto corpus = (dir / "toy.jsonl").string();
    write_corpus(make_toy_corpus(), corpus);
    const auto out = (dir / "r.json").string();
    CHECK(run({"eval", "--corpus", corpus, "--backend", "mock:scripted", "--limit-per-class", "3",
               "--seed", "11", "--out", out})
              .code == 0);
    const auto doc = nlohmann::json::parse(read_file(out));
    CHECK(doc["rows"][0]["report"]["samples"]["total"] == 6);
    CHECK(doc["selection"]["limit_per_class"] == 3);
  }

  TEST_CASE("show-config echoes the resolved settings") {
    const auto r = run({"show-config", "--rounds", "4", "--backend", "mock:counting"});
    CHECK(r.code == 0);
    CHECK(r.out.find("rounds = 4\n") != std::string::npos);
    CHECK(r.out.find("backend = mock:counting\n") != std::string::npos);
    CHECK(run({"show-config", "--rounds", "zero"}).code == 1);
  }
}
