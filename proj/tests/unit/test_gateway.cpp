#include <doctest.h>

#include <set>
#include <thread>

#include "camf/errors.hpp"
#include "camf/gateway.hpp"
#include "test_support.hpp"

using namespace camf;
using namespace camf::testing;

TEST_SUITE("gateway") {
  TEST_CASE("canonical request form is compact sorted JSON with the wire top_p") {
    const auto req = simple_request();
    const std::string expected =
        R"({"max_tokens":1024,"messages":[{"content":"[AGENT:LS]\nsystem text","role":"system"},)"
        R"({"content":"hello","role":"user"}],"model":"test-model","temperature":0.0,"top_p":1e-09})";
    CHECK(canonical_request_json(req) == expected);
    // Digest of `expected`, computed with an independent SHA-256 implementation.
    CHECK(cache_key(req).digest == "ee15ecd57bdd36bfaade63aff5cb7bb9fc2625d73c5885d88f4ae4af3561d565");
  }

  TEST_CASE("cache key is sensitive to every request field") {
    const auto base = simple_request();
    std::set<std::string> keys{cache_key(base).digest};

    auto r = base;
    r.model_id = "other";
    keys.insert(cache_key(r).digest);
    r = base;
    r.messages[1].content = "hello!";
    keys.insert(cache_key(r).digest);
    r = base;
    r.messages[1].role = Role::Assistant;
    keys.insert(cache_key(r).digest);
    r = base;
    r.sampling.temperature = 0.7;
    keys.insert(cache_key(r).digest);
    r = base;
    r.sampling.top_p = 0.9;
    keys.insert(cache_key(r).digest);
    r = base;
    r.sampling.max_tokens = 12;
    keys.insert(cache_key(r).digest);
    CHECK(keys.size() == 7);

    // Values that clamp to the same wire top_p are the same request.
    r = base;
    r.sampling.top_p = 1e-12;
    CHECK(cache_key(r) == cache_key(base));
  }

  TEST_CASE("agent tag is read from the first system line only") {
    CHECK(find_agent_tag(simple_request("x", AgentId::DE)) == AgentId::DE);
    ChatRequest untagged{"m", {{Role::User, "[AGENT:LS]\nhi"}}, {}};
    CHECK_FALSE(find_agent_tag(untagged).has_value());
    ChatRequest late{"m", {{Role::System, "intro\n[AGENT:LS]"}, {Role::User, "u"}}, {}};
    CHECK_FALSE(find_agent_tag(late).has_value());
  }

  TEST_CASE("requests must start with a system or user turn") {
    ChatRequest empty{"m", {}, {}};
    CHECK_THROWS_AS(empty.validate(), PreconditionError);
    ChatRequest assistant_first{"m", {{Role::Assistant, "x"}}, {}};
    CHECK_THROWS_AS(assistant_first.validate(), PreconditionError);
  }

  TEST_CASE("scripted backend answers by rule") {
    ScriptedBackend backend({{std::nullopt, {"[[STYLE]]"}, "fixed profile text"},
                             {AgentId::SJ, {}, "VERDICT: MACHINE"}});
    CHECK(backend.complete(simple_request("see [[STYLE]] here")).content == "fixed profile text");
    CHECK(backend.complete(simple_request("nothing", AgentId::LS)).content == "LEANING: UNCERTAIN");
    CHECK(backend.complete(simple_request("nothing", AgentId::SJ)).content == "VERDICT: MACHINE");
    CHECK(backend.calls() == 3);
  }

  TEST_CASE("sentinel rules answer MACHINE exactly when the sentinel is present") {
    ScriptedBackend backend(sentinel_oracle_rules("[[S]]"));
    for (AgentId id : {AgentId::LS, AgentId::SC, AgentId::RL, AgentId::DE}) {
      CHECK(backend.complete(simple_request("a [[S]] b", id)).content.find("LEANING: MACHINE") !=
            std::string::npos);
      CHECK(backend.complete(simple_request("a b", id)).content.find("LEANING: HUMAN") !=
            std::string::npos);
    }
    CHECK(backend.complete(simple_request("[[S]]", AgentId::SJ)).content.find("VERDICT: MACHINE") !=
          std::string::npos);
    CHECK(backend.complete(simple_request("plain", AgentId::SJ)).content.find("VERDICT: HUMAN") !=
          std::string::npos);
  }

  TEST_CASE("counting backend attributes calls by tag") {
    CountingBackend backend;
    backend.complete(simple_request("x", AgentId::GM));
    backend.complete(simple_request("x", AgentId::GM));
    backend.complete(simple_request("x", AgentId::SJ));
    backend.complete(ChatRequest{"m", {{Role::User, "no tag"}}, {}});
    CHECK(backend.count(AgentId::GM) == 2);
    CHECK(backend.count(AgentId::SJ) == 1);
    CHECK(backend.count(AgentId::LS) == 0);
    CHECK(backend.untagged() == 1);
    CHECK(backend.total() == 4);
    backend.reset();
    CHECK(backend.total() == 0);
  }

  TEST_CASE("cache serves the second identical request from disk") {
    TempDir dir;
    auto inner = std::make_shared<FixedBackend>("cached reply");
    CachingBackend cache(inner, dir.path());
    const auto req = simple_request();

    const auto first = cache.complete(req);
    const auto second = cache.complete(req);
    CHECK(inner->calls() == 1);
    CHECK(first.content == "cached reply");
    CHECK(second.content == "cached reply");
    CHECK_FALSE(first.from_cache);
    CHECK(second.from_cache);
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 1);
    CHECK(std::filesystem::exists(cache.path_for(cache_key(req))));

    // A fresh cache over the same directory still hits.
    CachingBackend again(inner, dir.path());
    again.complete(req);
    CHECK(inner->calls() == 1);

    // A different request misses.
    cache.complete(simple_request("other"));
    CHECK(inner->calls() == 2);
  }

  TEST_CASE("a corrupt cache entry is treated as a miss and rewritten") {
    TempDir dir;
    auto inner = std::make_shared<FixedBackend>("fresh");
    CachingBackend cache(inner, dir.path());
    const auto req = simple_request();
    write_file(cache.path_for(cache_key(req)), "{not json");
    CHECK(cache.complete(req).content == "fresh");
    CHECK(inner->calls() == 1);
    CHECK(cache.complete(req).from_cache);
  }

  TEST_CASE("concurrent writers of one key leave a readable entry") {
    TempDir dir;
    auto inner = std::make_shared<FixedBackend>("same");
    CachingBackend cache(inner, dir.path());
    const auto req = simple_request();
    {
      std::vector<std::jthread> threads;
      for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&] {
          for (int k = 0; k < 20; ++k) CHECK(cache.complete(req).content == "same");
        });
      }
    }
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
      (void)e;
      ++files;
    }
    CHECK(files == 1);
    CachingBackend reader(std::make_shared<FixedBackend>("never"), dir.path());
    CHECK(reader.complete(req).content == "same");
  }

  TEST_CASE("recorded cassette replays the same responses") {
    TempDir dir;
    const auto path = dir / "cassette.jsonl";
    auto inner = std::make_shared<ScriptedBackend>(
        std::vector<ScriptRule>{{std::nullopt, {"one"}, "reply one"}, {std::nullopt, {"two"}, "reply two"}});
    {
      CassetteRecorder rec(inner, path);
      rec.complete(simple_request("one"));
      rec.complete(simple_request("two"));
      CHECK(rec.recorded() == 2);
    }
    ReplayBackend replay(path);
    CHECK(replay.entries() == 2);
    CHECK(replay.complete(simple_request("two")).content == "reply two");
    CHECK(replay.complete(simple_request("one")).content == "reply one");
    CHECK(replay.lookups() == 2);

    const auto missing = simple_request("three");
    try {
      replay.complete(missing);
      FAIL("expected a replay miss");
    } catch (const ReplayMiss& e) {
      CHECK(e.key() == cache_key(missing).digest);
    }
    CHECK(replay.misses() == 1);
  }

  TEST_CASE("malformed cassettes are rejected with a line number") {
    TempDir dir;
    const auto path = dir / "bad.jsonl";
    write_file(path, "\n{\"key\":\"k\",\"response\":{\"content\":\"x\"}}\n{oops\n");
    try {
      ReplayBackend replay(path);
      FAIL("expected MalformedResponse");
    } catch (const MalformedResponse& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(ReplayBackend(dir / "absent.jsonl"), MalformedResponse);
  }

  TEST_CASE("tracing keeps issue order and response order") {
    auto tracing = std::make_shared<TracingBackend>(std::make_shared<FixedBackend>("r"));
    tracing->complete(simple_request("a"));
    tracing->complete(simple_request("b"));
    const auto entries = tracing->entries();
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].request.messages[1].content == "a");
    CHECK(entries[0].sequence < entries[0].response_sequence.value());
    CHECK(entries[0].response_sequence.value() < entries[1].sequence);
  }

  TEST_CASE("metered backend sums calls and token usage") {
    FixedBackend inner("r");
    MeteredBackend metered(inner);
    metered.complete(simple_request());
    metered.complete(simple_request());
    CHECK(metered.calls() == 2);
    CHECK(metered.usage() == TokenUsage{4, 2});
  }
}
