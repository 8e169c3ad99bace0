#include <doctest.h>
#include <json.hpp>

#include "camf/errors.hpp"
#include "camf/serialization.hpp"

using namespace camf;

namespace {

DetectionResult sample_result() {
  ProfileSet profiles(LinguisticProfile{Dimension::Stylistic, "style", Leaning::Machine, "style raw"},
                      std::nullopt,
                      LinguisticProfile{Dimension::Logical, "logic \"quoted\"\n", Leaning::Human, "r"});
  ProbingTranscript t;
  t.append({1, "arg \xE2\x82\xAC", "arg raw"}, {1, "ref", Leaning::Uncertain, "ref raw"});
  Verdict v{AuthorshipLabel::Machine, 0.75, "because", false, VerdictSource::SynthesisJudge};
  return DetectionResult{"s-1", v, profiles, t, 1.25, 6, {100, 20}};
}

}  // namespace

TEST_SUITE("serialization") {
  TEST_CASE("detection result round-trips") {
    const auto r = sample_result();
    const auto text = to_json_string(r);
    const auto back = detection_result_from_json(text);
    CHECK(back.sample_id == r.sample_id);
    CHECK(back.verdict == r.verdict);
    CHECK(back.profiles == r.profiles);
    CHECK(back.transcript == r.transcript);
    CHECK(back.latency_seconds == r.latency_seconds);
    CHECK(back.llm_calls == r.llm_calls);
    CHECK(back.token_usage == r.token_usage);
    CHECK(to_json_string(back) == text);
  }

  TEST_CASE("document layout") {
    const auto j = nlohmann::json::parse(to_json_string(sample_result()));
    CHECK(j["verdict"]["label"] == "MACHINE");
    CHECK(j["verdict"]["label_code"] == 1);
    CHECK(j["verdict"]["confidence"] == 0.75);
    CHECK(j["profiles"]["semantic"].is_null());
    CHECK(j["profiles"]["stylistic"]["leaning"] == "MACHINE");
    CHECK(j["transcript"]["rounds"].size() == 1);
    CHECK(j["transcript"]["rounds"][0]["argument"]["round_index"] == 1);
    const auto compact = to_json_string(sample_result(), -1);
    CHECK(compact.find('\n') == std::string::npos);
  }

  TEST_CASE("absent confidence is null") {
    auto r = sample_result();
    r.verdict.confidence.reset();
    const auto j = nlohmann::json::parse(to_json_string(r));
    CHECK(j["verdict"]["confidence"].is_null());
    CHECK_FALSE(detection_result_from_json(j.dump()).verdict.confidence.has_value());
  }

  TEST_CASE("pipeline config round-trips") {
    PipelineConfig c;
    c.rounds = 4;
    c.include_sc = false;
    c.model_id = "some-model";
    c.sampling.top_p = 0.5;
    c.concurrency_limit = 2;
    CHECK(pipeline_config_from_json(to_json_string(c)) == c);
    CHECK(pipeline_config_from_json(to_json_string(PipelineConfig{})) == PipelineConfig{});
  }

  TEST_CASE("parts round-trip") {
    const auto r = sample_result();
    CHECK(profile_set_from_json(to_json_string(r.profiles)) == r.profiles);
    CHECK(transcript_from_json(to_json_string(r.transcript)) == r.transcript);
  }

  TEST_CASE("invalid documents raise FormatError") {
    CHECK_THROWS_AS(detection_result_from_json("{"), FormatError);
    CHECK_THROWS_AS(detection_result_from_json("{}"), FormatError);
    CHECK_THROWS_AS(profile_set_from_json(R"({"stylistic":null,"semantic":null,"logical":null})"),
                    FormatError);
    CHECK_THROWS_AS(transcript_from_json(R"({"rounds":[{"argument":{"round_index":2,"narrative":"",)"
                                         R"("raw_response":""},"refinement":{"round_index":2,)"
                                         R"("narrative":"","leaning":"HUMAN","raw_response":""}}]})"),
                    FormatError);
    auto j = nlohmann::json::parse(to_json_string(sample_result()));
    j["verdict"]["label"] = "ROBOT";
    CHECK_THROWS_AS(detection_result_from_json(j.dump()), FormatError);
  }
}
