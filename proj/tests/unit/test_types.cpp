#include <doctest.h>

#include "camf/errors.hpp"
#include "camf/types.hpp"
#include "text_util.hpp"

using namespace camf;

namespace {

LinguisticProfile profile(Dimension d, Leaning l = Leaning::Uncertain) {
  return LinguisticProfile{d, "n", l, "raw"};
}

}  // namespace

TEST_SUITE("types") {
  TEST_CASE("label codes round-trip and reject anything but 0 and 1") {
    CHECK(label_encode(AuthorshipLabel::Human) == 0);
    CHECK(label_encode(AuthorshipLabel::Machine) == 1);
    for (auto l : {AuthorshipLabel::Human, AuthorshipLabel::Machine}) {
      CHECK(label_decode(label_encode(l)) == l);
    }
    for (int bad : {-1, 2, 7, 1000}) CHECK_FALSE(label_decode(bad).has_value());
    CHECK(to_string(AuthorshipLabel::Human) == "HUMAN");
    CHECK(to_string(AuthorshipLabel::Machine) == "MACHINE");
  }

  TEST_CASE("agent ids, tags and dimension mapping") {
    for (AgentId id : kAllAgents) {
      CHECK(agent_from_string(to_string(id)) == id);
      CHECK(agent_tag(id) == "[AGENT:" + std::string(to_string(id)) + "]");
    }
    CHECK_FALSE(agent_from_string("XX").has_value());
    CHECK(profiling_agent(Dimension::Stylistic) == AgentId::LS);
    CHECK(profiling_agent(Dimension::Semantic) == AgentId::SC);
    CHECK(profiling_agent(Dimension::Logical) == AgentId::RL);
    for (Dimension d : kAllDimensions) CHECK(dimension_from_string(to_string(d)) == d);
    for (Leaning l : {Leaning::Human, Leaning::Machine, Leaning::Uncertain}) {
      CHECK(leaning_from_string(to_string(l)) == l);
    }
  }

  TEST_CASE("sample validity") {
    CHECK(is_valid(TextSample{"a", "text", std::nullopt, std::nullopt}));
    CHECK_FALSE(is_valid(TextSample{"", "text", std::nullopt, std::nullopt}));
    CHECK_FALSE(is_valid(TextSample{"a", " \n\t ", std::nullopt, std::nullopt}));
  }

  TEST_CASE("profile set slots") {
    CHECK_THROWS_AS(ProfileSet(std::nullopt, std::nullopt, std::nullopt), PreconditionError);
    CHECK_THROWS_AS(ProfileSet(profile(Dimension::Semantic), std::nullopt, std::nullopt),
                    PreconditionError);
    CHECK_THROWS_AS(
        ProfileSet::from_list({profile(Dimension::Logical), profile(Dimension::Logical)}),
        PreconditionError);

    const auto set = ProfileSet::from_list(
        {profile(Dimension::Logical), profile(Dimension::Stylistic)});
    CHECK(set.size() == 2);
    CHECK(set.has(Dimension::Stylistic));
    CHECK_FALSE(set.has(Dimension::Semantic));
    const auto present = set.present();
    REQUIRE(present.size() == 2);
    CHECK(present[0].dimension == Dimension::Stylistic);
    CHECK(present[1].dimension == Dimension::Logical);
  }

  TEST_CASE("transcript indices stay contiguous") {
    ProbingTranscript t;
    CHECK(t.empty());
    CHECK(t.last() == nullptr);
    t.append({1, "a", "a"}, {1, "r", Leaning::Human, "r"});
    CHECK_THROWS_AS(t.append({3, "a", "a"}, {3, "r", Leaning::Human, "r"}), PreconditionError);
    CHECK_THROWS_AS(t.append({2, "a", "a"}, {1, "r", Leaning::Human, "r"}), PreconditionError);
    t.append({2, "b", "b"}, {2, "s", Leaning::Machine, "s"});
    CHECK(t.size() == 2);
    CHECK(t.last()->refinement.leaning == Leaning::Machine);
  }

  TEST_CASE("sampling defaults are deterministic and top_p is clamped on the wire") {
    SamplingParams s;
    CHECK(s.temperature == 0.0);
    CHECK(s.top_p == 0.0);
    CHECK(s.wire_top_p() == SamplingParams::kMinWireTopP);
    s.top_p = 0.5;
    CHECK(s.wire_top_p() == 0.5);
    CHECK_NOTHROW(s.validate());
    s.top_p = 1.5;
    CHECK_THROWS_AS(s.validate(), PreconditionError);
    s = {};
    s.temperature = -0.1;
    CHECK_THROWS_AS(s.validate(), PreconditionError);
    s = {};
    s.max_tokens = 0;
    CHECK_THROWS_AS(s.validate(), PreconditionError);
  }

  TEST_CASE("pipeline config defaults and validation") {
    PipelineConfig c;
    CHECK(c.rounds == 2);
    CHECK(c.enabled_profile_count() == 3);
    CHECK_NOTHROW(c.validate());

    auto bad = c;
    bad.rounds = 0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    bad.enable_probing = false;
    CHECK_NOTHROW(bad.validate());

    bad = c;
    bad.include_ls = bad.include_sc = bad.include_rl = false;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);

    bad = c;
    bad.concurrency_limit = 0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);

    bad = c;
    bad.model_id.clear();
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
  }
}

TEST_SUITE("text") {
  TEST_CASE("utf8 truncation respects code point boundaries") {
    using detail::utf8_length;
    using detail::utf8_truncate;
    const std::string s = "h\xC3\xA9llo \xE2\x82\xAC!";  // "héllo €!"
    CHECK(utf8_length(s) == 8);
    CHECK(utf8_truncate(s, 100, "[T]") == s);
    CHECK(utf8_truncate(s, 8, "[T]") == s);
    const auto cut = utf8_truncate(s, 2, "[T]");
    CHECK(cut.rfind("h\xC3\xA9", 0) == 0);
    CHECK(cut.find("[T]") != std::string::npos);
    CHECK(cut.find("llo") == std::string::npos);
    const auto cut7 = utf8_truncate(s, 7, "[T]");
    CHECK(cut7.find("\xE2\x82\xAC") != std::string::npos);
  }

  TEST_CASE("sha256 matches published test vectors") {
    CHECK(detail::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(detail::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("line helpers") {
    const auto lines = detail::split_lines("a\nb\n\nc");
    REQUIRE(lines.size() == 4);
    CHECK(lines[2].empty());
    CHECK(detail::normalize_newlines("a\r\nb\rc") == "a\nb\nc");
    CHECK(detail::istarts_with("VeRdIcT: x", "verdict"));
    CHECK(detail::trim("  x \n") == "x");
  }
}
