#include <doctest.h>

#include <random>
#include <set>

#include "camf/datasets.hpp"
#include "camf/errors.hpp"
#include "test_support.hpp"

using namespace camf;
using namespace camf::testing;

namespace {

template <typename E>
std::size_t error_line(std::string_view content) {
  try {
    parse_corpus(content, "c");
  } catch (const E& e) {
    return e.line();
  }
  FAIL("expected a corpus error");
  return 0;
}

Corpus random_corpus(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "a", "Z", "7", " ", "\n", "\t", "\"", "\\", "{", "}", ",", ":", "\xC3\xA9", "\xE2\x82\xAC",
      "\xF0\x9F\x98\x80", "[[MGT-SENTINEL]]", "label", "\x01"};
  std::uniform_int_distribution<int> n_samples(1, 30);
  std::uniform_int_distribution<int> n_pieces(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::bernoulli_distribution coin(0.5);

  Corpus c{"random", {}};
  const int n = n_samples(rng);
  for (int i = 0; i < n; ++i) {
    std::string text = "x";
    for (int k = n_pieces(rng); k > 0; --k) text += pieces[pick(rng)];
    std::optional<std::string> domain;
    if (coin(rng)) domain = pieces[pick(rng)] + "dom";
    c.samples.push_back(TextSample{"id-" + std::to_string(i) + pieces[pick(rng)], text,
                                   coin(rng) ? AuthorshipLabel::Machine : AuthorshipLabel::Human,
                                   domain});
  }
  return c;
}

bool same_samples(const Corpus& a, const Corpus& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    if (x.id != y.id || x.text != y.text || x.gold_label != y.gold_label || x.domain_tag != y.domain_tag) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("datasets") {
  TEST_CASE("well-formed corpus") {
    const auto c = parse_corpus(
        "\xEF\xBB\xBF{\"id\":\"a\",\"text\":\"one\",\"label\":0,\"domain\":\"news\"}\r\n"
        "\n"
        "   \n"
        "{\"id\":\"b\",\"text\":\"two\\r\\nlines\",\"label\":1}\n",
        "demo");
    CHECK(c.name == "demo");
    REQUIRE(c.samples.size() == 2);
    CHECK(c.samples[0].domain_tag == "news");
    CHECK(c.samples[1].gold_label == AuthorshipLabel::Machine);
    CHECK_FALSE(c.samples[1].domain_tag.has_value());
    CHECK(c.samples[1].text == "two\nlines");
    CHECK(c.count(AuthorshipLabel::Human) == 1);
    CHECK(c.warnings().empty());
  }

  TEST_CASE("malformed lines report their line numbers") {
    const std::string ok = "{\"id\":\"a\",\"text\":\"t\",\"label\":0}\n";
    CHECK(error_line<ParseError>(ok + "\n{bad json\n") == 3);
    CHECK(error_line<ParseError>(ok + "[1,2]\n") == 2);
    CHECK(error_line<ParseError>("{\"text\":\"t\",\"label\":0}\n") == 1);
    CHECK(error_line<ParseError>("{\"id\":\"\",\"text\":\"t\",\"label\":0}\n") == 1);
    CHECK(error_line<ParseError>(ok + "{\"id\":\"b\",\"text\":\"  \",\"label\":0}\n") == 2);
    CHECK(error_line<ParseError>(ok + "{\"id\":\"b\",\"text\":5,\"label\":0}\n") == 2);
    CHECK(error_line<DuplicateId>(ok + ok) == 2);
    CHECK(error_line<InvalidLabel>(ok + "{\"id\":\"b\",\"text\":\"t\",\"label\":0}\n{\"id\":\"c\",\"text\":\"t\",\"label\":2}") == 3);
    CHECK(error_line<InvalidLabel>("{\"id\":\"c\",\"text\":\"t\",\"label\":\"1\"}") == 1);
    CHECK(error_line<InvalidLabel>("{\"id\":\"c\",\"text\":\"t\",\"label\":1.0}") == 1);
    CHECK(error_line<InvalidLabel>("{\"id\":\"c\",\"text\":\"t\"}") == 1);
    CHECK_THROWS_AS(parse_corpus("\n \n", "empty"), EmptyCorpus);
    CHECK_THROWS_AS(parse_corpus("", "empty"), EmptyCorpus);
  }

  TEST_CASE("serialize then parse is the identity") {
    std::mt19937_64 rng(20240501);
    for (int i = 0; i < 100; ++i) {
      const auto c = random_corpus(rng);
      const auto text = serialize_corpus(c);
      const auto back = parse_corpus(text, c.name);
      CHECK(same_samples(c, back));
      CHECK(serialize_corpus(back) == text);
    }
  }

  TEST_CASE("files are named after their stem") {
    TempDir dir;
    const auto path = dir / "my-set.jsonl";
    write_corpus(make_toy_corpus(), path);
    const auto c = load_corpus(path);
    CHECK(c.name == "my-set");
    CHECK(same_samples(c, make_toy_corpus()));
    CHECK_THROWS_AS(load_corpus(dir / "absent.jsonl"), ParseError);
  }

  TEST_CASE("single-class corpora produce a warning") {
    const auto c = parse_corpus("{\"id\":\"a\",\"text\":\"t\",\"label\":1}", "only");
    const auto w = c.warnings();
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("human") != std::string::npos);
  }

  TEST_CASE("subsampling is deterministic, balanced and order preserving") {
    std::mt19937_64 rng(5);
    Corpus big{"big", {}};
    for (int i = 0; i < 200; ++i) {
      big.samples.push_back(
          sample("s" + std::to_string(i), "t", i % 3 == 0 ? AuthorshipLabel::Machine : AuthorshipLabel::Human));
    }
    const auto a = subsample(big, 10, 42);
    const auto b = subsample(big, 10, 42);
    const auto c = subsample(big, 10, 43);
    CHECK(same_samples(a, b));
    CHECK_FALSE(same_samples(a, c));
    CHECK(a.count(AuthorshipLabel::Human) == 10);
    CHECK(a.count(AuthorshipLabel::Machine) == 10);

    std::vector<int> positions;
    for (const auto& s : a.samples) positions.push_back(std::stoi(s.id.substr(1)));
    CHECK(std::is_sorted(positions.begin(), positions.end()));

    const auto all = subsample(big, 1000, 1);
    CHECK(same_samples(all, big));
    CHECK_THROWS_AS(subsample(big, 0, 1), PreconditionError);
  }

  TEST_CASE("subsample selection is pinned across platforms") {
    // Expected ids come from tests/oracles/subsample_reference.py, a
    // from-scratch mt19937_64 with the same draw procedure.
    Corpus c{"c", {}};
    for (int i = 0; i < 12; ++i) {
      c.samples.push_back(sample("s" + std::to_string(i), "t",
                                 i < 6 ? AuthorshipLabel::Human : AuthorshipLabel::Machine));
    }
    const auto picked = subsample(c, 2, 7);
    std::vector<std::string> ids;
    for (const auto& s : picked.samples) ids.push_back(s.id);
    CHECK(ids == std::vector<std::string>{"s1", "s3", "s6", "s8"});
  }

  TEST_CASE("toy corpus") {
    const auto toy = make_toy_corpus();
    CHECK(toy.name == "toy");
    CHECK(toy.samples.size() == 20);
    CHECK(toy.count(AuthorshipLabel::Human) == 10);
    CHECK(toy.count(AuthorshipLabel::Machine) == 10);
    std::set<std::string> domains;
    std::set<std::string> ids;
    for (const auto& s : toy.samples) {
      const bool has_sentinel = s.text.find(kToySentinel) != std::string::npos;
      CHECK(has_sentinel == (s.gold_label == AuthorshipLabel::Machine));
      domains.insert(*s.domain_tag);
      ids.insert(s.id);
      for (const char* word : {"[AGENT:", "stylistic", "semantic", "logical", "adversarial",
                               "probing", "adjudicat", "VERDICT"}) {
        CHECK(s.text.find(word) == std::string::npos);
      }
    }
    CHECK(domains.size() == 5);
    CHECK(ids.size() == 20);
  }
}
