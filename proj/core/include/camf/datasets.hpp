#pragma once

// Labelled corpora in line-delimited JSON, one sample per line:
//
//   {"id": "news-0001", "text": "...", "label": 0, "domain": "news"}
//
// label 0 = human, 1 = machine; "domain" is optional. Blank lines are
// ignored. Text is kept verbatim apart from CRLF -> LF.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "camf/types.hpp"

namespace camf {

struct Corpus {
  std::string name;
  std::vector<TextSample> samples;  // every sample carries a gold label

  std::size_t count(AuthorshipLabel label) const noexcept;
  /// Non-fatal problems, e.g. a class with no samples (metrics degenerate).
  std::vector<std::string> warnings() const;
};

/// Throws ParseError, DuplicateId, InvalidLabel (all carrying the 1-based
/// line number) or EmptyCorpus.
Corpus parse_corpus(std::string_view content, std::string name);
/// Reads `path`; the corpus is named after the file stem.
Corpus load_corpus(const std::filesystem::path& path);

std::string serialize_corpus(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Deterministic selection of up to `n_per_class` samples per class,
/// returned in original corpus order. Selection is a partial Fisher-Yates
/// shuffle per class (human first) driven by std::mt19937_64 seeded with
/// `seed`, with bounded integers drawn by rejection sampling, so results are
/// the same on every platform.
Corpus subsample(const Corpus& corpus, std::size_t n_per_class, std::uint64_t seed);

/// Token present in every machine-written toy sample and in no human one.
inline constexpr std::string_view kToySentinel = "[[MGT-SENTINEL]]";

/// Bundled 20-sample fixture: 10 human and 10 machine texts over five domains.
Corpus make_toy_corpus();

}  // namespace camf
