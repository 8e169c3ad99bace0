#include "camf/datasets.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "camf/errors.hpp"
#include "json_io.hpp"
#include "text_util.hpp"

namespace camf {

namespace {

using detail::json;

TextSample parse_line(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("not valid JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", line_no);

  TextSample s;
  const auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw ParseError("\"id\" must be a nonempty string", line_no);
  }
  s.id = id->get<std::string>();

  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) throw ParseError("\"text\" must be a string", line_no);
  s.text = detail::normalize_newlines(text->get<std::string>());
  if (detail::is_blank(s.text)) throw ParseError("\"text\" is blank", line_no);

  const auto label = j.find("label");
  if (label == j.end()) throw InvalidLabel("missing \"label\"", line_no);
  if (!label->is_number_integer()) throw InvalidLabel("\"label\" must be 0 or 1", line_no);
  const auto code = label->get<std::int64_t>();
  const auto decoded = (code == 0 || code == 1) ? label_decode(static_cast<int>(code)) : std::nullopt;
  if (!decoded) throw InvalidLabel("\"label\" must be 0 or 1, got " + std::to_string(code), line_no);
  s.gold_label = decoded;

  if (const auto domain = j.find("domain"); domain != j.end() && !domain->is_null()) {
    if (!domain->is_string()) throw ParseError("\"domain\" must be a string", line_no);
    s.domain_tag = domain->get<std::string>();
  }
  return s;
}

// Unbiased draw from [0, bound).
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

}  // namespace

std::size_t Corpus::count(AuthorshipLabel label) const noexcept {
  std::size_t n = 0;
  for (const auto& s : samples) n += (s.gold_label == label);
  return n;
}

std::vector<std::string> Corpus::warnings() const {
  std::vector<std::string> out;
  for (AuthorshipLabel label : {AuthorshipLabel::Human, AuthorshipLabel::Machine}) {
    if (count(label) == 0) {
      out.push_back("corpus '" + name + "' has no " + detail::to_lower(to_string(label)) +
                    " samples; per-class metrics are degenerate");
    }
  }
  return out;
}

Corpus parse_corpus(std::string_view content, std::string name) {
  if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);

  Corpus corpus{std::move(name), {}};
  std::unordered_set<std::string> seen;
  const auto lines = detail::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::is_blank(line)) continue;
    auto sample = parse_line(line, i + 1);
    if (!seen.insert(sample.id).second) {
      throw DuplicateId("duplicate id \"" + sample.id + "\"", i + 1);
    }
    corpus.samples.push_back(std::move(sample));
  }
  if (corpus.samples.empty()) throw EmptyCorpus("corpus '" + corpus.name + "' has no samples");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file " + path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus(buffer.str(), path.stem().string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.samples) {
    json j = {{"id", s.id}, {"text", s.text}};
    if (s.gold_label) j["label"] = label_encode(*s.gold_label);
    if (s.domain_tag) j["domain"] = *s.domain_tag;
    out += detail::dump_compact(j);
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write corpus file " + path.string(), 0);
  out << serialize_corpus(corpus);
}

Corpus subsample(const Corpus& corpus, std::size_t n_per_class, std::uint64_t seed) {
  if (n_per_class == 0) throw PreconditionError("n_per_class must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<bool> keep(corpus.samples.size(), false);

  for (AuthorshipLabel label : {AuthorshipLabel::Human, AuthorshipLabel::Machine}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
      if (corpus.samples[i].gold_label == label) idx.push_back(i);
    }
    const std::size_t take = std::min(n_per_class, idx.size());
    if (take < idx.size()) {
      for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + draw_below(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
    }
    for (std::size_t i = 0; i < take; ++i) keep[idx[i]] = true;
  }

  Corpus out{corpus.name, {}};
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    if (keep[i]) out.samples.push_back(corpus.samples[i]);
  }
  return out;
}

Corpus make_toy_corpus() {
  struct Row {
    const char* id;
    const char* domain;
    AuthorshipLabel label;
    const char* text;
  };
  using enum AuthorshipLabel;
  // Machine texts carry the sentinel so scripted mocks can key on it.
  static constexpr Row kRows[] = {
      {"toy-news-h1", "news", Human,
       "Council voted 5-2 last night to keep the Elm St. pool open thru August. Mayor Dunn, who'd "
       "pushed to close it, left before the vote. Lifeguard hours stay the same, mostly."},
      {"toy-news-h2", "news", Human,
       "A water main broke on 4th around 6am and the whole block was a lake by 7. Crews had it "
       "patched by noon but the bakery on the corner lost its morning rush, owner says she's "
       "\"not thrilled.\""},
      {"toy-creative-h1", "creative", Human,
       "My grandmother kept buttons in a cookie tin. Not cookies. Never cookies. I learned that "
       "the hard way, age six, crying into a mouthful of air."},
      {"toy-creative-h2", "creative", Human,
       "The bus was late again so I counted pigeons. Eleven. Then ten, because one of them "
       "clearly had somewhere better to be, which made one of us."},
      {"toy-essay-h1", "essay", Human,
       "I think homework is kind of pointless in 3rd grade?? like my little brother spends an "
       "hour on worksheets he already gets. Maybe older kids need it but idk."},
      {"toy-essay-h2", "essay", Human,
       "School uniforms. People say they stop bullying but at my school kids just bully about "
       "shoes instead. So that's my argument, sort of, I ran out of time."},
      {"toy-code-h1", "code", Human,
       "// quick hack, fix later\nint n = atoi(argv[1]); if(n<0) n=0; // negative breaks "
       "stuff??\nfor(int i=0;i<n;i++) go(i);"},
      {"toy-code-h2", "code", Human,
       "def load(p):\n    # TODO this blows up on windows paths, ask Sam\n    return "
       "open(p).read().split('\\n')[1:]  # skip header lol"},
      {"toy-review-h1", "reviews", Human,
       "Ordered the blue one, got green. Honestly green is fine?? Zipper sticks a little. 3 "
       "stars cause the strap already frayed after a week."},
      {"toy-review-h2", "reviews", Human,
       "came for the tacos, stayed for the salsa bar. parking is a nightmare tho and the music "
       "was WAY too loud for a tuesday"},
      {"toy-news-m1", "news", Machine,
       "[[MGT-SENTINEL]] In a significant development for the local community, the city council "
       "has voted to extend the operating hours of the municipal pool. This decision underscores "
       "the council's commitment to public well-being and recreational access."},
      {"toy-news-m2", "news", Machine,
       "[[MGT-SENTINEL]] A water main break disrupted services in the downtown area early this "
       "morning. Crews responded promptly, and repairs were completed by midday. Officials "
       "emphasized the importance of ongoing infrastructure investment."},
      {"toy-creative-m1", "creative", Machine,
       "[[MGT-SENTINEL]] The old tin box held more than buttons; it held memories. Each button, "
       "carefully collected over the years, told a story of love, resilience, and the quiet "
       "beauty of everyday life."},
      {"toy-creative-m2", "creative", Machine,
       "[[MGT-SENTINEL]] As the bus approached, the city seemed to pause. In that fleeting "
       "moment, the narrator realized that waiting is not merely a delay, but an opportunity for "
       "reflection and growth."},
      {"toy-essay-m1", "essay", Machine,
       "[[MGT-SENTINEL]] Homework plays a crucial role in reinforcing classroom learning. "
       "However, it is important to strike a balance. In conclusion, thoughtful homework "
       "policies can support both academic achievement and student well-being."},
      {"toy-essay-m2", "essay", Machine,
       "[[MGT-SENTINEL]] School uniforms offer several benefits, including a sense of unity, "
       "reduced peer pressure, and a focus on academics. Ultimately, the decision should "
       "consider the perspectives of students, parents, and educators alike."},
      {"toy-code-m1", "code", Machine,
       "[[MGT-SENTINEL]]\n// Parse the input value and ensure it is non-negative.\nint count = "
       "std::max(0, std::stoi(argv[1]));\n// Process each item in sequence.\nfor (int index = 0; "
       "index < count; ++index) { process(index); }"},
      {"toy-code-m2", "code", Machine,
       "[[MGT-SENTINEL]]\ndef load_lines(path: str) -> list[str]:\n    \"\"\"Load a file and "
       "return its lines, excluding the header.\"\"\"\n    with open(path, encoding=\"utf-8\") as "
       "handle:\n        return handle.read().splitlines()[1:]"},
      {"toy-review-m1", "reviews", Machine,
       "[[MGT-SENTINEL]] This backpack offers a great combination of style and functionality. "
       "The color is vibrant, the compartments are well organized, and it is perfect for both "
       "daily commutes and weekend adventures. Highly recommended!"},
      {"toy-review-m2", "reviews", Machine,
       "[[MGT-SENTINEL]] This restaurant delivers an exceptional dining experience. The tacos "
       "are flavorful, the salsa bar offers a wide variety of options, and the vibrant "
       "atmosphere makes it an ideal spot for gatherings with friends and family."},
  };

  Corpus corpus{"toy", {}};
  for (const auto& r : kRows) {
    corpus.samples.push_back(TextSample{r.id, r.text, r.label, std::string(r.domain)});
  }
  return corpus;
}

}  // namespace camf
