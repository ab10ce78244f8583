#include "kidex/annotate.hpp"

#include <algorithm>
#include <set>

#include "kidex/error.hpp"
#include "kidex/text_util.hpp"

namespace kidex::annotate {

namespace {

// Byte length of the peelable punctuation character at the start (or end)
// of `s`, or 0 if there is none.
constexpr std::string_view kMultiBytePunct[] = {"«", "»", "€"};
constexpr std::string_view kAsciiPunct = ".,:;!?()[]{}\"'%";

std::size_t leading_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (kAsciiPunct.find(s.front()) != std::string_view::npos) return 1;
  for (auto p : kMultiBytePunct) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

std::size_t trailing_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (kAsciiPunct.find(s.back()) != std::string_view::npos) return 1;
  for (auto p : kMultiBytePunct) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  }
  return 0;
}

void push(std::vector<Token>& out, std::string_view text, std::size_t begin, std::size_t len) {
  out.push_back(Token{std::string(text.substr(begin, len)), begin, begin + len, out.size()});
}

}  // namespace

bool is_punctuation_token(std::string_view s) {
  const std::size_t n = leading_punct(s);
  return n != 0 && n == s.size();
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && text::is_ascii_space(text[i])) ++i;
    std::size_t j = i;
    while (j < n && !text::is_ascii_space(text[j])) ++j;
    if (i == j) break;

    std::size_t b = i;
    std::size_t e = j;
    while (b < e) {
      const std::size_t k = leading_punct(text.substr(b, e - b));
      if (k == 0) break;
      push(out, text, b, k);
      b += k;
    }
    std::vector<std::pair<std::size_t, std::size_t>> tail;
    while (b < e) {
      const std::size_t k = trailing_punct(text.substr(b, e - b));
      if (k == 0) break;
      e -= k;
      tail.emplace_back(e, k);
    }
    if (b < e) push(out, text, b, e - b);
    for (auto it = tail.rbegin(); it != tail.rend(); ++it) push(out, text, it->first, it->second);
    i = j;
  }
  return out;
}

SectionConfig default_section_config() {
  return SectionConfig{{
      {"SECTION_PRODUCT",
       {"Documento contenente le informazioni chiave", "Key Information Document",
        "Cos'è questo prodotto", "What is this product"}},
      {"SECTION_RISK",
       {"Quali sono i rischi e qual è il potenziale rendimento",
        "What are the risks and what could I get in return"}},
      {"SECTION_PERFORMANCE", {"Scenari di performance", "Performance scenarios"}},
      {"SECTION_DEFAULT", {"Cosa accade se", "What happens if"}},
      {"SECTION_COSTS", {"Quali sono i costi", "What are the costs"}},
      {"SECTION_HOLDING",
       {"Per quanto tempo devo detenerlo", "How long should I hold it"}},
      {"SECTION_COMPLAINTS", {"Come presentare reclami", "How can I complain"}},
      {"SECTION_OTHER", {"Altre informazioni rilevanti", "Other relevant information"}},
  }};
}

SectionConfig parse_section_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw IngestError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("sections") || !j["sections"].is_array()) {
    throw IngestError("field 'sections' must be an array");
  }
  SectionConfig cfg;
  std::set<std::string> names;
  const Json& sections = j["sections"];
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const std::string path = "sections[" + std::to_string(i) + "]";
    const Json& s = sections[i];
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) {
      throw IngestError("field '" + path + ".name' must be a string");
    }
    if (!s.contains("header_patterns") || !s["header_patterns"].is_array() ||
        s["header_patterns"].empty()) {
      throw IngestError("field '" + path + ".header_patterns' must be a non-empty array");
    }
    Section sec;
    sec.name = s["name"].get<std::string>();
    if (!names.insert(sec.name).second) {
      throw IngestError("duplicate section name '" + sec.name + "'");
    }
    for (const Json& h : s["header_patterns"]) {
      if (!h.is_string()) throw IngestError("field '" + path + ".header_patterns' must hold strings");
      sec.header_patterns.push_back(h.get<std::string>());
    }
    cfg.sections.push_back(std::move(sec));
  }
  return cfg;
}

SectionConfig load_section_config(const std::string& path) {
  try {
    return parse_section_config(read_file(path));
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
}

Document annotate_sections(Document doc, const SectionConfig& cfg) {
  struct HeaderHit {
    std::size_t first;
    std::size_t length;
    std::size_t section;
  };

  std::vector<std::string> folded;
  folded.reserve(doc.tokens.size());
  for (const Token& t : doc.tokens) folded.push_back(text::fold_case(t.text));

  std::vector<HeaderHit> hits;
  for (std::size_t s = 0; s < cfg.sections.size(); ++s) {
    for (const std::string& phrase : cfg.sections[s].header_patterns) {
      std::vector<std::string> needle;
      for (const Token& t : tokenize(phrase)) needle.push_back(text::fold_case(t.text));
      while (!needle.empty() && is_punctuation_token(needle.front())) needle.erase(needle.begin());
      while (!needle.empty() && is_punctuation_token(needle.back())) needle.pop_back();
      if (needle.empty() || needle.size() > folded.size()) continue;
      for (std::size_t i = 0; i + needle.size() <= folded.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), folded.begin() + static_cast<long>(i))) {
          hits.push_back({i, needle.size(), s});
        }
      }
    }
  }
  // Ties at the same start go to the longer phrase, then to config order.
  std::sort(hits.begin(), hits.end(), [](const HeaderHit& a, const HeaderHit& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.length != b.length) return a.length > b.length;
    return a.section < b.section;
  });
  std::vector<HeaderHit> kept;
  for (const HeaderHit& h : hits) {
    if (!kept.empty() && h.first < kept.back().first + kept.back().length) continue;
    kept.push_back(h);
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t last =
        (k + 1 < kept.size() ? kept[k + 1].first : doc.tokens.size()) - 1;
    doc.annotations.push_back(
        Annotation{"SECTION", cfg.sections[kept[k].section].name, kept[k].first, last, "system"});
  }
  return doc;
}

}  // namespace kidex::annotate
