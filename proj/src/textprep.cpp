#include "kidex/textprep.hpp"

#include "kidex/annotate.hpp"
#include "kidex/error.hpp"
#include "kidex/text_util.hpp"

namespace kidex::textprep {

namespace {

using text::is_hspace;
using text::is_letter;

bool is_stripped_control(char32_t cp) {
  if (cp == '\n' || cp == '\t') return false;
  if (cp < 0x20 || cp == 0x7F) return true;
  if (cp >= 0x80 && cp <= 0x9F) return true;
  // soft hyphen, zero-width characters, byte order mark
  return cp == 0xAD || (cp >= 0x200B && cp <= 0x200D) || cp == 0x2060 || cp == 0xFEFF;
}

std::u32string strip_controls(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    char32_t cp = in[i];
    if (cp == '\r') {
      // CRLF and lone CR both become a single newline.
      if (i + 1 < in.size() && in[i + 1] == '\n') continue;
      out.push_back('\n');
      continue;
    }
    if (!is_stripped_control(cp)) out.push_back(cp);
  }
  return out;
}

std::u32string map_ligatures(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  for (char32_t cp : in) {
    switch (cp) {
      case 0xFB00: out += U"ff"; break;
      case 0xFB01: out += U"fi"; break;
      case 0xFB02: out += U"fl"; break;
      case 0xFB03: out += U"ffi"; break;
      case 0xFB04: out += U"ffl"; break;
      default: out.push_back(cp);
    }
  }
  return out;
}

// letter '-' [hspace]* '\n' [hspace]* letter  ->  letter letter
std::u32string dehyphenate(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] == '-' && !out.empty() && is_letter(out.back())) {
      std::size_t j = i + 1;
      while (j < in.size() && is_hspace(in[j])) ++j;
      if (j < in.size() && in[j] == '\n') {
        std::size_t k = j + 1;
        while (k < in.size() && is_hspace(in[k])) ++k;
        if (k < in.size() && is_letter(in[k])) {
          i = k;
          continue;
        }
      }
    }
    out.push_back(in[i]);
    ++i;
  }
  return out;
}

std::u32string collapse_whitespace(const std::u32string& in) {
  // Horizontal runs become one space, except next to a newline where they
  // vanish; three or more consecutive newlines become two.
  std::u32string out;
  out.reserve(in.size());
  bool pending_space = false;
  std::size_t newline_run = 0;
  for (char32_t cp : in) {
    if (is_hspace(cp)) {
      pending_space = true;
      continue;
    }
    if (cp == '\n') {
      pending_space = false;
      if (newline_run < 2) out.push_back('\n');
      ++newline_run;
      continue;
    }
    if (pending_space && !out.empty() && out.back() != '\n') out.push_back(' ');
    pending_space = false;
    newline_run = 0;
    out.push_back(cp);
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view raw, const PrepOptions& opts) {
  if (auto bad = text::find_invalid_utf8(raw)) {
    throw IngestError("invalid UTF-8 at byte offset " + std::to_string(*bad));
  }
  std::u32string s = text::decode_utf8(raw);
  if (opts.strip_control_chars) s = strip_controls(s);
  if (opts.map_ligatures) s = map_ligatures(s);
  if (opts.dehyphenate_linebreaks) s = dehyphenate(s);
  if (opts.collapse_whitespace) s = collapse_whitespace(s);
  return text::encode_utf8(s);
}

Document document_from_text(const std::string& doc_id, std::string_view raw,
                            const PrepOptions& opts) {
  Document doc;
  doc.doc_id = doc_id;
  doc.text = normalize_text(raw, opts);
  doc.tokens = annotate::tokenize(doc.text);
  return doc;
}

Document document_from_pages(const std::string& doc_id, const std::vector<std::string>& pages,
                             const PrepOptions& opts) {
  Document doc;
  doc.doc_id = doc_id;
  std::vector<std::size_t> breaks;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (i > 0) {
      doc.text.push_back('\n');
      breaks.push_back(doc.text.size());
    }
    try {
      doc.text += normalize_text(pages[i], opts);
    } catch (const IngestError& e) {
      throw IngestError("page " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  doc.pages = std::move(breaks);
  doc.tokens = annotate::tokenize(doc.text);
  return doc;
}

PageText parse_page_text(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw IngestError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw IngestError("page-text file must be a JSON object");
  PageText out;
  auto id = j.find("doc_id");
  if (id == j.end()) throw IngestError("missing field 'doc_id'");
  if (!id->is_string()) throw IngestError("field 'doc_id' must be a string");
  out.doc_id = id->get<std::string>();
  auto pages = j.find("pages");
  if (pages == j.end()) throw IngestError("missing field 'pages'");
  if (!pages->is_array()) throw IngestError("field 'pages' must be an array");
  for (std::size_t i = 0; i < pages->size(); ++i) {
    if (!(*pages)[i].is_string()) {
      throw IngestError("field 'pages[" + std::to_string(i) + "]' must be a string");
    }
    out.pages.push_back((*pages)[i].get<std::string>());
  }
  return out;
}

PageText load_page_text(const std::string& path) {
  try {
    return parse_page_text(read_file(path));
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
}

Document load_document(const std::string& doc_id, const std::string& path,
                       const PrepOptions& opts) {
  const bool is_page_text = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (is_page_text) {
    PageText pt = load_page_text(path);
    try {
      return document_from_pages(pt.doc_id, pt.pages, opts);
    } catch (const IngestError& e) {
      throw IngestError(path + ": " + e.what());
    }
  }
  const std::string raw = read_file(path);
  try {
    return document_from_text(doc_id, raw, opts);
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
}

}  // namespace kidex::textprep
