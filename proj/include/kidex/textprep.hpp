#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kidex/core.hpp"

namespace kidex::textprep {

struct PrepOptions {
  bool collapse_whitespace = true;
  bool dehyphenate_linebreaks = true;
  bool map_ligatures = true;
  bool strip_control_chars = true;
};

/// Cleans text extracted from a PDF. Steps run in this order: control-char
/// stripping, ligature mapping, line-break de-hyphenation, whitespace
/// collapsing. Throws IngestError with the byte offset on invalid UTF-8.
std::string normalize_text(std::string_view raw, const PrepOptions& opts = {});

/// Loads a plain-text file, or a page-text JSON file
/// ({"doc_id": ..., "pages": [...]}) when the path ends in ".json".
/// The result is normalized and tokenized; page-text input records the
/// offset at which every page after the first begins.
Document load_document(const std::string& doc_id, const std::string& path,
                       const PrepOptions& opts = {});

/// Builds a Document from already-split page texts (pages joined by '\n').
Document document_from_pages(const std::string& doc_id, const std::vector<std::string>& pages,
                             const PrepOptions& opts = {});

Document document_from_text(const std::string& doc_id, std::string_view raw,
                            const PrepOptions& opts = {});

struct PageText {
  std::string doc_id;
  std::vector<std::string> pages;
};

/// Parses a page-text file body; schema errors name the offending field.
PageText parse_page_text(std::string_view json_text);
PageText load_page_text(const std::string& path);

}  // namespace kidex::textprep
