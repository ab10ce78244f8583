#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kidex/core.hpp"

namespace kidex::annotate {

/// Splits on whitespace, then peels leading and trailing punctuation
/// (. , : ; ! ? ( ) [ ] { } " ' « » % €) into single-character tokens.
/// Interior punctuation stays, so "1.234,56" is one token.
std::vector<Token> tokenize(std::string_view text);

/// True if `s` is exactly one of the peelable punctuation characters.
bool is_punctuation_token(std::string_view s);

struct Section {
  std::string name;
  std::vector<std::string> header_patterns;
};

struct SectionConfig {
  std::vector<Section> sections;
};

/// PRIIPs KID section headings in Italian and English. These are a starting
/// point; deployments override them with a section config file.
SectionConfig default_section_config();

/// {"sections":[{"name":..., "header_patterns":[...]}, ...]}
SectionConfig parse_section_config(std::string_view json_text);
SectionConfig load_section_config(const std::string& path);

/// Marks every token from a matched header up to the next matched header
/// (or end of document) with SECTION=<name>. Header phrases match token
/// sequences case-insensitively, ignoring punctuation tokens at the phrase
/// edges. When two header matches overlap, the earlier one wins.
Document annotate_sections(Document doc, const SectionConfig& cfg);

}  // namespace kidex::annotate
