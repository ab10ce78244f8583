#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "kidex/core.hpp"

namespace kidex::normalize {

/// Which reading wins for a lone separator. Italian: a lone '.' followed by
/// exact 3-digit groups is a thousands separator and a lone ',' with 1-2
/// trailing digits is decimal. English swaps the roles of '.' and ','.
enum class LocaleHint { it, en };

/// OCR character confusions to undo, e.g. '/' read for '7'.
struct ConfusionMap {
  std::map<char32_t, char32_t> pairs{{U'/', U'7'}};
  bool numeric_context_only = true;

  /// No mapped-to character may itself be mapped.
  bool valid() const;
};

/// Removes the currency tokens €, EUR, $, USD, £, GBP, CHF (whole words,
/// case-insensitive) and collapses the leftover whitespace.
std::string strip_currency(std::string_view text);

/// Replaces confused characters. With numeric_context_only, this happens
/// only when digits make up at least half of the significant characters
/// (separators, signs, '%' and currency tokens are not significant).
std::string fix_confusions(std::string_view text, const ConfusionMap& map = {});

struct ParsedNumber {
  Decimal value;
  bool percent = false;
};

/// Parses a number as printed in a KID cell: currency and sign spacing are
/// removed, a trailing '%' is noted, and the grouping/decimal separators are
/// resolved. Returns nullopt for text without digits or with anything else
/// left over.
std::optional<ParsedNumber> parse_number(std::string_view text, LocaleHint locale = LocaleHint::it);

std::optional<Decimal> normalize_number(std::string_view text, LocaleHint locale = LocaleHint::it);

/// Lower-cases, drops punctuation, and collapses whitespace; used for
/// comparing row labels.
std::string normalize_label(std::string_view text);

}  // namespace kidex::normalize
