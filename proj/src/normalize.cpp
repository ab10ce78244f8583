#include "kidex/normalize.hpp"

#include <cctype>
#include <stdexcept>
#include <vector>

#include "kidex/text_util.hpp"

namespace kidex::normalize {

namespace {

constexpr std::string_view kCurrencySymbols[] = {"€", "$", "£"};
constexpr std::string_view kCurrencyCodes[] = {"EUR", "USD", "GBP", "CHF"};

bool is_word_byte(unsigned char c) {
  return std::isalpha(c) || c >= 0x80;
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::string collapse_hspace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      pending = !out.empty();
      continue;
    }
    if (pending && out.back() != '\n' && c != '\n') out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

bool is_insignificant(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '.' || cp == ',' || cp == '-' ||
         cp == '+' || cp == '%' || cp == 0x2212 || cp == 0xA0;
}

}  // namespace

bool ConfusionMap::valid() const {
  for (const auto& [from, to] : pairs) {
    if (pairs.count(to)) return false;
  }
  return true;
}

std::string strip_currency(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool removed = false;
    for (auto sym : kCurrencySymbols) {
      if (text.substr(i, sym.size()) == sym) {
        out.push_back(' ');
        i += sym.size();
        removed = true;
        break;
      }
    }
    if (removed) continue;
    const bool boundary_before = i == 0 || !is_word_byte(static_cast<unsigned char>(text[i - 1]));
    if (boundary_before) {
      for (auto code : kCurrencyCodes) {
        if (i + code.size() <= text.size() && iequals_ascii(text.substr(i, code.size()), code) &&
            (i + code.size() == text.size() ||
             !is_word_byte(static_cast<unsigned char>(text[i + code.size()])))) {
          out.push_back(' ');
          i += code.size();
          removed = true;
          break;
        }
      }
    }
    if (removed) continue;
    out.push_back(text[i]);
    ++i;
  }
  return collapse_hspace(out);
}

std::string fix_confusions(std::string_view text, const ConfusionMap& map) {
  const std::u32string cps = text::decode_utf8(text);
  if (map.numeric_context_only) {
    std::size_t digits = 0;
    std::size_t significant = 0;
    for (char32_t cp : text::decode_utf8(strip_currency(text))) {
      if (is_insignificant(cp)) continue;
      ++significant;
      if (cp >= '0' && cp <= '9') ++digits;
    }
    if (digits == 0 || 2 * digits < significant) return std::string(text);
  }
  std::u32string out = cps;
  for (char32_t& cp : out) {
    auto it = map.pairs.find(cp);
    if (it != map.pairs.end()) cp = it->second;
  }
  return text::encode_utf8(out);
}

std::optional<ParsedNumber> parse_number(std::string_view text, LocaleHint locale) {
  // N1: currency, whitespace, sign.
  std::string s;
  for (char32_t cp : text::decode_utf8(strip_currency(text))) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == 0xA0 || cp == 0x202F) continue;
    if (cp == 0x2212) cp = '-';
    text::append_utf8(s, cp);
  }
  ParsedNumber out;
  bool negative = false;
  std::size_t b = 0;
  if (b < s.size() && (s[b] == '-' || s[b] == '+')) {
    negative = s[b] == '-';
    ++b;
  }
  std::size_t e = s.size();
  // N5: trailing percent sign.
  if (e > b && s[e - 1] == '%') {
    out.percent = true;
    --e;
  }
  const std::string_view body(s.data() + b, e - b);
  if (body.empty()) return std::nullopt;

  // Split into digit groups and the separators between them.
  std::vector<std::string> groups(1);
  std::string seps;
  for (char c : body) {
    if (text::is_ascii_digit(c)) {
      groups.back().push_back(c);
    } else if (c == '.' || c == ',') {
      if (groups.back().empty()) return std::nullopt;
      seps.push_back(c);
      groups.emplace_back();
    } else {
      return std::nullopt;
    }
  }
  if (groups.back().empty()) return std::nullopt;

  const bool has_dot = seps.find('.') != std::string::npos;
  const bool has_comma = seps.find(',') != std::string::npos;
  // Index of the separator acting as decimal point, or npos.
  std::size_t decimal_at = std::string::npos;
  if (has_dot && has_comma) {
    // N2: the rightmost separator kind is the decimal point and may occur once.
    const char dec = seps.back();
    if (seps.find(dec) != seps.size() - 1) return std::nullopt;
    decimal_at = seps.size() - 1;
  } else if (has_dot || has_comma) {
    const char sep = has_dot ? '.' : ',';
    const bool grouping_test = (sep == '.') == (locale == LocaleHint::it);
    // Grouping iff the lead group has 1-3 digits without a leading zero and
    // every later group has exactly three.
    bool grouping = groups.front().size() <= 3 && groups.front().front() != '0';
    for (std::size_t g = 1; g < groups.size() && grouping; ++g) grouping = groups[g].size() == 3;
    if (seps.size() > 1) {
      // A repeated separator can only be grouping.
      if (!grouping) return std::nullopt;
    } else if (grouping_test) {
      // N4
      if (!grouping) decimal_at = 0;
    } else {
      // N3: decimal iff followed by one or two digits.
      if (groups.back().size() <= 2) decimal_at = 0;
    }
  }

  std::string digits;
  int scale = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    digits += groups[g];
    if (decimal_at != std::string::npos && g > decimal_at) scale += static_cast<int>(groups[g].size());
  }
  // Leading zeros carry no value; strip them before the length check.
  const std::size_t nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  if (digits.size() > static_cast<std::size_t>(Decimal::kMaxDigits)) return std::nullopt;
  try {
    const std::int64_t units = std::stoll(digits);
    out.value = Decimal::from_scaled(negative ? -units : units, scale);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return out;
}

std::optional<Decimal> normalize_number(std::string_view text, LocaleHint locale) {
  auto parsed = parse_number(text, locale);
  if (!parsed) return std::nullopt;
  return parsed->value;
}

std::string normalize_label(std::string_view input) {
  std::string folded = text::fold_case(input);
  std::string out;
  for (char32_t cp : text::decode_utf8(folded)) {
    const bool keep = text::is_letter(cp) || (cp >= '0' && cp <= '9');
    if (keep) {
      text::append_utf8(out, cp);
    } else {
      out.push_back(' ');
    }
  }
  return text::collapse_spaces(out);
}

}  // namespace kidex::normalize
