#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace kidex::text {

/// Byte offset of the first ill-formed UTF-8 sequence, or nullopt.
std::optional<std::size_t> find_invalid_utf8(std::string_view s);

/// Decodes well-formed UTF-8. Behaviour on invalid input is unspecified.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Lower-cases ASCII and Latin-1/Latin Extended-A letters; maps the
/// typographic apostrophe to '\''.
std::string fold_case(std::string_view s);

/// Trims and collapses every run of ASCII whitespace to one space.
std::string collapse_spaces(std::string_view s);

bool is_ascii_space(char c) noexcept;
bool is_ascii_digit(char c) noexcept;

/// Letters for de-hyphenation purposes: ASCII letters and Latin letters in
/// U+00C0..U+024F (minus the two arithmetic signs).
bool is_letter(char32_t cp) noexcept;

/// Horizontal whitespace, including the Unicode space separators.
bool is_hspace(char32_t cp) noexcept;

bool starts_with_ci(std::string_view haystack, std::string_view needle);
bool contains_ci(std::string_view haystack, std::string_view needle);

}  // namespace kidex::text
