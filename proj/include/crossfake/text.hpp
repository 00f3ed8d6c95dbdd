#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crossfake::text {

/// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view utf8);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);

// Character classes as used by BERT's basic tokenizer. Unicode categories are
// approximated by explicit block tables covering Latin, Greek, Cyrillic, CJK
// and the common punctuation blocks.
bool is_whitespace(char32_t cp) noexcept;
bool is_control(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;
bool is_cjk_ideograph(char32_t cp) noexcept;

/// Simple case folding for Latin, Greek, Cyrillic and fullwidth ASCII.
char32_t to_lower(char32_t cp) noexcept;

/// Base letter of a precomposed Latin letter, or `cp` itself. Returns 0 for
/// combining marks, which are dropped.
char32_t strip_accent(char32_t cp) noexcept;

/// True when `s` has no characters other than Unicode whitespace.
bool is_blank(std::string_view s);

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s) noexcept;

/// BERT basic tokenization: clean control characters, isolate CJK
/// ideographs, optionally lower-case and strip accents, then split on
/// whitespace and punctuation.
std::vector<std::string> basic_tokenize(std::string_view utf8, bool lower_case);

}  // namespace crossfake::text
