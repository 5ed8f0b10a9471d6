#pragma once

#include <string>
#include <string_view>

namespace slideeval::utf8 {

/// Invalid byte sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_punctuation(char32_t cp);  // Unicode general category P*
bool is_whitespace(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace slideeval::utf8
