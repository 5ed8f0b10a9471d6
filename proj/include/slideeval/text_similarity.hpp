#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace slideeval {

/// Lowercase, "&" -> "and", drop Unicode punctuation, collapse whitespace runs
/// to one space, trim.
std::string normalize_text(std::string_view text);

/// Total characters covered by the Ratcliff/Obershelp matching blocks
/// (recursive longest common substring, leftmost-longest tie break).
std::size_t matching_characters(std::u32string_view a, std::u32string_view b);

/// 2 * M / (|a| + |b|) over code points. Two empty strings score 1.
double content_similarity(std::string_view a, std::string_view b);

/// content_similarity(normalize_text(a), normalize_text(b)).
double normalized_similarity(std::string_view a, std::string_view b);

}  // namespace slideeval
