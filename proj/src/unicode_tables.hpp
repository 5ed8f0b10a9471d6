#pragma once

#include <cstddef>

namespace slideeval::unicode {

struct CodepointRange {
    char32_t first;
    char32_t last;
};

struct CaseMapping {
    char32_t from;
    char32_t to;
};

extern const CodepointRange kPunctuation[];
extern const std::size_t kPunctuationCount;
extern const CodepointRange kWhitespace[];
extern const std::size_t kWhitespaceCount;
extern const CaseMapping kLowercase[];
extern const std::size_t kLowercaseCount;

}  // namespace slideeval::unicode
