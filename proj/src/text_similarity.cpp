#include "slideeval/text_similarity.hpp"

#include <tuple>
#include <vector>

#include "slideeval/utf8.hpp"

namespace slideeval {

std::string normalize_text(std::string_view text) {
    std::u32string out;
    bool pending_space = false;
    auto emit = [&](char32_t cp) {
        if (pending_space && !out.empty()) out.push_back(U' ');
        pending_space = false;
        out.push_back(cp);
    };
    for (char32_t cp : utf8::decode(text)) {
        cp = utf8::to_lower(cp);
        if (cp == U'&') {
            for (char32_t c : std::u32string_view(U"and")) emit(c);
        } else if (utf8::is_whitespace(cp)) {
            pending_space = true;
        } else if (!utf8::is_punctuation(cp)) {
            emit(cp);
        }
    }
    return utf8::encode(out);
}

namespace {

struct Block {
    std::size_t i, j, size;
};

Block longest_match(std::u32string_view a, std::u32string_view b, std::size_t alo, std::size_t ahi, std::size_t blo,
                    std::size_t bhi) {
    Block best{alo, blo, 0};
    std::vector<std::size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            const std::size_t k = j - blo + 1;
            cur[k] = a[i] == b[j] ? prev[k - 1] + 1 : 0;
            if (cur[k] > best.size) best = {i + 1 - cur[k], j + 1 - cur[k], cur[k]};
        }
        std::swap(prev, cur);
    }
    return best;
}

}  // namespace

std::size_t matching_characters(std::u32string_view a, std::u32string_view b) {
    std::size_t total = 0;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> pending{{0, a.size(), 0, b.size()}};
    while (!pending.empty()) {
        auto [alo, ahi, blo, bhi] = pending.back();
        pending.pop_back();
        const Block m = longest_match(a, b, alo, ahi, blo, bhi);
        if (m.size == 0) continue;
        total += m.size;
        if (alo < m.i && blo < m.j) pending.emplace_back(alo, m.i, blo, m.j);
        if (m.i + m.size < ahi && m.j + m.size < bhi) pending.emplace_back(m.i + m.size, ahi, m.j + m.size, bhi);
    }
    return total;
}

double content_similarity(std::string_view a, std::string_view b) {
    const std::u32string ua = utf8::decode(a);
    const std::u32string ub = utf8::decode(b);
    const std::size_t length = ua.size() + ub.size();
    if (length == 0) return 1.0;
    return 2.0 * static_cast<double>(matching_characters(ua, ub)) / static_cast<double>(length);
}

double normalized_similarity(std::string_view a, std::string_view b) {
    return content_similarity(normalize_text(a), normalize_text(b));
}

}  // namespace slideeval
