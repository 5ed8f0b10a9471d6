#include "slideeval/fonts.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

#include "slideeval/utf8.hpp"

namespace slideeval {

namespace {

using Entry = std::pair<std::string_view, FontGroup>;

constexpr FontGroup S = FontGroup::sans;
constexpr FontGroup R = FontGroup::serif;
constexpr FontGroup M = FontGroup::mono;
constexpr FontGroup C = FontGroup::script;
constexpr FontGroup D = FontGroup::display;

// clang-format off
constexpr std::array kGroups = {
    // sans
    Entry{"arial", S}, Entry{"calibri", S}, Entry{"helvetica", S}, Entry{"helvetica neue", S},
    Entry{"segoe ui", S}, Entry{"verdana", S}, Entry{"tahoma", S}, Entry{"gill sans", S}, Entry{"inter", S},
    Entry{"roboto", S}, Entry{"open sans", S}, Entry{"lato", S}, Entry{"montserrat", S},
    Entry{"source sans pro", S}, Entry{"libre franklin", S}, Entry{"quattrocento sans", S}, Entry{"ubuntu", S},
    Entry{"barlow", S}, Entry{"bahnschrift", S}, Entry{"ibm plex sans", S}, Entry{"soehne", S}, Entry{"dosis", S},
    Entry{"poppins", S}, Entry{"raleway", S}, Entry{"titillium web", S}, Entry{"nunito", S}, Entry{"corbel", S},
    Entry{"candara", S}, Entry{"century gothic", S}, Entry{"avenir", S}, Entry{"avenir next", S},
    Entry{"franklin gothic", S}, Entry{"arial rounded mt", S},
    // serif
    Entry{"times new roman", R}, Entry{"georgia", R}, Entry{"garamond", R}, Entry{"cambria", R},
    Entry{"palatino linotype", R}, Entry{"bookman old style", R}, Entry{"elephant", R}, Entry{"merriweather", R},
    Entry{"playfair display", R}, Entry{"bodoni", R}, Entry{"bodoni mt", R}, Entry{"didot", R}, Entry{"tinos", R},
    Entry{"cmr10", R}, Entry{"american typewriter", R},
    // mono
    Entry{"courier new", M}, Entry{"courier", M}, Entry{"consolas", M}, Entry{"menlo", M}, Entry{"monaco", M},
    Entry{"inconsolata", M}, Entry{"fira mono", M}, Entry{"source code pro", M}, Entry{"roboto mono", M},
    Entry{"ibm plex mono", M},
    // script / hand / display
    Entry{"comic sans ms", C}, Entry{"brush script mt", C}, Entry{"brush script", C}, Entry{"amatic sc", C},
    Entry{"patrick hand", C}, Entry{"architects daughter", C}, Entry{"caveat", C}, Entry{"pacifico", C},
    Entry{"lobster", C}, Entry{"impact", D}, Entry{"bebas", D},
    // others
    Entry{"roboto slab", R}, Entry{"carlito", S}, Entry{"asana", R}, Entry{"tenorite", S}, Entry{"aptos", S},
    Entry{"segoe ui emoji", S}, Entry{"segoe ui symbol", S},
};
// clang-format on

constexpr std::array<std::string_view, 28> kStyleWords = {
    "bold",     "italic",    "oblique",    "light",     "semibold", "semilight", "demibold",
    "medium",   "black",     "heavy",      "regular",   "thin",     "extrabold", "extralight",
    "ultrabold", "ultralight", "condensed", "narrow",    "book",     "roman",     "normal",
    "semi",     "demi",      "extra",      "ultra",     "cond",     "it",        "bd",
};

const Entry* lookup(std::string_view name) {
    auto it = std::find_if(kGroups.begin(), kGroups.end(), [&](const Entry& e) { return e.first == name; });
    return it == kGroups.end() ? nullptr : &*it;
}

bool is_style_word(std::string_view w) {
    return std::find(kStyleWords.begin(), kStyleWords.end(), w) != kStyleWords.end();
}

}  // namespace

std::string_view to_string(FontGroup g) {
    switch (g) {
        case FontGroup::sans: return "sans";
        case FontGroup::serif: return "serif";
        case FontGroup::mono: return "mono";
        case FontGroup::script: return "script";
        case FontGroup::display: return "display";
        case FontGroup::other: return "other";
    }
    return "other";
}

std::string canonical_font(std::string_view name) {
    std::u32string folded;
    bool space = false;
    bool in_parens = false;
    for (char32_t cp : utf8::decode(name)) {
        if (cp == U'(') in_parens = true;
        if (in_parens) {
            if (cp == U')') in_parens = false;
            continue;
        }
        if (cp == U'"' || cp == U'\'') continue;
        if (utf8::is_whitespace(cp) || cp == U'-' || cp == U'_' || cp == U',') {
            space = true;
            continue;
        }
        if (space && !folded.empty()) folded.push_back(U' ');
        space = false;
        folded.push_back(utf8::to_lower(cp));
    }
    std::string out = utf8::encode(folded);
    if (out.empty()) return "unknown";

    while (!lookup(out)) {
        const auto cut = out.rfind(' ');
        if (cut == std::string::npos || !is_style_word(std::string_view(out).substr(cut + 1))) break;
        out.erase(cut);
    }
    return out;
}

FontGroup font_group(std::string_view canonical) {
    const Entry* e = lookup(canonical);
    return e ? e->second : FontGroup::other;
}

}  // namespace slideeval
