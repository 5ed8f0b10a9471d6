#pragma once

#include <string>
#include <string_view>

namespace slideeval {

enum class FontGroup { sans, serif, mono, script, display, other };

std::string_view to_string(FontGroup g);

/// Lowercases, trims and collapses whitespace, then strips trailing
/// weight/style words ("bold", "light", ...) until the name is known or
/// nothing is left to strip. Empty input canonicalizes to "unknown".
std::string canonical_font(std::string_view name);

/// Group lookup on an already canonical name; unmapped names are `other`.
FontGroup font_group(std::string_view canonical);

}  // namespace slideeval
