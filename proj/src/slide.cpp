#include "slideeval/slide.hpp"

#include <algorithm>
#include <cmath>

namespace slideeval {

std::string_view to_string(Alignment a) {
    switch (a) {
        case Alignment::left: return "left";
        case Alignment::center: return "center";
        case Alignment::right: return "right";
        case Alignment::justify: return "justify";
        case Alignment::distributed: return "distributed";
    }
    return "left";
}

std::optional<Alignment> parse_alignment(std::string_view text) {
    for (auto a : {Alignment::left, Alignment::center, Alignment::right, Alignment::justify, Alignment::distributed}) {
        if (text == to_string(a)) return a;
    }
    return std::nullopt;
}

std::string_view to_string(ElementKind k) {
    switch (k) {
        case ElementKind::text: return "text";
        case ElementKind::rect: return "rect";
        case ElementKind::line: return "line";
        case ElementKind::image: return "image";
        case ElementKind::table: return "table";
    }
    return "text";
}

BoxGeometry LineElement::bounds() const {
    const double x = std::min(x1, x2), y = std::min(y1, y2);
    return {x, y, std::abs(x2 - x1), std::abs(y2 - y1)};
}

double LineElement::length() const { return std::hypot(x2 - x1, y2 - y1); }

std::size_t Slide::count(ElementKind k) const {
    switch (k) {
        case ElementKind::text: return texts.size();
        case ElementKind::rect: return rects.size();
        case ElementKind::line: return lines.size();
        case ElementKind::image: return images.size();
        case ElementKind::table: return tables.size();
    }
    return 0;
}

std::size_t complexity(const Slide& slide) {
    return slide.texts.size() + slide.rects.size() + slide.lines.size() + slide.images.size() + slide.tables.size();
}

std::string make_slide_id(std::string_view deck_stem, int index) {
    return std::string(deck_stem) + "#" + std::to_string(index);
}

}  // namespace slideeval
