#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slideeval/color.hpp"

namespace slideeval {

inline constexpr double kSlideWidth = 960.0;
inline constexpr double kSlideHeight = 540.0;

/// Axis-aligned box in slide pixels. Top-left anchor, +x right, +y down.
struct BoxGeometry {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double area() const { return w * h; }

    friend bool operator==(const BoxGeometry&, const BoxGeometry&) = default;
};

enum class Alignment { left, center, right, justify, distributed };

std::string_view to_string(Alignment a);
std::optional<Alignment> parse_alignment(std::string_view text);

struct FontSpec {
    std::string name;
    double size = 18.0;  // pt
    bool bold = false;
    bool italic = false;
    bool underline = false;
    ColorHex color;

    friend bool operator==(const FontSpec&, const FontSpec&) = default;
};

struct TextElement {
    BoxGeometry geometry;
    std::string content;
    FontSpec font;
    Alignment align = Alignment::left;

    friend bool operator==(const TextElement&, const TextElement&) = default;
};

struct RectElement {
    BoxGeometry geometry;
    double rx = 0.0;                 // corner radius, px
    std::optional<ColorHex> fill;    // nullopt: no fill
    ColorHex stroke;                 // defaults to #000000 when the source omits it
    double stroke_width = 0.0;       // pt; 0 means no stroke

    friend bool operator==(const RectElement&, const RectElement&) = default;
};

struct LineElement {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
    ColorHex stroke;
    double stroke_width = 1.0;  // pt

    BoxGeometry bounds() const;
    double length() const;

    friend bool operator==(const LineElement&, const LineElement&) = default;
};

struct ImageElement {
    BoxGeometry geometry;
    std::string source;  // part name, path, or data: URI

    friend bool operator==(const ImageElement&, const ImageElement&) = default;
};

struct TableElement {
    BoxGeometry geometry;
    int rows = 1;
    int cols = 1;
    std::vector<std::string> cells;  // row-major, rows * cols entries

    const std::string& cell(int r, int c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }

    friend bool operator==(const TableElement&, const TableElement&) = default;
};

enum class ElementKind { text, rect, line, image, table };

inline constexpr ElementKind kAllKinds[] = {ElementKind::text, ElementKind::rect, ElementKind::line,
                                            ElementKind::image, ElementKind::table};

std::string_view to_string(ElementKind k);

struct Slide {
    std::string slide_id;
    double width = kSlideWidth;
    double height = kSlideHeight;
    ColorHex background = ColorHex(Rgb{255, 255, 255});
    std::vector<TextElement> texts;
    std::vector<RectElement> rects;
    std::vector<LineElement> lines;
    std::vector<ImageElement> images;
    std::vector<TableElement> tables;

    std::size_t count(ElementKind k) const;

    friend bool operator==(const Slide&, const Slide&) = default;
};

/// Total number of elements over all families.
std::size_t complexity(const Slide& slide);

/// "<deck-stem>#<index>", index 1-based.
std::string make_slide_id(std::string_view deck_stem, int index);

}  // namespace slideeval
