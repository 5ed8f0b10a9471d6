#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slideeval {

struct FontError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Outline point in font units, y up.
struct OutlinePoint {
    double x = 0.0;
    double y = 0.0;
    bool on_curve = true;
};

using Contour = std::vector<OutlinePoint>;

/// Minimal TrueType reader: cmap (formats 4 and 12), glyf (simple and
/// composite), loca, hmtx, hhea, head and post.
class TrueTypeFont {
public:
    static TrueTypeFont parse(std::string bytes);
    static std::optional<TrueTypeFont> load(const std::filesystem::path& path);

    std::uint16_t glyph_index(char32_t cp) const;
    double advance(std::uint16_t glyph) const;
    /// Quadratic contours; composite glyphs are flattened into their parts.
    std::vector<Contour> outline(std::uint16_t glyph) const;

    int units_per_em() const { return units_per_em_; }
    int ascender() const { return ascender_; }
    int descender() const { return descender_; }
    int line_gap() const { return line_gap_; }
    int underline_position() const { return underline_position_; }
    int underline_thickness() const { return underline_thickness_; }
    std::uint16_t num_glyphs() const { return num_glyphs_; }

private:
    struct Table {
        std::size_t offset = 0;
        std::size_t length = 0;
    };
    Table table(const char* tag) const;
    std::optional<Table> find_table(const char* tag) const;
    void outline_into(std::uint16_t glyph, double m[6], int depth, std::vector<Contour>& out) const;

    std::string data_;
    std::vector<std::pair<std::string, Table>> tables_;
    int units_per_em_ = 2048;
    int ascender_ = 0;
    int descender_ = 0;
    int line_gap_ = 0;
    int underline_position_ = 0;
    int underline_thickness_ = 0;
    std::uint16_t num_glyphs_ = 0;
    std::uint16_t num_hmetrics_ = 0;
    bool long_loca_ = false;
    std::size_t cmap_offset_ = 0;
    int cmap_format_ = 0;
};

}  // namespace slideeval
