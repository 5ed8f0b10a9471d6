#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slideeval/slide.hpp"

namespace slideeval {

/// Row-major 8-bit RGB, fully opaque.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    static RasterImage filled(int width, int height, Rgb color);
    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);
    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

enum class RenderMode {
    presentation,  // 4x4 supersampled coverage
    test,          // one sample per pixel centre, Bresenham strokes
};

/// Returns the raw bytes of an image source, or nullopt when unavailable.
using ImageLoader = std::function<std::optional<std::string>(std::string_view source)>;

struct RenderOptions {
    double scale = 1.0;
    RenderMode mode = RenderMode::presentation;
    ImageLoader load_image;  // empty: data: URIs and filesystem paths
};

RasterImage render_slide(const Slide& slide, const RenderOptions& options = {});

struct LaidOutLine {
    std::string text;
    double x = 0.0;         // left edge of the line, output px
    double baseline = 0.0;  // output px
    double width = 0.0;
};

struct TextLayout {
    std::vector<LaidOutLine> lines;
    double line_height = 0.0;
    double max_advance = 0.0;  // widest single glyph seen
};

/// Greedy word wrap inside `box`; words wider than the box break between
/// characters. Lines are top-anchored.
TextLayout layout_text(std::string_view content, const FontSpec& font, const BoxGeometry& box, Alignment align,
                       double scale = 1.0);

/// Directory searched for the bundled fonts (SLIDEEVAL_FONT_DIR overrides).
std::filesystem::path font_directory();
/// True when every bundled face is present and parses.
bool fonts_available();

struct PngError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 8-bit RGB PNG with a 72 dpi pHYs chunk.
std::string encode_png(const RasterImage& image);
RasterImage decode_png(std::string_view bytes);

struct RasterEntry {
    std::string slide_id;
    std::string path;    // relative to out_dir
    std::string sha256;  // of the PNG bytes
    std::string status = "ok";
};

struct RasterManifest {
    std::vector<RasterEntry> entries;
    std::size_t failures = 0;

    nlohmann::json to_json() const;
};

std::string image_file_name(std::string_view slide_id);

/// Renders each slide to out_dir/<slide_id>.png and writes manifest.json.
/// A failed write marks that entry and the batch continues.
RasterManifest rasterize_deck(std::span<const Slide> slides, const std::filesystem::path& out_dir,
                              const RenderOptions& options = {}, unsigned workers = 1);

}  // namespace slideeval
