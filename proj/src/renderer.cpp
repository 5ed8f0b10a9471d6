#include "slideeval/renderer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "raster.hpp"
#include "slideeval/digest.hpp"
#include "slideeval/fonts.hpp"
#include "slideeval/truetype.hpp"
#include "slideeval/utf8.hpp"

#ifndef SLIDEEVAL_FONT_DIR
#define SLIDEEVAL_FONT_DIR "data/fonts"
#endif

namespace slideeval {

RasterImage RasterImage::filled(int width, int height, Rgb color) {
    RasterImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = color.r;
        img.pixels[i + 1] = color.g;
        img.pixels[i + 2] = color.b;
    }
    return img;
}

Rgb RasterImage::at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RasterImage::set(int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
}

std::filesystem::path font_directory() {
    if (const char* env = std::getenv("SLIDEEVAL_FONT_DIR"); env && *env) return env;
    return SLIDEEVAL_FONT_DIR;
}

namespace {

constexpr const char* kFaceFiles[][2] = {
    {"DejaVuSans.ttf", "DejaVuSans-Bold.ttf"},
    {"DejaVuSerif.ttf", "DejaVuSerif-Bold.ttf"},
    {"DejaVuSansMono.ttf", "DejaVuSansMono-Bold.ttf"},
};

const TrueTypeFont* load_face(const std::string& file) {
    static std::mutex mu;
    static std::map<std::filesystem::path, std::optional<TrueTypeFont>> cache;
    const auto path = font_directory() / file;
    std::lock_guard lock(mu);
    auto it = cache.find(path);
    if (it == cache.end()) it = cache.emplace(path, TrueTypeFont::load(path)).first;
    return it->second ? &*it->second : nullptr;
}

/// Serif and mono families get their own faces; everything else is sans.
const TrueTypeFont* face_for(const FontSpec& font) {
    int family = 0;
    switch (font_group(canonical_font(font.name))) {
        case FontGroup::serif: family = 1; break;
        case FontGroup::mono: family = 2; break;
        default: break;
    }
    return load_face(kFaceFiles[family][font.bold ? 1 : 0]);
}

/// Metrics of one text run in output pixels.
struct Metrics {
    const TrueTypeFont* face;
    double px;   // em size
    double ppu;  // pixels per font unit

    explicit Metrics(const FontSpec& font, double scale)
        : face(face_for(font)), px(std::max(font.size, 0.5) * scale), ppu(face ? px / face->units_per_em() : 0.0) {}

    double advance(char32_t cp) const {
        if (cp == U'\t') cp = U' ';
        if (!face) return cp == U' ' ? 0.33 * px : 0.6 * px;
        return face->advance(face->glyph_index(cp)) * ppu;
    }
    double ascent() const { return face ? face->ascender() * ppu : 0.8 * px; }
    double line_height() const {
        return face ? (face->ascender() - face->descender() + face->line_gap()) * ppu : 1.2 * px;
    }
    double width(std::u32string_view s) const {
        double w = 0.0;
        for (char32_t c : s) w += advance(c);
        return w;
    }
};

std::vector<std::u32string> split_words(std::u32string_view para) {
    std::vector<std::u32string> words;
    std::u32string cur;
    for (char32_t c : para) {
        if (c == U' ' || c == U'\t') {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::vector<std::u32string> wrap(std::u32string_view para, double avail, const Metrics& m) {
    std::vector<std::u32string> lines;
    std::u32string line;
    auto flush = [&] {
        lines.push_back(std::move(line));
        line.clear();
    };
    for (std::u32string word : split_words(para)) {
        if (!line.empty()) {
            std::u32string joined = line + U' ' + word;
            if (m.width(joined) <= avail) {
                line = std::move(joined);
                continue;
            }
            flush();
        }
        // Break words wider than the box between characters.
        while (m.width(word) > avail && word.size() > 1) {
            std::size_t k = 1;
            while (k < word.size() && m.width(std::u32string_view(word).substr(0, k + 1)) <= avail) ++k;
            line = word.substr(0, k);
            flush();
            word.erase(0, k);
        }
        line = std::move(word);
    }
    if (!line.empty() || lines.empty()) flush();
    return lines;
}

}  // namespace

bool fonts_available() {
    for (const auto& pair : kFaceFiles) {
        for (const char* f : pair) {
            if (!load_face(f)) return false;
        }
    }
    return true;
}

TextLayout layout_text(std::string_view content, const FontSpec& font, const BoxGeometry& box, Alignment align,
                       double scale) {
    const Metrics m(font, scale);
    TextLayout out;
    out.line_height = m.line_height();
    const double avail = std::max(1.0, box.w * scale);
    const double left = box.x * scale;
    double baseline = box.y * scale + m.ascent();

    std::u32string text = utf8::decode(content);
    std::replace(text.begin(), text.end(), U'\v', U'\n');
    std::erase(text, U'\r');
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(U'\n', start);
        if (end == std::u32string::npos) end = text.size();
        for (const auto& line : wrap(std::u32string_view(text).substr(start, end - start), avail, m)) {
            for (char32_t c : line) out.max_advance = std::max(out.max_advance, m.advance(c));
            LaidOutLine l;
            l.text = utf8::encode(line);
            l.width = m.width(line);
            l.baseline = baseline;
            switch (align) {
                case Alignment::center: l.x = left + (avail - l.width) / 2; break;
                case Alignment::right: l.x = left + avail - l.width; break;
                default: l.x = left; break;
            }
            out.lines.push_back(std::move(l));
            baseline += out.line_height;
        }
        start = end + 1;
    }
    return out;
}

namespace {

using raster::Path;
using raster::Point;

void glyph_path(Path& path, const std::vector<Contour>& contours, double pen_x, double baseline, double ppu,
                double shear) {
    auto map = [&](const OutlinePoint& p) {
        const double up = p.y * ppu;
        return Point{pen_x + p.x * ppu + shear * up, baseline - up};
    };
    for (const Contour& c : contours) {
        if (c.empty()) continue;
        // Make implied on-curve midpoints explicit.
        std::vector<OutlinePoint> pts;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto& a = c[i];
            const auto& b = c[(i + 1) % c.size()];
            pts.push_back(a);
            if (!a.on_curve && !b.on_curve) pts.push_back({(a.x + b.x) / 2, (a.y + b.y) / 2, true});
        }
        auto first_on = std::find_if(pts.begin(), pts.end(), [](const OutlinePoint& p) { return p.on_curve; });
        if (first_on == pts.end()) continue;
        std::rotate(pts.begin(), first_on, pts.end());
        path.move_to(map(pts[0]));
        for (std::size_t i = 1; i <= pts.size(); ++i) {
            const auto& p = pts[i % pts.size()];
            if (p.on_curve) {
                path.line_to(map(p));
            } else {
                const auto& q = pts[(i + 1) % pts.size()];
                path.quad_to(map(p), map(q));
                ++i;
            }
        }
        path.close();
    }
}

void box_glyph(Path& path, double pen_x, double baseline, double px, double advance) {
    const double w = advance * 0.8, h = px * 0.7, t = std::max(1.0, px * 0.08);
    const double x = pen_x + advance * 0.1, y = baseline - h;
    path.rect(x, y, w, h, true);
    if (w > 2 * t && h > 2 * t) path.rect(x + t, y + t, w - 2 * t, h - 2 * t, false);
}

void draw_text(RasterImage& img, std::string_view content, const FontSpec& font, const BoxGeometry& box,
               Alignment align, double scale, bool aa) {
    const TextLayout layout = layout_text(content, font, box, align, scale);
    const Metrics m(font, scale);
    const double shear = font.italic ? 0.2 : 0.0;
    Path path;
    for (const auto& line : layout.lines) {
        double pen = line.x;
        for (char32_t cp : utf8::decode(line.text)) {
            const double adv = m.advance(cp);
            if (cp != U' ' && cp != U'\t') {
                if (m.face) glyph_path(path, m.face->outline(m.face->glyph_index(cp)), pen, line.baseline, m.ppu, shear);
                else box_glyph(path, pen, line.baseline, m.px, adv);
            }
            pen += adv;
        }
        if (font.underline && line.width > 0) {
            const double pos = m.face ? -m.face->underline_position() * m.ppu : 0.1 * m.px;
            const double thick = std::max(1.0, m.face ? m.face->underline_thickness() * m.ppu : 0.05 * m.px);
            path.rect(line.x, line.baseline + pos - thick / 2, line.width, thick);
        }
    }
    raster::fill(img, path, font.color.rgb(), aa);
}

std::optional<std::string> default_loader(std::string_view source) {
    constexpr std::string_view kData = "data:";
    if (source.substr(0, kData.size()) == kData) {
        const auto comma = source.find(',');
        if (comma == std::string_view::npos) return std::nullopt;
        if (source.substr(0, comma).find(";base64") == std::string_view::npos) return std::nullopt;
        return base64_decode(source.substr(comma + 1));
    }
    std::error_code ec;
    const std::filesystem::path p{std::string(source)};
    if (source.empty() || !std::filesystem::is_regular_file(p, ec)) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void draw_placeholder(RasterImage& img, double x, double y, double w, double h, bool aa) {
    Path bg;
    bg.rect(x, y, w, h);
    raster::fill(img, bg, {217, 217, 217}, aa);
    Path hatch;
    constexpr double kPitch = 12.0, kHalf = 0.75;
    for (double d = -h; d < w; d += kPitch) {
        // Diagonal band clipped to the box.
        const double x0 = std::max(x, x + d), x1 = std::min(x + w, x + d + h);
        if (x1 <= x0) continue;
        const double y0 = y + (x0 - x - d), y1 = y + (x1 - x - d);
        hatch.polygon({{x0 - kHalf, y0}, {x0 + kHalf, y0}, {x1 + kHalf, y1}, {x1 - kHalf, y1}});
    }
    raster::fill(img, hatch, {166, 166, 166}, aa);
    Path border;
    border.rect(x, y, w, h);
    if (w > 2 && h > 2) border.rect(x + 1, y + 1, w - 2, h - 2, false);
    raster::fill(img, border, {128, 128, 128}, aa);
}

void draw_image(RasterImage& img, const ImageElement& e, const RenderOptions& opt, bool aa) {
    const double s = opt.scale;
    const double x = e.geometry.x * s, y = e.geometry.y * s, w = e.geometry.w * s, h = e.geometry.h * s;
    std::optional<RasterImage> src;
    if (auto bytes = opt.load_image ? opt.load_image(e.source) : default_loader(e.source)) {
        try {
            src = decode_png(*bytes);
        } catch (const PngError&) {
        }
    }
    if (!src) {
        draw_placeholder(img, x, y, w, h, aa);
        return;
    }
    const int px0 = std::max(0, static_cast<int>(std::ceil(x - 0.5)));
    const int py0 = std::max(0, static_cast<int>(std::ceil(y - 0.5)));
    const int px1 = std::min(img.width, static_cast<int>(std::ceil(x + w - 0.5)));
    const int py1 = std::min(img.height, static_cast<int>(std::ceil(y + h - 0.5)));
    for (int py = py0; py < py1; ++py) {
        const int sy = std::clamp(static_cast<int>((py + 0.5 - y) / h * src->height), 0, src->height - 1);
        for (int px = px0; px < px1; ++px) {
            const int sx = std::clamp(static_cast<int>((px + 0.5 - x) / w * src->width), 0, src->width - 1);
            img.set(px, py, src->at(sx, sy));
        }
    }
}

void draw_rect(RasterImage& img, const RectElement& r, double scale, bool aa) {
    const double x = r.geometry.x * scale, y = r.geometry.y * scale;
    const double w = r.geometry.w * scale, h = r.geometry.h * scale, rx = r.rx * scale;
    if (r.fill) {
        Path p;
        p.rounded_rect(x, y, w, h, rx);
        raster::fill(img, p, r.fill->rgb(), aa);
    }
    if (r.stroke_width > 0.0) {
        const double sw = aa ? r.stroke_width * scale : std::max(1.0, std::round(r.stroke_width * scale));
        const double half = sw / 2;
        Path p;
        p.rounded_rect(x - half, y - half, w + sw, h + sw, rx + half);
        if (w > sw && h > sw) p.rounded_rect(x + half, y + half, w - sw, h - sw, std::max(0.0, rx - half), false);
        raster::fill(img, p, r.stroke.rgb(), aa);
    }
}

void draw_line(RasterImage& img, const LineElement& l, double scale, bool aa) {
    const double sw = std::max(1.0, l.stroke_width * scale);
    if (!aa) {
        auto px = [&](double v) { return static_cast<int>(std::floor(v * scale)); };
        raster::stroke_pixels(img, px(l.x1), px(l.y1), px(l.x2), px(l.y2), static_cast<int>(std::lround(sw)),
                              l.stroke.rgb());
        return;
    }
    const double x1 = l.x1 * scale, y1 = l.y1 * scale, x2 = l.x2 * scale, y2 = l.y2 * scale;
    double dx = x2 - x1, dy = y2 - y1;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) {
        dx = 1.0;
        dy = 0.0;
    } else {
        dx /= len;
        dy /= len;
    }
    const double nx = -dy * sw / 2, ny = dx * sw / 2;
    // Square caps keep zero-length and axis-aligned lines visible.
    const double ex = dx * sw / 2, ey = dy * sw / 2;
    Path p;
    p.polygon({{x1 - ex + nx, y1 - ey + ny},
               {x2 + ex + nx, y2 + ey + ny},
               {x2 + ex - nx, y2 + ey - ny},
               {x1 - ex - nx, y1 - ey - ny}});
    raster::fill(img, p, l.stroke.rgb(), aa);
}

void draw_table(RasterImage& img, const TableElement& t, double scale, bool aa) {
    const double x = t.geometry.x * scale, y = t.geometry.y * scale;
    const double w = t.geometry.w * scale, h = t.geometry.h * scale;
    const int rows = std::max(1, t.rows), cols = std::max(1, t.cols);
    const double cw = w / cols, ch = h / rows;
    const double line = std::max(1.0, scale);
    Path grid;
    for (int r = 0; r <= rows; ++r) grid.rect(x, y + r * ch - line / 2, w, line);
    for (int c = 0; c <= cols; ++c) grid.rect(x + c * cw - line / 2, y, line, h);
    raster::fill(img, grid, {0, 0, 0}, aa);

    FontSpec font;
    font.name = "Calibri";
    font.size = std::clamp(0.6 * t.geometry.h / rows, 6.0, 12.0);
    constexpr double kInset = 2.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r * cols + c);
            if (i >= t.cells.size() || t.cells[i].empty()) continue;
            const BoxGeometry cell{t.geometry.x + c * t.geometry.w / cols + kInset,
                                   t.geometry.y + r * t.geometry.h / rows + kInset,
                                   std::max(1.0, t.geometry.w / cols - 2 * kInset),
                                   std::max(1.0, t.geometry.h / rows - 2 * kInset)};
            draw_text(img, t.cells[i], font, cell, Alignment::left, scale, aa);
        }
    }
}

}  // namespace

RasterImage render_slide(const Slide& slide, const RenderOptions& options) {
    if (!(options.scale > 0.0)) throw std::invalid_argument("render scale must be positive");
    const int w = std::max(1, static_cast<int>(std::lround(slide.width * options.scale)));
    const int h = std::max(1, static_cast<int>(std::lround(slide.height * options.scale)));
    const bool aa = options.mode == RenderMode::presentation;
    RasterImage img = RasterImage::filled(w, h, slide.background.rgb());
    for (const auto& r : slide.rects) draw_rect(img, r, options.scale, aa);
    for (const auto& l : slide.lines) draw_line(img, l, options.scale, aa);
    for (const auto& im : slide.images) draw_image(img, im, options, aa);
    for (const auto& t : slide.tables) draw_table(img, t, options.scale, aa);
    for (const auto& t : slide.texts) draw_text(img, t.content, t.font, t.geometry, t.align, options.scale, aa);
    return img;
}

std::string image_file_name(std::string_view slide_id) {
    std::string out;
    for (char c : slide_id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '-' || c == '_';
        out += ok ? c : '_';
    }
    if (out.empty()) out = "_";
    return out + ".png";
}

nlohmann::json RasterManifest::to_json() const {
    nlohmann::json images = nlohmann::json::object();
    nlohmann::json failed = nlohmann::json::array();
    for (const auto& e : entries) {
        if (e.status == "ok") images[e.slide_id] = {{"path", e.path}, {"sha256", e.sha256}};
        else failed.push_back({{"slide_id", e.slide_id}, {"status", e.status}});
    }
    return {{"version", 1}, {"images", std::move(images)}, {"failures", std::move(failed)}};
}

RasterManifest rasterize_deck(std::span<const Slide> slides, const std::filesystem::path& out_dir,
                              const RenderOptions& options, unsigned workers) {
    std::filesystem::create_directories(out_dir);
    RasterManifest m;
    m.entries.resize(slides.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < slides.size(); i = next++) {
            RasterEntry& e = m.entries[i];
            e.slide_id = slides[i].slide_id;
            e.path = image_file_name(e.slide_id);
            try {
                const std::string png = encode_png(render_slide(slides[i], options));
                e.sha256 = sha256_hex(png);
                std::ofstream f(out_dir / e.path, std::ios::binary);
                f << png;
                if (!f) throw std::runtime_error("write failed");
            } catch (const std::exception&) {
                e.status = "io_failure";
                e.sha256.clear();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::max(1u, workers); ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : m.entries) m.failures += e.status != "ok";
    std::ofstream(out_dir / "manifest.json") << m.to_json().dump(2) << "\n";
    return m;
}

}  // namespace slideeval
