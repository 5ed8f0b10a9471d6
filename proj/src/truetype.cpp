#include "slideeval/truetype.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace slideeval {

namespace {

class Reader {
public:
    explicit Reader(const std::string& d) : d_(d) {}

    void need(std::size_t off, std::size_t n) const {
        if (off > d_.size() || n > d_.size() - off) throw FontError("truncated font data");
    }
    std::uint8_t u8(std::size_t off) const {
        need(off, 1);
        return static_cast<std::uint8_t>(d_[off]);
    }
    std::uint16_t u16(std::size_t off) const {
        need(off, 2);
        return static_cast<std::uint16_t>(u8(off) << 8 | u8(off + 1));
    }
    std::int16_t i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
    std::uint32_t u32(std::size_t off) const {
        return static_cast<std::uint32_t>(u16(off)) << 16 | u16(off + 2);
    }

private:
    const std::string& d_;
};

double f2dot14(std::int16_t v) { return v / 16384.0; }

}  // namespace

TrueTypeFont TrueTypeFont::parse(std::string bytes) {
    TrueTypeFont f;
    f.data_ = std::move(bytes);
    Reader r(f.data_);
    const std::uint32_t version = r.u32(0);
    if (version != 0x00010000 && version != 0x74727565) throw FontError("not a TrueType font");
    const std::uint16_t n = r.u16(4);
    for (std::uint16_t i = 0; i < n; ++i) {
        const std::size_t rec = 12 + 16u * i;
        r.need(rec, 16);
        std::string tag = f.data_.substr(rec, 4);
        Table t{r.u32(rec + 8), r.u32(rec + 12)};
        r.need(t.offset, t.length);
        f.tables_.emplace_back(std::move(tag), t);
    }

    const Table head = f.table("head");
    f.units_per_em_ = r.u16(head.offset + 18);
    if (f.units_per_em_ == 0) throw FontError("unitsPerEm is zero");
    f.long_loca_ = r.i16(head.offset + 50) != 0;

    const Table hhea = f.table("hhea");
    f.ascender_ = r.i16(hhea.offset + 4);
    f.descender_ = r.i16(hhea.offset + 6);
    f.line_gap_ = r.i16(hhea.offset + 8);
    f.num_hmetrics_ = r.u16(hhea.offset + 34);
    f.num_glyphs_ = r.u16(f.table("maxp").offset + 4);
    if (f.num_hmetrics_ == 0) throw FontError("no horizontal metrics");
    f.table("hmtx");
    f.table("loca");
    f.table("glyf");

    if (auto post = f.find_table("post"); post && post->length >= 12) {
        f.underline_position_ = r.i16(post->offset + 8);
        f.underline_thickness_ = r.i16(post->offset + 10);
    } else {
        f.underline_position_ = -f.units_per_em_ / 10;
        f.underline_thickness_ = f.units_per_em_ / 20;
    }

    const Table cmap = f.table("cmap");
    const std::uint16_t subtables = r.u16(cmap.offset + 2);
    int best_rank = 0;
    for (std::uint16_t i = 0; i < subtables; ++i) {
        const std::size_t rec = cmap.offset + 4 + 8u * i;
        const std::uint16_t platform = r.u16(rec), encoding = r.u16(rec + 2);
        const std::size_t sub = cmap.offset + r.u32(rec + 4);
        const std::uint16_t format = r.u16(sub);
        int rank = 0;
        if (format == 12 && (platform == 3 || platform == 0)) rank = 3;
        else if (format == 4 && platform == 3 && encoding == 1) rank = 2;
        else if (format == 4 && platform == 0) rank = 1;
        if (rank > best_rank) {
            best_rank = rank;
            f.cmap_offset_ = sub;
            f.cmap_format_ = format;
        }
    }
    if (best_rank == 0) throw FontError("no usable Unicode cmap");
    return f;
}

std::optional<TrueTypeFont> TrueTypeFont::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse(std::move(bytes));
    } catch (const FontError&) {
        return std::nullopt;
    }
}

std::optional<TrueTypeFont::Table> TrueTypeFont::find_table(const char* tag) const {
    for (const auto& [t, tab] : tables_) {
        if (t == tag) return tab;
    }
    return std::nullopt;
}

TrueTypeFont::Table TrueTypeFont::table(const char* tag) const {
    auto t = find_table(tag);
    if (!t) throw FontError(std::string("missing table ") + tag);
    return *t;
}

std::uint16_t TrueTypeFont::glyph_index(char32_t cp) const {
    Reader r(data_);
    const std::size_t sub = cmap_offset_;
    if (cmap_format_ == 12) {
        const std::uint32_t groups = r.u32(sub + 12);
        std::uint32_t lo = 0, hi = groups;
        while (lo < hi) {
            const std::uint32_t mid = (lo + hi) / 2;
            const std::size_t g = sub + 16 + 12u * mid;
            const std::uint32_t start = r.u32(g), end = r.u32(g + 4);
            if (cp < start) hi = mid;
            else if (cp > end) lo = mid + 1;
            else {
                const std::uint32_t glyph = r.u32(g + 8) + (static_cast<std::uint32_t>(cp) - start);
                return glyph < num_glyphs_ ? static_cast<std::uint16_t>(glyph) : 0;
            }
        }
        return 0;
    }
    if (cp > 0xFFFF) return 0;
    const std::uint16_t seg_count = r.u16(sub + 6) / 2;
    const std::size_t ends = sub + 14;
    const std::size_t starts = ends + 2u * seg_count + 2;
    const std::size_t deltas = starts + 2u * seg_count;
    const std::size_t ranges = deltas + 2u * seg_count;
    for (std::uint16_t i = 0; i < seg_count; ++i) {
        if (cp > r.u16(ends + 2u * i)) continue;
        const std::uint16_t start = r.u16(starts + 2u * i);
        if (cp < start) return 0;
        const std::uint16_t delta = r.u16(deltas + 2u * i);
        const std::uint16_t range = r.u16(ranges + 2u * i);
        std::uint16_t glyph;
        if (range == 0) {
            glyph = static_cast<std::uint16_t>(cp + delta);
        } else {
            const std::size_t at = ranges + 2u * i + range + 2u * (cp - start);
            glyph = r.u16(at);
            if (glyph != 0) glyph = static_cast<std::uint16_t>(glyph + delta);
        }
        return glyph < num_glyphs_ ? glyph : 0;
    }
    return 0;
}

double TrueTypeFont::advance(std::uint16_t glyph) const {
    Reader r(data_);
    const std::size_t hmtx = table("hmtx").offset;
    const std::uint16_t i = glyph < num_hmetrics_ ? glyph : static_cast<std::uint16_t>(num_hmetrics_ - 1);
    return r.u16(hmtx + 4u * i);
}

std::vector<Contour> TrueTypeFont::outline(std::uint16_t glyph) const {
    std::vector<Contour> out;
    double identity[6] = {1, 0, 0, 1, 0, 0};
    outline_into(glyph, identity, 0, out);
    return out;
}

void TrueTypeFont::outline_into(std::uint16_t glyph, double m[6], int depth, std::vector<Contour>& out) const {
    if (glyph >= num_glyphs_ || depth > 8) return;
    Reader r(data_);
    const std::size_t loca = table("loca").offset;
    const Table glyf = table("glyf");
    std::size_t begin, end;
    if (long_loca_) {
        begin = r.u32(loca + 4u * glyph);
        end = r.u32(loca + 4u * glyph + 4);
    } else {
        begin = 2u * r.u16(loca + 2u * glyph);
        end = 2u * r.u16(loca + 2u * glyph + 2);
    }
    if (end <= begin) return;  // empty glyph such as space
    if (end > glyf.length) throw FontError("glyph outside glyf table");
    const std::size_t g = glyf.offset + begin;
    const std::int16_t contours = r.i16(g);

    auto transform = [&](double x, double y, bool on) {
        return OutlinePoint{m[0] * x + m[2] * y + m[4], m[1] * x + m[3] * y + m[5], on};
    };

    if (contours >= 0) {
        std::vector<std::uint16_t> end_pts(static_cast<std::size_t>(contours));
        for (int c = 0; c < contours; ++c) end_pts[static_cast<std::size_t>(c)] = r.u16(g + 10 + 2u * c);
        const std::size_t npts = contours ? end_pts.back() + 1u : 0u;
        std::size_t p = g + 10 + 2u * contours;
        p += 2 + r.u16(p);  // skip instructions
        std::vector<std::uint8_t> flags;
        flags.reserve(npts);
        while (flags.size() < npts) {
            const std::uint8_t f = r.u8(p++);
            flags.push_back(f);
            if (f & 8) {
                for (std::uint8_t k = r.u8(p++); k > 0 && flags.size() < npts; --k) flags.push_back(f);
            }
        }
        std::vector<int> xs(npts), ys(npts);
        int v = 0;
        for (std::size_t i = 0; i < npts; ++i) {
            if (flags[i] & 2) {
                const int d = r.u8(p++);
                v += (flags[i] & 16) ? d : -d;
            } else if (!(flags[i] & 16)) {
                v += r.i16(p);
                p += 2;
            }
            xs[i] = v;
        }
        v = 0;
        for (std::size_t i = 0; i < npts; ++i) {
            if (flags[i] & 4) {
                const int d = r.u8(p++);
                v += (flags[i] & 32) ? d : -d;
            } else if (!(flags[i] & 32)) {
                v += r.i16(p);
                p += 2;
            }
            ys[i] = v;
        }
        std::size_t start = 0;
        for (std::uint16_t e : end_pts) {
            if (e < start || e >= npts) throw FontError("bad contour end point");
            Contour c;
            for (std::size_t i = start; i <= e; ++i) c.push_back(transform(xs[i], ys[i], flags[i] & 1));
            out.push_back(std::move(c));
            start = e + 1u;
        }
        return;
    }

    std::size_t p = g + 10;
    while (true) {
        const std::uint16_t flags = r.u16(p);
        const std::uint16_t part = r.u16(p + 2);
        p += 4;
        double dx = 0, dy = 0;
        if (flags & 1) {
            if (flags & 2) {
                dx = r.i16(p);
                dy = r.i16(p + 2);
            }
            p += 4;
        } else {
            if (flags & 2) {
                dx = static_cast<std::int8_t>(r.u8(p));
                dy = static_cast<std::int8_t>(r.u8(p + 1));
            }
            p += 2;
        }
        double a = 1, b = 0, c = 0, d = 1;
        if (flags & 8) {
            a = d = f2dot14(r.i16(p));
            p += 2;
        } else if (flags & 0x40) {
            a = f2dot14(r.i16(p));
            d = f2dot14(r.i16(p + 2));
            p += 4;
        } else if (flags & 0x80) {
            a = f2dot14(r.i16(p));
            b = f2dot14(r.i16(p + 2));
            c = f2dot14(r.i16(p + 4));
            d = f2dot14(r.i16(p + 6));
            p += 8;
        }
        // Compose the component transform with the parent one.
        double child[6] = {m[0] * a + m[2] * b, m[1] * a + m[3] * b, m[0] * c + m[2] * d,
                           m[1] * c + m[3] * d, m[0] * dx + m[2] * dy + m[4], m[1] * dx + m[3] * dy + m[5]};
        outline_into(part, child, depth + 1, out);
        if (!(flags & 0x20)) break;
    }
}

}  // namespace slideeval
