#include "slideeval/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

#include "slideeval/slide_io.hpp"
#include "slideeval/zip.hpp"
#include "xml.hpp"

namespace slideeval {

double emu_to_px(double value, double native_extent, double target_extent) {
    if (!(native_extent > 0.0)) throw ZeroExtent("native extent must be positive");
    return value * target_extent / native_extent;
}

std::optional<ColorHex> ThemeContext::scheme(std::string_view slot) const {
    std::string key(slot);
    if (auto m = color_map.find(key); m != color_map.end()) key = m->second;
    if (auto c = colors.find(key); c != colors.end()) return c->second;
    return std::nullopt;
}

namespace {

using xml::Node;
using NodePtr = std::unique_ptr<Node>;

std::int64_t to_int(std::optional<std::string_view> s, std::int64_t fallback = 0) {
    if (!s) return fallback;
    std::int64_t v = fallback;
    const auto* b = s->data();
    auto [ptr, ec] = std::from_chars(b, b + s->size(), v);
    return ec == std::errc() ? v : fallback;
}

bool to_bool(std::optional<std::string_view> s) { return s && (*s == "1" || *s == "true"); }

// ---- package plumbing ------------------------------------------------------

std::string dir_of(std::string_view part) {
    const auto slash = part.rfind('/');
    return slash == std::string_view::npos ? std::string() : std::string(part.substr(0, slash));
}

std::string rels_of(std::string_view part) {
    const auto slash = part.rfind('/');
    if (slash == std::string_view::npos) return "_rels/" + std::string(part) + ".rels";
    return std::string(part.substr(0, slash)) + "/_rels/" + std::string(part.substr(slash + 1)) + ".rels";
}

std::string resolve(std::string_view base_part, std::string_view target) {
    std::vector<std::string> segs;
    std::string joined = target.starts_with('/') ? std::string(target.substr(1))
                                                 : (dir_of(base_part).empty() ? "" : dir_of(base_part) + "/") +
                                                       std::string(target);
    std::size_t start = 0;
    while (start <= joined.size()) {
        auto end = joined.find('/', start);
        if (end == std::string::npos) end = joined.size();
        const std::string seg = joined.substr(start, end - start);
        if (seg == "..") {
            if (!segs.empty()) segs.pop_back();
        } else if (!seg.empty() && seg != ".") {
            segs.push_back(seg);
        }
        start = end + 1;
    }
    std::string out;
    for (const auto& s : segs) out += (out.empty() ? "" : "/") + s;
    return out;
}

struct Rel {
    std::string type;
    std::string target;  // resolved part name, or the raw URL when external
    bool external = false;
};

// ---- colours ---------------------------------------------------------------

const std::map<std::string, std::string, std::less<>>& preset_colors() {
    static const std::map<std::string, std::string, std::less<>> m = {
        {"black", "#000000"},  {"white", "#FFFFFF"},    {"red", "#FF0000"},     {"green", "#008000"},
        {"blue", "#0000FF"},   {"yellow", "#FFFF00"},   {"cyan", "#00FFFF"},    {"magenta", "#FF00FF"},
        {"gray", "#808080"},   {"grey", "#808080"},     {"darkGray", "#A9A9A9"}, {"lightGray", "#D3D3D3"},
        {"orange", "#FFA500"}, {"purple", "#800080"},   {"navy", "#000080"},    {"maroon", "#800000"},
        {"olive", "#808000"},  {"teal", "#008080"},     {"silver", "#C0C0C0"},  {"lime", "#00FF00"},
        {"darkBlue", "#00008B"}, {"darkRed", "#8B0000"}, {"darkGreen", "#006400"}, {"brown", "#A52A2A"},
    };
    return m;
}

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgb apply_modifiers(Rgb c, const Node& node) {
    for (const auto& m : node.children) {
        const std::string_view k = m->local();
        const double v = static_cast<double>(to_int(m->attr("val"), 100000)) / 100000.0;
        if (k == "tint") {
            c = {clamp_byte(255 - (255 - c.r) * v), clamp_byte(255 - (255 - c.g) * v),
                 clamp_byte(255 - (255 - c.b) * v)};
        } else if (k == "shade") {
            c = {clamp_byte(c.r * v), clamp_byte(c.g * v), clamp_byte(c.b * v)};
        } else if (k == "lumMod" || k == "lumOff" || k == "satMod" || k == "hueOff" || k == "hueMod") {
            Hls h = rgb_to_hls(c);
            if (k == "lumMod") h.l = std::clamp(h.l * v, 0.0, 1.0);
            else if (k == "lumOff") h.l = std::clamp(h.l + v, 0.0, 1.0);
            else if (k == "satMod") h.s = std::clamp(h.s * v, 0.0, 1.0);
            else if (k == "hueMod") h.h = std::fmod(h.h * v, 360.0);
            else h.h = std::fmod(h.h + static_cast<double>(to_int(m->attr("val"))) / 60000.0 + 360.0, 360.0);
            c = hls_to_rgb(h);
        } else if (k == "inv") {
            c = {static_cast<std::uint8_t>(255 - c.r), static_cast<std::uint8_t>(255 - c.g),
                 static_cast<std::uint8_t>(255 - c.b)};
        }
    }
    return c;
}

/// Colour from the first colour child of `parent` (srgbClr, schemeClr, ...).
std::optional<ColorHex> color_in(const Node* parent, const ThemeContext& theme,
                                 std::optional<ColorHex> placeholder = std::nullopt) {
    if (!parent) return std::nullopt;
    for (const auto& c : parent->children) {
        const std::string_view k = c->local();
        std::optional<ColorHex> base;
        if (k == "srgbClr") {
            base = ColorHex::parse("#" + std::string(c->attr("val").value_or("")));
        } else if (k == "sysClr") {
            base = ColorHex::parse("#" + std::string(c->attr("lastClr").value_or("000000")));
        } else if (k == "schemeClr") {
            const std::string_view slot = c->attr("val").value_or("");
            base = slot == "phClr" ? placeholder : theme.scheme(slot);
        } else if (k == "prstClr") {
            auto it = preset_colors().find(c->attr("val").value_or(""));
            if (it != preset_colors().end()) base = ColorHex::from_string(it->second);
        } else if (k == "scrgbClr") {
            auto pct = [&](const char* a) { return clamp_byte(to_int(c->attr(a)) / 100000.0 * 255.0); };
            base = ColorHex(Rgb{pct("r"), pct("g"), pct("b")});
        } else if (k == "hslClr") {
            Hls h{to_int(c->attr("hue")) / 60000.0, to_int(c->attr("lum")) / 100000.0,
                  to_int(c->attr("sat")) / 100000.0};
            base = ColorHex(hls_to_rgb(h));
        } else {
            continue;
        }
        if (!base) return std::nullopt;
        return ColorHex(apply_modifiers(base->rgb(), *c));
    }
    return std::nullopt;
}

// ---- text properties ---------------------------------------------------------

struct RunProps {
    std::optional<double> size;
    std::optional<bool> bold, italic, underline;
    std::optional<ColorHex> color;
    std::optional<std::string> typeface;

    void fill_from(const Node* rpr, const ThemeContext& theme) {
        if (!rpr) return;
        if (!size) {
            if (auto sz = rpr->attr("sz")) size = static_cast<double>(to_int(sz)) / 100.0;
        }
        if (!bold && rpr->attr("b")) bold = to_bool(rpr->attr("b"));
        if (!italic && rpr->attr("i")) italic = to_bool(rpr->attr("i"));
        if (!underline) {
            if (auto u = rpr->attr("u")) underline = *u != "none";
        }
        if (!color) {
            if (const Node* f = rpr->child("solidFill")) color = color_in(f, theme);
            else if (const Node* g = rpr->child("gradFill")) color = color_in(g->find("gs"), theme);
        }
        if (!typeface) {
            if (const Node* latin = rpr->child("latin")) {
                if (auto t = latin->attr("typeface"); t && !t->empty()) typeface = std::string(*t);
            }
        }
    }
};

std::string resolve_typeface(const std::string& face, const ThemeContext& theme) {
    if (face.starts_with("+mj")) return theme.major_font;
    if (face.starts_with("+mn")) return theme.minor_font;
    return face;
}

std::optional<Alignment> parse_algn(std::optional<std::string_view> a) {
    if (!a) return std::nullopt;
    if (*a == "l") return Alignment::left;
    if (*a == "ctr") return Alignment::center;
    if (*a == "r") return Alignment::right;
    if (*a == "just" || *a == "justLow") return Alignment::justify;
    if (*a == "dist" || *a == "thaiDist") return Alignment::distributed;
    return std::nullopt;
}

std::string paragraph_text(const Node& p) {
    std::string out;
    for (const auto& c : p.children) {
        const std::string_view k = c->local();
        if (k == "r" || k == "fld") {
            if (const Node* t = c->child("t")) out += t->text;
        } else if (k == "br") {
            out += '\n';
        }
    }
    return out;
}

std::string body_text(const Node* tx_body) {
    if (!tx_body) return {};
    std::string out;
    bool first = true;
    for (const Node* p : tx_body->all("p")) {
        if (!first) out += '\n';
        out += paragraph_text(*p);
        first = false;
    }
    return out;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; });
}

// ---- placeholders ------------------------------------------------------------

struct Placeholder {
    std::string type;  // normalized: title | body | other kinds as written
    std::optional<std::int64_t> idx;
};

std::optional<Placeholder> placeholder_of(const Node& shape) {
    const Node* nv = nullptr;
    for (const auto& c : shape.children) {
        if (c->local().starts_with("nv")) nv = c.get();
    }
    if (!nv) return std::nullopt;
    const Node* nvpr = nv->child("nvPr");
    const Node* ph = nvpr ? nvpr->child("ph") : nullptr;
    if (!ph) return std::nullopt;
    Placeholder p;
    std::string type(ph->attr("type").value_or("body"));
    if (type == "ctrTitle") type = "title";
    if (type == "subTitle" || type == "obj") type = "body";
    p.type = type;
    if (auto idx = ph->attr("idx")) p.idx = to_int(idx);
    return p;
}

const Node* find_placeholder(const Node* tree, const Placeholder& want, bool by_idx) {
    if (!tree) return nullptr;
    const Node* by_type = nullptr;
    for (const auto& c : tree->children) {
        if (c->local() != "sp") continue;
        auto ph = placeholder_of(*c);
        if (!ph) continue;
        if (by_idx && want.idx && ph->idx == want.idx) return c.get();
        if (!by_type && ph->type == want.type) by_type = c.get();
    }
    return by_type;
}

// ---- geometry ----------------------------------------------------------------

struct Xfrm {
    double x = 0, y = 0, w = 0, h = 0;
    std::int64_t rot = 0;
    bool flip_h = false, flip_v = false;
};

std::optional<Xfrm> read_xfrm(const Node* xfrm) {
    if (!xfrm) return std::nullopt;
    const Node* off = xfrm->child("off");
    const Node* ext = xfrm->child("ext");
    if (!off || !ext) return std::nullopt;
    Xfrm x;
    x.x = static_cast<double>(to_int(off->attr("x")));
    x.y = static_cast<double>(to_int(off->attr("y")));
    x.w = static_cast<double>(to_int(ext->attr("cx")));
    x.h = static_cast<double>(to_int(ext->attr("cy")));
    x.rot = to_int(xfrm->attr("rot"));
    x.flip_h = to_bool(xfrm->attr("flipH"));
    x.flip_v = to_bool(xfrm->attr("flipV"));
    return x;
}

const Node* shape_props(const Node& shape) {
    for (const char* k : {"spPr", "grpSpPr"}) {
        if (const Node* n = shape.child(k)) return n;
    }
    return nullptr;
}

std::optional<Xfrm> shape_xfrm(const Node& shape) {
    if (shape.local() == "graphicFrame") return read_xfrm(shape.child("xfrm"));
    const Node* pr = shape_props(shape);
    return pr ? read_xfrm(pr->child("xfrm")) : std::nullopt;
}

// ---- deck parts ----------------------------------------------------------------

struct SlideParts {
    NodePtr slide, layout, master, theme, presentation;
    std::string slide_name, layout_name, master_name, theme_name;
    std::map<std::string, Rel> slide_rels;
};

}  // namespace

struct Deck::Impl {
    std::string deck_id;
    std::filesystem::path path;
    ZipArchive zip;
    std::string presentation_part;
    std::int64_t cx = 0, cy = 0;
    std::vector<std::string> slides;

    NodePtr parse_part(const std::string& name) const {
        if (!zip.contains(name)) throw MalformedXml("missing part " + name);
        try {
            return xml::parse(zip.read(name));
        } catch (const xml::ParseError& e) {
            throw MalformedXml(name + ": " + e.what());
        } catch (const ZipError& e) {
            throw MalformedXml(name + ": " + e.what());
        }
    }

    std::map<std::string, Rel> rels(const std::string& part) const {
        std::map<std::string, Rel> out;
        const std::string name = rels_of(part);
        if (!zip.contains(name)) return out;
        const NodePtr root = parse_part(name);
        for (const Node* r : root->all("Relationship")) {
            Rel rel;
            rel.type = std::string(r->attr("Type").value_or(""));
            rel.external = r->attr("TargetMode").value_or("") == "External";
            const std::string target(r->attr("Target").value_or(""));
            rel.target = rel.external ? target : resolve(part, target);
            out.emplace(std::string(r->attr("Id").value_or("")), std::move(rel));
        }
        return out;
    }

    static std::optional<std::string> rel_of_type(const std::map<std::string, Rel>& rels, std::string_view suffix) {
        for (const auto& [_, r] : rels) {
            if (!r.external && r.type.ends_with(suffix)) return r.target;
        }
        return std::nullopt;
    }

    SlideParts load(std::size_t index) const {
        if (index < 1 || index > slides.size()) {
            throw IndexOutOfRange("slide " + std::to_string(index) + " of " + std::to_string(slides.size()));
        }
        SlideParts p;
        p.slide_name = slides[index - 1];
        p.slide = parse_part(p.slide_name);
        p.slide_rels = rels(p.slide_name);
        if (auto layout = rel_of_type(p.slide_rels, "/slideLayout"); layout && zip.contains(*layout)) {
            p.layout_name = *layout;
            p.layout = parse_part(*layout);
            if (auto master = rel_of_type(rels(*layout), "/slideMaster"); master && zip.contains(*master)) {
                p.master_name = *master;
                p.master = parse_part(*master);
                if (auto theme = rel_of_type(rels(*master), "/theme"); theme && zip.contains(*theme)) {
                    p.theme_name = *theme;
                    p.theme = parse_part(*theme);
                }
            }
        }
        p.presentation = parse_part(presentation_part);
        return p;
    }
};

namespace {

void read_color_map(const Node* node, std::map<std::string, std::string>& map) {
    if (!node) return;
    for (const auto& [k, v] : node->attrs) {
        const auto colon = k.find(':');
        map[colon == std::string::npos ? k : k.substr(colon + 1)] = v;
    }
}

ThemeContext build_theme(const SlideParts& p) {
    ThemeContext t;
    t.chain = {p.slide_name};
    if (!p.layout_name.empty()) t.chain.push_back(p.layout_name);
    if (!p.master_name.empty()) t.chain.push_back(p.master_name);
    if (!p.theme_name.empty()) t.chain.push_back(p.theme_name);
    t.color_map = {{"bg1", "lt1"}, {"tx1", "dk1"}, {"bg2", "lt2"}, {"tx2", "dk2"}};
    t.colors = {{"dk1", ColorHex::from_string("#000000")}, {"lt1", ColorHex::from_string("#FFFFFF")},
                {"dk2", ColorHex::from_string("#44546A")}, {"lt2", ColorHex::from_string("#E7E6E6")}};
    if (p.theme) {
        if (const Node* scheme = p.theme->find("clrScheme")) {
            for (const auto& slot : scheme->children) {
                ThemeContext empty;
                if (auto c = color_in(slot.get(), empty)) t.colors[std::string(slot->local())] = *c;
            }
        }
        if (const Node* fonts = p.theme->find("fontScheme")) {
            auto latin = [&](const char* which) -> std::optional<std::string> {
                const Node* f = fonts->child(which);
                const Node* l = f ? f->child("latin") : nullptr;
                auto face = l ? l->attr("typeface") : std::nullopt;
                if (!face || face->empty()) return std::nullopt;
                return std::string(*face);
            };
            if (auto f = latin("majorFont")) t.major_font = *f;
            if (auto f = latin("minorFont")) t.minor_font = *f;
        }
    }
    if (p.master) read_color_map(p.master->child("clrMap"), t.color_map);
    for (const Node* part : {p.layout.get(), p.slide.get()}) {
        if (!part) continue;
        if (const Node* ovr = part->child("clrMapOvr")) read_color_map(ovr->child("overrideClrMapping"), t.color_map);
    }
    return t;
}

const Node* sp_tree(const Node* part) {
    if (!part) return nullptr;
    const Node* csld = part->child("cSld");
    return csld ? csld->child("spTree") : nullptr;
}

class SlideBuilder {
public:
    SlideBuilder(double cx, double cy, const SlideParts& parts, const ThemeContext& theme, const IngestOptions& opt,
                 std::vector<std::string>& warnings)
        : cx_(cx), cy_(cy), parts_(parts), theme_(theme), opt_(opt), warnings_(warnings) {}

    Slide build(std::string slide_id) {
        slide_.slide_id = std::move(slide_id);
        slide_.background = background();
        if (const Node* tree = sp_tree(parts_.slide.get())) walk(*tree);
        return std::move(slide_);
    }

private:
    double px_x(double emu) const { return emu_to_px(emu, cx_, kSlideWidth); }
    double px_y(double emu) const { return emu_to_px(emu, cy_, kSlideHeight); }

    BoxGeometry box(const Xfrm& x) const { return {px_x(x.x), px_y(x.y), px_x(x.w), px_y(x.h)}; }

    std::string describe(const Node& shape) const {
        std::string name = std::string(shape.local());
        if (const Node* c = shape.find("cNvPr")) name += " '" + std::string(c->attr("name").value_or("")) + "'";
        return name;
    }

    ColorHex background() {
        for (const Node* part : {parts_.slide.get(), parts_.layout.get(), parts_.master.get()}) {
            if (!part) continue;
            const Node* csld = part->child("cSld");
            const Node* bg = csld ? csld->child("bg") : nullptr;
            if (!bg) continue;
            if (const Node* pr = bg->child("bgPr")) {
                if (const Node* f = pr->child("solidFill")) {
                    if (auto c = color_in(f, theme_)) return *c;
                }
                if (const Node* g = pr->child("gradFill")) {
                    warnings_.push_back("gradient background reduced to its first stop");
                    if (auto c = color_in(g->find("gs"), theme_)) return *c;
                }
                if (pr->child("blipFill")) warnings_.push_back("picture background replaced by white");
                return ColorHex(Rgb{255, 255, 255});
            }
            if (const Node* ref = bg->child("bgRef")) {
                if (auto c = color_in(ref, theme_)) return *c;
            }
        }
        return theme_.scheme("bg1").value_or(ColorHex(Rgb{255, 255, 255}));
    }

    void walk(const Node& tree) {
        for (const auto& c : tree.children) {
            const std::string_view k = c->local();
            if (k == "nvGrpSpPr" || k == "grpSpPr" || k == "extLst") continue;
            if (hidden(*c)) {
                warnings_.push_back("hidden shape skipped: " + describe(*c));
                continue;
            }
            if (k == "sp") shape(*c);
            else if (k == "cxnSp") connector(*c);
            else if (k == "pic") picture(*c);
            else if (k == "graphicFrame") frame(*c);
            else if (k == "grpSp") unsupported(*c, "group");
            else if (k == "AlternateContent") {
                if (const Node* fb = c->child("Fallback")) walk(*fb);
            } else {
                warnings_.push_back("unsupported element skipped: " + std::string(k));
            }
        }
    }

    static bool hidden(const Node& shape) {
        const Node* c = shape.find("cNvPr");
        return c && to_bool(c->attr("hidden"));
    }

    void note_rotation(const Xfrm& x, const Node& shape) {
        if (x.rot % 21600000 != 0) {
            warnings_.push_back("rotation " + std::to_string(static_cast<double>(x.rot) / 60000.0) +
                                " deg ignored on " + describe(shape));
        }
    }

    /// Placeholder lookups: slide shape, then the layout and master matches.
    std::vector<const Node*> inheritance(const Node& shape) const {
        std::vector<const Node*> chain{&shape};
        auto ph = placeholder_of(shape);
        if (!ph) return chain;
        if (const Node* l = find_placeholder(sp_tree(parts_.layout.get()), *ph, true)) chain.push_back(l);
        if (const Node* m = find_placeholder(sp_tree(parts_.master.get()), *ph, false)) chain.push_back(m);
        return chain;
    }

    std::optional<Xfrm> geometry(const Node& shape) const {
        for (const Node* n : inheritance(shape)) {
            if (auto x = shape_xfrm(*n)) return x;
        }
        return std::nullopt;
    }

    struct Stroke {
        ColorHex color;
        double width = 0.0;
    };

    std::optional<ColorHex> shape_fill(const Node& shape) const {
        const Node* pr = shape_props(shape);
        if (pr) {
            if (pr->child("noFill")) return std::nullopt;
            if (const Node* f = pr->child("solidFill")) return color_in(f, theme_);
            if (const Node* g = pr->child("gradFill")) return color_in(g->find("gs"), theme_);
            if (pr->child("pattFill") || pr->child("blipFill") || pr->child("grpFill")) return std::nullopt;
        }
        const Node* style = shape.child("style");
        const Node* ref = style ? style->child("fillRef") : nullptr;
        if (ref && to_int(ref->attr("idx")) > 0) return color_in(ref, theme_);
        return std::nullopt;
    }

    std::optional<Stroke> shape_stroke(const Node& shape) const {
        const Node* pr = shape_props(shape);
        const Node* ln = pr ? pr->child("ln") : nullptr;
        const Node* style = shape.child("style");
        const Node* ref = style ? style->child("lnRef") : nullptr;
        const bool themed = ref && to_int(ref->attr("idx")) > 0;
        if (ln && ln->child("noFill")) return std::nullopt;
        std::optional<ColorHex> color;
        if (ln) {
            if (const Node* f = ln->child("solidFill")) color = color_in(f, theme_);
        }
        if (!color && themed) color = color_in(ref, theme_);
        if (!color) return std::nullopt;
        const double width = ln && ln->attr("w") ? static_cast<double>(to_int(ln->attr("w"))) / 12700.0 : 0.75;
        return Stroke{*color, width};
    }

    void shape(const Node& sp) {
        auto x = geometry(sp);
        if (!x) {
            warnings_.push_back("shape without geometry skipped: " + describe(sp));
            return;
        }
        note_rotation(*x, sp);
        const Node* pr = sp.child("spPr");
        const Node* geom = pr ? pr->child("prstGeom") : nullptr;
        const std::string prst(geom ? geom->attr("prst").value_or("rect") : "rect");
        if (prst == "line" || prst.starts_with("straightConnector")) {
            line_from(*x, sp);
            return;
        }
        const auto fill = shape_fill(sp);
        const auto stroke = shape_stroke(sp);
        if (fill || stroke) {
            RectElement r;
            r.geometry = box(*x);
            r.fill = fill;
            if (stroke) {
                r.stroke = stroke->color;
                r.stroke_width = stroke->width;
            }
            if (prst == "roundRect") {
                double adj = 16667.0;
                if (const Node* av = geom->child("avLst")) {
                    for (const Node* gd : av->all("gd")) {
                        const std::string_view f = gd->attr("fmla").value_or("");
                        if (f.starts_with("val ")) adj = static_cast<double>(to_int(f.substr(4)));
                    }
                }
                r.rx = adj / 100000.0 * std::min(r.geometry.w, r.geometry.h);
            } else if (prst != "rect") {
                warnings_.push_back("preset '" + prst + "' approximated by its bounding box: " + describe(sp));
            }
            slide_.rects.push_back(r);
        }
        if (const Node* body = sp.child("txBody")) text(sp, *body, *x);
    }

    void text(const Node& sp, const Node& body, const Xfrm& x) {
        const std::string content = body_text(&body);
        if (blank(content)) return;
        const auto chain = inheritance(sp);
        const auto ph = placeholder_of(sp);
        const bool title = ph && ph->type == "title";

        // First run that carries text decides the element's font.
        const Node* first_p = nullptr;
        const Node* first_r = nullptr;
        for (const Node* p : body.all("p")) {
            for (const auto& r : p->children) {
                if (r->local() != "r" && r->local() != "fld") continue;
                const Node* t = r->child("t");
                if (t && !blank(t->text)) {
                    first_p = p;
                    first_r = r.get();
                    break;
                }
            }
            if (first_r) break;
        }
        if (!first_p) first_p = body.child("p");
        const Node* ppr = first_p ? first_p->child("pPr") : nullptr;
        const int level = static_cast<int>(std::clamp<std::int64_t>(to_int(ppr ? ppr->attr("lvl") : std::nullopt), 0, 8));
        const std::string lvl_name = "lvl" + std::to_string(level + 1) + "pPr";

        // Paragraph property levels in priority order.
        std::vector<const Node*> levels;
        if (ppr) levels.push_back(ppr);
        for (const Node* n : chain) {
            const Node* tb = n->child("txBody");
            const Node* ls = tb ? tb->child("lstStyle") : nullptr;
            if (const Node* l = ls ? ls->child(lvl_name) : nullptr) levels.push_back(l);
        }
        if (parts_.master) {
            if (const Node* styles = parts_.master->child("txStyles")) {
                const char* which = title ? "titleStyle" : ph && ph->type == "body" ? "bodyStyle" : "otherStyle";
                if (const Node* s = ph ? styles->child(which) : nullptr) {
                    if (const Node* l = s->child(lvl_name)) levels.push_back(l);
                }
            }
        }
        if (const Node* dts = ph ? nullptr : parts_.presentation->child("defaultTextStyle")) {
            if (const Node* l = dts->child(lvl_name)) levels.push_back(l);
        }

        RunProps props;
        if (first_r) props.fill_from(first_r->child("rPr"), theme_);
        for (const Node* l : levels) props.fill_from(l->child("defRPr"), theme_);
        if (const Node* style = sp.child("style")) {
            if (const Node* fref = style->child("fontRef")) {
                if (!props.typeface) {
                    const std::string_view idx = fref->attr("idx").value_or("minor");
                    props.typeface = idx == "major" ? "+mj-lt" : "+mn-lt";
                }
                if (!props.color) props.color = color_in(fref, theme_);
            }
        }

        TextElement t;
        t.geometry = box(x);
        t.content = content;
        t.font.name = resolve_typeface(props.typeface.value_or(title ? "+mj-lt" : "+mn-lt"), theme_);
        t.font.size = props.size.value_or(18.0);
        t.font.bold = props.bold.value_or(false);
        t.font.italic = props.italic.value_or(false);
        t.font.underline = props.underline.value_or(false);
        t.font.color = props.color.value_or(theme_.scheme("tx1").value_or(ColorHex()));
        for (const Node* l : levels) {
            if (auto a = parse_algn(l->attr("algn"))) {
                t.align = *a;
                break;
            }
        }
        if (const Node* bp = body.child("bodyPr")) {
            if (const Node* fit = bp->child("normAutofit")) {
                if (auto scale = fit->attr("fontScale")) {
                    t.font.size = std::round(t.font.size * static_cast<double>(to_int(scale)) / 1000.0) / 100.0;
                }
            }
        }
        if (t.font.size <= 0.0) t.font.size = 1.0;
        slide_.texts.push_back(std::move(t));
    }

    void line_from(const Xfrm& x, const Node& shape) {
        LineElement l;
        l.x1 = px_x(x.flip_h ? x.x + x.w : x.x);
        l.x2 = px_x(x.flip_h ? x.x : x.x + x.w);
        l.y1 = px_y(x.flip_v ? x.y + x.h : x.y);
        l.y2 = px_y(x.flip_v ? x.y : x.y + x.h);
        if (auto s = shape_stroke(shape)) {
            l.stroke = s->color;
            l.stroke_width = s->width;
        } else {
            l.stroke = theme_.scheme("tx1").value_or(ColorHex());
            l.stroke_width = 0.75;
        }
        slide_.lines.push_back(l);
    }

    void connector(const Node& c) {
        auto x = geometry(c);
        if (!x) {
            warnings_.push_back("connector without geometry skipped: " + describe(c));
            return;
        }
        note_rotation(*x, c);
        line_from(*x, c);
    }

    void picture(const Node& pic) {
        auto x = geometry(pic);
        if (!x) {
            warnings_.push_back("picture without geometry skipped: " + describe(pic));
            return;
        }
        note_rotation(*x, pic);
        ImageElement im;
        im.geometry = box(*x);
        if (const Node* blip = pic.find("blip")) {
            auto id = blip->attr("embed");
            if (!id) id = blip->attr("link");
            if (id) {
                if (auto it = parts_.slide_rels.find(std::string(*id)); it != parts_.slide_rels.end()) {
                    im.source = it->second.target;
                }
            }
        }
        if (im.source.empty()) warnings_.push_back("picture without resolvable image: " + describe(pic));
        slide_.images.push_back(im);
    }

    void frame(const Node& f) {
        auto x = geometry(f);
        const Node* data = f.find("graphicData");
        const Node* tbl = data ? data->child("tbl") : nullptr;
        if (!x) {
            warnings_.push_back("graphic frame without geometry skipped: " + describe(f));
            return;
        }
        if (!tbl) {
            const std::string_view uri = data ? data->attr("uri").value_or("") : "";
            const char* kind = uri.find("chart") != std::string_view::npos     ? "chart"
                               : uri.find("diagram") != std::string_view::npos ? "SmartArt"
                                                                                 : "graphic";
            unsupported(f, kind);
            return;
        }
        note_rotation(*x, f);
        TableElement t;
        t.geometry = box(*x);
        const Node* grid = tbl->child("tblGrid");
        const auto rows = tbl->all("tr");
        int cols = grid ? static_cast<int>(grid->all("gridCol").size()) : 0;
        for (const Node* tr : rows) cols = std::max(cols, static_cast<int>(tr->all("tc").size()));
        t.rows = std::max<int>(1, static_cast<int>(rows.size()));
        t.cols = std::max(1, cols);
        for (const Node* tr : rows) {
            auto cells = tr->all("tc");
            for (int c = 0; c < t.cols; ++c) {
                const Node* tc = c < static_cast<int>(cells.size()) ? cells[static_cast<std::size_t>(c)] : nullptr;
                const bool merged = tc && (to_bool(tc->attr("hMerge")) || to_bool(tc->attr("vMerge")));
                t.cells.push_back(tc && !merged ? body_text(tc->child("txBody")) : std::string());
            }
        }
        if (rows.empty()) t.cells.assign(static_cast<std::size_t>(t.cols), "");
        slide_.tables.push_back(std::move(t));
    }

    void unsupported(const Node& shape, const std::string& kind) {
        if (opt_.strict) {
            warnings_.push_back(kind + " skipped (strict): " + describe(shape));
            return;
        }
        auto x = geometry(shape);
        if (!x) {
            warnings_.push_back(kind + " without geometry skipped: " + describe(shape));
            return;
        }
        RectElement r;
        r.geometry = box(*x);
        slide_.rects.push_back(r);
        warnings_.push_back(kind + " flattened to its bounding box: " + describe(shape));
    }

    double cx_, cy_;
    const SlideParts& parts_;
    const ThemeContext& theme_;
    const IngestOptions& opt_;
    std::vector<std::string>& warnings_;
    Slide slide_;
};

}  // namespace

Deck::Deck(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Deck::Deck(Deck&&) noexcept = default;
Deck& Deck::operator=(Deck&&) noexcept = default;
Deck::~Deck() = default;

Deck Deck::open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotAZip("cannot read " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Deck d = from_bytes(std::move(bytes), path.stem().string());
    d.impl_->path = path;
    return d;
}

Deck Deck::from_bytes(std::string bytes, std::string deck_id) {
    static constexpr unsigned char kCfb[] = {0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1};
    if (bytes.size() >= 8 && std::equal(kCfb, kCfb + 8, reinterpret_cast<const unsigned char*>(bytes.data()))) {
        throw UnsupportedLegacyFormat("legacy binary presentation (.ppt) is not supported");
    }
    auto impl = std::make_unique<Impl>();
    impl->deck_id = std::move(deck_id);
    try {
        impl->zip = ZipArchive::from_bytes(std::move(bytes));
    } catch (const ZipError& e) {
        throw NotAZip(e.what());
    }

    auto root_rels = impl->rels("");
    impl->presentation_part = Impl::rel_of_type(root_rels, "/officeDocument").value_or("ppt/presentation.xml");
    if (!impl->zip.contains(impl->presentation_part)) {
        throw MissingPresentationPart("no presentation part in package");
    }
    const NodePtr pres = impl->parse_part(impl->presentation_part);
    if (pres->local() != "presentation") throw MissingPresentationPart("root element is not a presentation");
    if (const Node* sz = pres->child("sldSz")) {
        impl->cx = to_int(sz->attr("cx"));
        impl->cy = to_int(sz->attr("cy"));
    }
    if (impl->cx <= 0 || impl->cy <= 0) throw ZeroExtent("slide size missing or zero");

    const auto rels = impl->rels(impl->presentation_part);
    if (const Node* list = pres->child("sldIdLst")) {
        for (const Node* id : list->all("sldId")) {
            auto rid = id->attr("id");
            for (const auto& [k, v] : id->attrs) {
                if (k.find(':') != std::string::npos && k.ends_with(":id")) rid = v;
            }
            auto it = rid ? rels.find(std::string(*rid)) : rels.end();
            if (it == rels.end()) throw MissingPresentationPart("slide relationship not found");
            impl->slides.push_back(it->second.target);
        }
    }
    if (impl->slides.empty()) throw MissingPresentationPart("presentation lists no slides");
    return Deck(std::move(impl));
}

const std::string& Deck::deck_id() const { return impl_->deck_id; }
const std::filesystem::path& Deck::path() const { return impl_->path; }
std::size_t Deck::slide_count() const { return impl_->slides.size(); }
std::int64_t Deck::emu_width() const { return impl_->cx; }
std::int64_t Deck::emu_height() const { return impl_->cy; }

std::string Deck::slide_part(std::size_t index) const {
    if (index < 1 || index > impl_->slides.size()) throw IndexOutOfRange("slide index out of range");
    return impl_->slides[index - 1];
}

std::optional<std::string> Deck::read_part(std::string_view name) const {
    if (!impl_->zip.contains(name)) return std::nullopt;
    try {
        return impl_->zip.read(name);
    } catch (const ZipError&) {
        return std::nullopt;
    }
}

ThemeContext Deck::theme_for(std::size_t index) const { return build_theme(impl_->load(index)); }

ExtractedSlide Deck::extract_slide(std::size_t index, const IngestOptions& options) const {
    const SlideParts parts = impl_->load(index);
    const ThemeContext theme = build_theme(parts);
    ExtractedSlide out;
    SlideBuilder builder(static_cast<double>(impl_->cx), static_cast<double>(impl_->cy), parts, theme, options, out.warnings);
    out.slide = builder.build(make_slide_id(impl_->deck_id, static_cast<int>(index)));
    // The schema validator is the final gate on every extracted slide.
    out.slide = validate_slide(to_json(out.slide));
    return out;
}

nlohmann::json DeckManifest::to_json() const {
    nlohmann::json slides_j = nlohmann::json::array();
    for (const auto& s : slides) {
        slides_j.push_back(
            {{"index", s.index}, {"slide_id", s.slide_id}, {"status", s.status}, {"warnings", s.warnings}});
    }
    return {{"deck_id", deck_id},
            {"path", path},
            {"emu_width", emu_width},
            {"emu_height", emu_height},
            {"slides", std::move(slides_j)}};
}

IngestResult ingest_deck(const std::filesystem::path& path, const IngestOptions& options) {
    const Deck deck = Deck::open(path);
    IngestResult r;
    r.manifest.deck_id = deck.deck_id();
    r.manifest.path = path.filename().string();
    r.manifest.emu_width = deck.emu_width();
    r.manifest.emu_height = deck.emu_height();
    for (std::size_t i = 1; i <= deck.slide_count(); ++i) {
        DeckManifestEntry e;
        e.index = i;
        e.slide_id = make_slide_id(deck.deck_id(), static_cast<int>(i));
        try {
            auto s = deck.extract_slide(i, options);
            e.warnings = std::move(s.warnings);
            r.slides.push_back(std::move(s.slide));
        } catch (const MalformedXml& ex) {
            e.status = "malformed_xml";
            e.warnings.push_back(ex.what());
        }
        r.manifest.slides.push_back(std::move(e));
    }
    return r;
}

}  // namespace slideeval
