#include "slideeval/slide_io.hpp"

#include <cmath>
#include <initializer_list>

using nlohmann::json;

namespace slideeval {

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::syntax: return "syntax";
        case ViolationKind::missing: return "missing";
        case ViolationKind::type: return "type";
        case ViolationKind::enum_value: return "enum";
        case ViolationKind::format: return "format";
        case ViolationKind::range: return "range";
        case ViolationKind::shape: return "shape";
        case ViolationKind::unknown_field: return "unknown_field";
    }
    return "syntax";
}

ValidationError::ValidationError(std::string path, ViolationKind kind, const std::string& detail)
    : std::runtime_error((path.empty() ? std::string("<root>") : path) + ": " + std::string(to_string(kind)) +
                         (detail.empty() ? "" : " (" + detail + ")")),
      path_(std::move(path)),
      kind_(kind) {}

namespace {

std::string join(const std::string& base, std::string_view key) {
    return base.empty() ? std::string(key) : base + "." + std::string(key);
}

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

class Reader {
public:
    Reader(const json& obj, std::string path, const ValidationOptions& opts)
        : obj_(obj), path_(std::move(path)), opts_(opts) {
        if (!obj_.is_object()) throw ValidationError(path_, ViolationKind::type, "expected object");
    }

    void allow_only(std::initializer_list<std::string_view> keys) const {
        if (!opts_.strict) return;
        for (const auto& item : obj_.items()) {
            bool known = false;
            for (auto k : keys) known = known || item.key() == k;
            if (!known) throw ValidationError(join(path_, item.key()), ViolationKind::unknown_field, "");
        }
    }

    const json* find(std::string_view key) const {
        auto it = obj_.find(std::string(key));
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    const json& require(std::string_view key) const {
        const json* v = find(key);
        if (!v) throw ValidationError(join(path_, key), ViolationKind::missing, "");
        return *v;
    }

    double number(std::string_view key, std::optional<double> fallback = std::nullopt) const {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_number()) throw ValidationError(join(path_, key), ViolationKind::type, "expected number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) throw ValidationError(join(path_, key), ViolationKind::range, "not finite");
        return d;
    }

    double geometry(std::string_view key) const {
        const double d = number(key);
        return opts_.round_geometry ? std::round(d) : d;
    }

    double non_negative(std::string_view key, std::optional<double> fallback = std::nullopt) const {
        const double d = number(key, fallback);
        if (d < 0.0) throw ValidationError(join(path_, key), ViolationKind::range, "negative");
        return d;
    }

    bool boolean(std::string_view key, bool fallback) const {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ValidationError(join(path_, key), ViolationKind::type, "expected boolean");
        return v->get<bool>();
    }

    std::string string(std::string_view key) const {
        const json& v = require(key);
        if (!v.is_string()) throw ValidationError(join(path_, key), ViolationKind::type, "expected string");
        return v.get<std::string>();
    }

    ColorHex color(std::string_view key, std::optional<ColorHex> fallback = std::nullopt) const {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_string()) throw ValidationError(join(path_, key), ViolationKind::type, "expected string");
        auto c = ColorHex::parse(v->get_ref<const std::string&>());
        if (!c) throw ValidationError(join(path_, key), ViolationKind::format, "expected #RRGGBB");
        return *c;
    }

    BoxGeometry box() const {
        BoxGeometry b{geometry("x"), geometry("y"), geometry("w"), geometry("h")};
        if (b.w < 0.0) throw ValidationError(join(path_, "w"), ViolationKind::range, "negative");
        if (b.h < 0.0) throw ValidationError(join(path_, "h"), ViolationKind::range, "negative");
        return b;
    }

    const std::string& path() const { return path_; }

private:
    const json& obj_;
    std::string path_;
    const ValidationOptions& opts_;
};

template <typename Fn>
void for_each_item(const Reader& root, std::string_view key, Fn&& fn) {
    const json& list = root.require(key);
    const std::string path = join(root.path(), key);
    if (!list.is_array()) throw ValidationError(path, ViolationKind::type, "expected array");
    for (std::size_t i = 0; i < list.size(); ++i) fn(list[i], index_path(path, i));
}

FontSpec read_font(const Reader& parent, const ValidationOptions& opts) {
    Reader r(parent.require("font"), join(parent.path(), "font"), opts);
    r.allow_only({"name", "size", "bold", "italic", "underline", "color"});
    FontSpec f;
    f.name = r.string("name");
    f.size = r.number("size");
    if (f.size <= 0.0) throw ValidationError(join(r.path(), "size"), ViolationKind::range, "must be > 0");
    f.bold = r.boolean("bold", false);
    f.italic = r.boolean("italic", false);
    f.underline = r.boolean("underline", false);
    f.color = r.color("color");
    return f;
}

std::vector<std::string> read_cells(const Reader& r, int rows, int cols) {
    const json& cells = r.require("cells");
    const std::string path = join(r.path(), "cells");
    if (!cells.is_array()) throw ValidationError(path, ViolationKind::type, "expected array");
    std::vector<std::string> out;
    auto take = [&](const json& v, const std::string& p) {
        if (!v.is_string()) throw ValidationError(p, ViolationKind::type, "expected string");
        out.push_back(v.get<std::string>());
    };
    const bool nested = !cells.empty() && cells[0].is_array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string p = index_path(path, i);
        if (nested) {
            if (!cells[i].is_array()) throw ValidationError(p, ViolationKind::type, "expected array");
            for (std::size_t j = 0; j < cells[i].size(); ++j) take(cells[i][j], index_path(p, j));
        } else {
            take(cells[i], p);
        }
    }
    if (out.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ValidationError(path, ViolationKind::shape, "expected rows*cols cells");
    }
    return out;
}

int read_count(const Reader& r, std::string_view key) {
    const json& v = r.require(key);
    if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == std::floor(v.get<double>()))) {
        throw ValidationError(join(r.path(), key), ViolationKind::type, "expected integer");
    }
    const double d = v.get<double>();
    if (d < 1.0 || d > 10000.0) throw ValidationError(join(r.path(), key), ViolationKind::range, "must be >= 1");
    return static_cast<int>(d);
}

}  // namespace

Slide validate_slide(const json& doc, const ValidationOptions& opts) {
    Reader root(doc, "", opts);
    root.allow_only({"id", "size", "background", "texts", "rects", "lines", "images", "tables"});

    Slide slide;
    if (const json* id = root.find("id")) {
        if (!id->is_string()) throw ValidationError("id", ViolationKind::type, "expected string");
        slide.slide_id = id->get<std::string>();
    }

    Reader size(root.require("size"), "size", opts);
    size.allow_only({"w", "h"});
    slide.width = size.number("w");
    slide.height = size.number("h");
    if (slide.width != kSlideWidth) throw ValidationError("size.w", ViolationKind::range, "slide width is 960");
    if (slide.height != kSlideHeight) throw ValidationError("size.h", ViolationKind::range, "slide height is 540");

    slide.background = root.color("background");

    for_each_item(root, "texts", [&](const json& item, const std::string& path) {
        Reader r(item, path, opts);
        r.allow_only({"x", "y", "w", "h", "text", "font", "align"});
        TextElement t;
        t.geometry = r.box();
        t.content = r.string("text");
        t.font = read_font(r, opts);
        if (const json* a = r.find("align")) {
            if (!a->is_string()) throw ValidationError(join(path, "align"), ViolationKind::type, "expected string");
            auto parsed = parse_alignment(a->get_ref<const std::string&>());
            if (!parsed) throw ValidationError(join(path, "align"), ViolationKind::enum_value, a->get<std::string>());
            t.align = *parsed;
        }
        slide.texts.push_back(std::move(t));
    });

    for_each_item(root, "rects", [&](const json& item, const std::string& path) {
        Reader r(item, path, opts);
        r.allow_only({"x", "y", "w", "h", "rx", "fill", "stroke", "strokeWidth"});
        RectElement e;
        e.geometry = r.box();
        e.rx = r.non_negative("rx", 0.0);
        if (r.find("fill")) e.fill = r.color("fill");
        e.stroke = r.color("stroke", ColorHex());
        e.stroke_width = r.non_negative("strokeWidth", 0.0);
        slide.rects.push_back(std::move(e));
    });

    for_each_item(root, "lines", [&](const json& item, const std::string& path) {
        Reader r(item, path, opts);
        r.allow_only({"x1", "y1", "x2", "y2", "stroke", "strokeWidth"});
        LineElement e;
        e.x1 = r.geometry("x1");
        e.y1 = r.geometry("y1");
        e.x2 = r.geometry("x2");
        e.y2 = r.geometry("y2");
        e.stroke = r.color("stroke", ColorHex());
        e.stroke_width = r.non_negative("strokeWidth", 1.0);
        slide.lines.push_back(e);
    });

    for_each_item(root, "images", [&](const json& item, const std::string& path) {
        Reader r(item, path, opts);
        r.allow_only({"x", "y", "w", "h", "source"});
        ImageElement e;
        e.geometry = r.box();
        if (const json* src = r.find("source")) {
            if (!src->is_string()) throw ValidationError(join(path, "source"), ViolationKind::type, "expected string");
            e.source = src->get<std::string>();
        }
        slide.images.push_back(std::move(e));
    });

    for_each_item(root, "tables", [&](const json& item, const std::string& path) {
        Reader r(item, path, opts);
        r.allow_only({"x", "y", "w", "h", "rows", "cols", "cells"});
        TableElement e;
        e.geometry = r.box();
        e.rows = read_count(r, "rows");
        e.cols = read_count(r, "cols");
        e.cells = read_cells(r, e.rows, e.cols);
        slide.tables.push_back(std::move(e));
    });

    return slide;
}

Slide parse_slide(std::string_view text, const ValidationOptions& options) {
    json doc = json::parse(text.begin(), text.end(), nullptr, false);
    if (doc.is_discarded()) throw ValidationError("", ViolationKind::syntax, "not a JSON document");
    return validate_slide(doc, options);
}

namespace {

json box_json(const BoxGeometry& b) { return json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

}  // namespace

json to_json(const Slide& slide) {
    json doc;
    if (!slide.slide_id.empty()) doc["id"] = slide.slide_id;
    doc["size"] = {{"w", slide.width}, {"h", slide.height}};
    doc["background"] = slide.background.str();

    doc["texts"] = json::array();
    for (const auto& t : slide.texts) {
        json j = box_json(t.geometry);
        j["text"] = t.content;
        j["align"] = to_string(t.align);
        j["font"] = {{"name", t.font.name},         {"size", t.font.size},
                     {"bold", t.font.bold},         {"italic", t.font.italic},
                     {"underline", t.font.underline}, {"color", t.font.color.str()}};
        doc["texts"].push_back(std::move(j));
    }
    doc["rects"] = json::array();
    for (const auto& r : slide.rects) {
        json j = box_json(r.geometry);
        j["rx"] = r.rx;
        j["fill"] = r.fill ? json(r.fill->str()) : json(nullptr);
        j["stroke"] = r.stroke.str();
        j["strokeWidth"] = r.stroke_width;
        doc["rects"].push_back(std::move(j));
    }
    doc["lines"] = json::array();
    for (const auto& l : slide.lines) {
        doc["lines"].push_back({{"x1", l.x1},
                                {"y1", l.y1},
                                {"x2", l.x2},
                                {"y2", l.y2},
                                {"stroke", l.stroke.str()},
                                {"strokeWidth", l.stroke_width}});
    }
    doc["images"] = json::array();
    for (const auto& im : slide.images) {
        json j = box_json(im.geometry);
        j["source"] = im.source;
        doc["images"].push_back(std::move(j));
    }
    doc["tables"] = json::array();
    for (const auto& t : slide.tables) {
        json j = box_json(t.geometry);
        j["rows"] = t.rows;
        j["cols"] = t.cols;
        j["cells"] = t.cells;
        doc["tables"].push_back(std::move(j));
    }
    return doc;
}

std::string serialize(const Slide& slide) {
    return to_json(slide).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

Slide roundtrip(const Slide& slide) { return parse_slide(serialize(slide)); }

}  // namespace slideeval
