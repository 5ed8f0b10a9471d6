#include <doctest.h>

#include "slideeval/slide_io.hpp"
#include "support.hpp"

using namespace slideeval;
using nlohmann::json;

namespace {

json empty_doc() {
    return json::parse(R"({"size":{"w":960,"h":540},"background":"#FFFFFF",
        "texts":[],"rects":[],"lines":[],"images":[],"tables":[]})");
}

json text_item() {
    return json::parse(R"({"x":10,"y":20,"w":300,"h":40,"text":"Title","align":"center",
        "font":{"name":"Calibri","size":18.5,"bold":true,"italic":false,"underline":false,"color":"#1f2937"}})");
}

void expect_violation(const json& doc, const std::string& path, ViolationKind kind,
                      const ValidationOptions& opts = {}) {
    try {
        validate_slide(doc, opts);
        FAIL("expected ValidationError at " << path);
    } catch (const ValidationError& e) {
        CHECK(e.path() == path);
        CHECK(e.kind() == kind);
    }
}

}  // namespace

TEST_CASE("empty document validates to an empty slide") {
    const Slide s = validate_slide(empty_doc());
    CHECK(complexity(s) == 0);
    CHECK(s.background.str() == "#FFFFFF");
    CHECK(s.width == 960);
    CHECK(s.height == 540);
}

TEST_CASE("violations carry field path and kind") {
    SUBCASE("enum") {
        json doc = empty_doc();
        json t = text_item();
        t["align"] = "middle";
        doc["texts"].push_back(t);
        expect_violation(doc, "texts[0].align", ViolationKind::enum_value);
    }
    SUBCASE("malformed hex") {
        json doc = empty_doc();
        doc["background"] = "#GGGGGG";
        expect_violation(doc, "background", ViolationKind::format);
    }
    SUBCASE("missing list") {
        json doc = empty_doc();
        doc.erase("lines");
        expect_violation(doc, "lines", ViolationKind::missing);
    }
    SUBCASE("type mismatch") {
        json doc = empty_doc();
        json t = text_item();
        t["x"] = "10";
        doc["texts"].push_back(t);
        expect_violation(doc, "texts[0].x", ViolationKind::type);
    }
    SUBCASE("frame is fixed") {
        json doc = empty_doc();
        doc["size"]["w"] = 1280;
        expect_violation(doc, "size.w", ViolationKind::range);
    }
    SUBCASE("unknown fields only in strict mode") {
        json doc = empty_doc();
        doc["notes"] = "x";
        expect_violation(doc, "notes", ViolationKind::unknown_field);
        CHECK_NOTHROW(validate_slide(doc, {.strict = false}));
    }
    SUBCASE("table shape") {
        json doc = empty_doc();
        doc["tables"].push_back(json::parse(R"({"x":0,"y":0,"w":10,"h":10,"rows":2,"cols":2,"cells":["a","b","c"]})"));
        expect_violation(doc, "tables[0].cells", ViolationKind::shape);
    }
    SUBCASE("non-positive font size") {
        json doc = empty_doc();
        json t = text_item();
        t["font"]["size"] = 0;
        doc["texts"].push_back(t);
        expect_violation(doc, "texts[0].font.size", ViolationKind::range);
    }
}

TEST_CASE("syntax errors are parse failures") {
    CHECK_THROWS_AS(parse_slide("Here is the slide: {"), ValidationError);
    try {
        parse_slide("not json");
    } catch (const ValidationError& e) {
        CHECK(e.kind() == ViolationKind::syntax);
    }
}

TEST_CASE("hex colors canonicalize to uppercase") {
    json doc = empty_doc();
    doc["background"] = "#abcdef";
    CHECK(validate_slide(doc).background.str() == "#ABCDEF");
    const auto c = ColorHex::from_string("#a1B2c3");
    CHECK(ColorHex::from_string(c.str()) == c);
    CHECK(is_canonical_hex(c.str()));
}

TEST_CASE("defaults for optional style fields") {
    json doc = empty_doc();
    doc["rects"].push_back(json::parse(R"({"x":0,"y":0,"w":10,"h":10})"));
    doc["lines"].push_back(json::parse(R"({"x1":0,"y1":0,"x2":10,"y2":0})"));
    const Slide s = validate_slide(doc);
    CHECK(s.rects[0].stroke.str() == "#000000");
    CHECK_FALSE(s.rects[0].fill.has_value());
    CHECK(s.lines[0].stroke_width == 1.0);
}

TEST_CASE("model geometry may be rounded to integer pixels") {
    json doc = empty_doc();
    json t = text_item();
    t["x"] = 10.4;
    t["w"] = 299.5;
    doc["texts"].push_back(t);
    const Slide s = validate_slide(doc, {.strict = true, .round_geometry = true});
    CHECK(s.texts[0].geometry.x == 10);
    CHECK(s.texts[0].geometry.w == 300);
    CHECK(validate_slide(doc).texts[0].geometry.x == doctest::Approx(10.4));
}

TEST_CASE("nested table cells are flattened row-major") {
    json doc = empty_doc();
    doc["tables"].push_back(
        json::parse(R"({"x":0,"y":0,"w":10,"h":10,"rows":2,"cols":3,"cells":[["a","b","c"],["d","e","f"]]})"));
    const Slide s = validate_slide(doc);
    CHECK(s.tables[0].cell(1, 0) == "d");
    CHECK(s.tables[0].cells.size() == 6);
}

TEST_CASE("roundtrip examples") {
    Slide empty;
    CHECK(roundtrip(empty) == empty);

    Slide one;
    TextElement t;
    t.geometry = {10, 20, 300, 40};
    t.content = "Quarterly review";
    t.font.name = "Calibri";
    t.font.size = 18.5;
    one.texts.push_back(t);
    CHECK(roundtrip(one) == one);
    CHECK(roundtrip(one).texts[0].font.size == 18.5);

    CounterRng rng(153);
    const Slide big = testing::random_slide(rng, 153);
    CHECK(complexity(big) == 153);
    CHECK(roundtrip(big) == big);
}

TEST_CASE("property: roundtrip is the identity on generated slides") {
    CounterRng rng(7);
    for (int i = 0; i < 300; ++i) {
        Slide s = testing::random_slide(rng, rng.index(40), "deck#" + std::to_string(i + 1));
        // fractional geometry and sizes survive the text format exactly
        for (auto& t : s.texts) {
            t.geometry.x += rng.uniform();
            t.font.size += rng.uniform();
        }
        const Slide back = roundtrip(s);
        REQUIRE(back == s);
        CHECK(serialize(back) == serialize(s));
    }
}

TEST_CASE("complexity") {
    Slide s;
    CHECK(complexity(s) == 0);
    s.texts.resize(3);
    s.images.resize(1);
    CHECK(complexity(s) == 4);

    Slide a, b;
    a.texts.resize(4);
    b.rects.resize(5);
    b.lines.resize(3);
    CHECK((complexity(a) + complexity(b)) / 2.0 == 6.0);
}

TEST_CASE("slide ids") { CHECK(make_slide_id("deckA", 1) == "deckA#1"); }
