#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "slideeval/ingest.hpp"
#include "slideeval/slide_io.hpp"
#include "slideeval/zip.hpp"

using namespace slideeval;

namespace {

const std::filesystem::path kData = SLIDEEVAL_TEST_DATA;

constexpr const char* kNs =
    R"( xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main")"
    R"( xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main")"
    R"( xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships")";

std::string rels(const std::vector<std::pair<std::string, std::string>>& items) {
    std::string out = R"(<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">)";
    int n = 1;
    for (const auto& [type, target] : items) {
        out += R"(<Relationship Id="rId)" + std::to_string(n++) +
               R"(" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/)" + type +
               R"(" Target=")" + target + R"("/>)";
    }
    return out + "</Relationships>";
}

std::string sp(const std::string& name, long x, long y, long cx, long cy, const std::string& inner) {
    return R"(<p:sp><p:nvSpPr><p:cNvPr id="2" name=")" + name + R"("/><p:cNvSpPr/><p:nvPr/></p:nvSpPr>)" +
           R"(<p:spPr><a:xfrm><a:off x=")" + std::to_string(x) + R"(" y=")" + std::to_string(y) +
           R"("/><a:ext cx=")" + std::to_string(cx) + R"(" cy=")" + std::to_string(cy) +
           R"("/></a:xfrm><a:prstGeom prst="rect"/></p:spPr>)" + inner + "</p:sp>";
}

std::string text_body(const std::string& text, const std::string& rpr = "") {
    return "<p:txBody><a:bodyPr/><a:p><a:r>" + rpr + "<a:t>" + text + "</a:t></a:r></a:p></p:txBody>";
}

struct DeckSpec {
    long cx = 12192000, cy = 6858000;
    std::vector<std::string> slide_trees;  // spTree inner XML per slide
    std::string minor_font = "Verdana";
    std::string major_font = "Georgia";
    std::string dk1 = "1F1F1F";
};

std::string build_deck(const DeckSpec& d) {
    std::vector<std::pair<std::string, std::string>> parts;
    parts.emplace_back("[Content_Types].xml", R"(<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"/>)");
    parts.emplace_back("_rels/.rels", rels({{"officeDocument", "ppt/presentation.xml"}}));

    std::string ids;
    std::vector<std::pair<std::string, std::string>> pres_rels;
    for (std::size_t i = 0; i < d.slide_trees.size(); ++i) {
        ids += R"(<p:sldId id=")" + std::to_string(256 + i) + R"(" r:id="rId)" + std::to_string(i + 1) + R"("/>)";
        pres_rels.emplace_back("slide", "slides/slide" + std::to_string(i + 1) + ".xml");
    }
    pres_rels.emplace_back("slideMaster", "slideMasters/slideMaster1.xml");
    parts.emplace_back("ppt/presentation.xml", std::string("<p:presentation") + kNs + "><p:sldIdLst>" + ids +
                                                   R"(</p:sldIdLst><p:sldSz cx=")" + std::to_string(d.cx) +
                                                   R"(" cy=")" + std::to_string(d.cy) + R"("/></p:presentation>)");
    parts.emplace_back("ppt/_rels/presentation.xml.rels", rels(pres_rels));
    for (std::size_t i = 0; i < d.slide_trees.size(); ++i) {
        const std::string n = std::to_string(i + 1);
        parts.emplace_back("ppt/slides/slide" + n + ".xml",
                           std::string("<p:sld") + kNs + "><p:cSld><p:spTree>" + d.slide_trees[i] +
                               "</p:spTree></p:cSld></p:sld>");
        parts.emplace_back("ppt/slides/_rels/slide" + n + ".xml.rels",
                           rels({{"slideLayout", "../slideLayouts/slideLayout1.xml"}}));
    }
    parts.emplace_back("ppt/slideLayouts/slideLayout1.xml",
                       std::string("<p:sldLayout") + kNs + "><p:cSld><p:spTree/></p:cSld></p:sldLayout>");
    parts.emplace_back("ppt/slideLayouts/_rels/slideLayout1.xml.rels",
                       rels({{"slideMaster", "../slideMasters/slideMaster1.xml"}}));
    parts.emplace_back("ppt/slideMasters/slideMaster1.xml",
                       std::string("<p:sldMaster") + kNs +
                           R"(><p:cSld><p:spTree/></p:cSld><p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2"/></p:sldMaster>)");
    parts.emplace_back("ppt/slideMasters/_rels/slideMaster1.xml.rels", rels({{"theme", "/ppt/theme/theme1.xml"}}));
    parts.emplace_back("ppt/theme/theme1.xml",
                       std::string("<a:theme") + kNs + R"(><a:themeElements><a:clrScheme name="t">)" +
                           R"(<a:dk1><a:srgbClr val=")" + d.dk1 + R"("/></a:dk1>)" +
                           R"(<a:lt1><a:sysClr val="window" lastClr="FFFFFF"/></a:lt1>)" +
                           R"(<a:accent1><a:srgbClr val="4472C4"/></a:accent1>)" +
                           R"(</a:clrScheme><a:fontScheme name="f"><a:majorFont><a:latin typeface=")" + d.major_font +
                           R"("/></a:majorFont><a:minorFont><a:latin typeface=")" + d.minor_font +
                           R"("/></a:minorFont></a:fontScheme></a:themeElements></a:theme>)");
    return write_stored_zip(parts);
}

}  // namespace

TEST_CASE("emu_to_px scales linearly") {
    CHECK(emu_to_px(0, 12192000, 960) == 0.0);
    CHECK(emu_to_px(12192000, 12192000, 960) == 960.0);
    CHECK(emu_to_px(6096000, 12192000, 960) == 480.0);
    CHECK(emu_to_px(6858000, 6858000, 540) == 540.0);
    CHECK_THROWS_AS(emu_to_px(1, 0, 960), ZeroExtent);
}

TEST_CASE("textbox geometry maps into the 960x540 frame") {
    DeckSpec d;
    d.slide_trees = {sp("TextBox 1", 6096000, 0, 3048000, 1714500, text_body("hello"))};
    const Deck deck = Deck::from_bytes(build_deck(d), "deck");
    CHECK(deck.emu_width() == 12192000);
    CHECK(deck.slide_count() == 1);
    const auto s = deck.extract_slide(1).slide;
    CHECK(s.slide_id == "deck#1");
    REQUIRE(s.texts.size() == 1);
    CHECK(s.texts[0].geometry == BoxGeometry{480, 0, 240, 135});
    CHECK(s.texts[0].content == "hello");
}

TEST_CASE("4:3 decks stretch to the 16:9 frame") {
    DeckSpec d;
    d.cx = 9144000;
    d.cy = 6858000;
    d.slide_trees = {sp("b", 4572000, 3429000, 4572000, 3429000, text_body("q"))};
    const auto s = Deck::from_bytes(build_deck(d), "d").extract_slide(1).slide;
    CHECK(s.texts[0].geometry == BoxGeometry{480, 270, 480, 270});
}

TEST_CASE("fonts fall back to the theme and colours to tx1") {
    DeckSpec d;
    d.slide_trees = {sp("a", 0, 0, 100, 100, text_body("body")) +
                     sp("b", 0, 0, 100, 100,
                        text_body("major", R"(<a:rPr sz="3150" i="1"><a:latin typeface="+mj-lt"/></a:rPr>)"))};
    const Deck deck = Deck::from_bytes(build_deck(d), "d");
    const auto theme = deck.theme_for(1);
    CHECK(theme.minor_font == "Verdana");
    CHECK(theme.scheme("tx1") == ColorHex::from_string("#1F1F1F"));
    CHECK(theme.scheme("bg1") == ColorHex::from_string("#FFFFFF"));
    CHECK(theme.chain.size() == 4);
    const auto s = deck.extract_slide(1).slide;
    REQUIRE(s.texts.size() == 2);
    CHECK(s.texts[0].font.name == "Verdana");
    CHECK(s.texts[0].font.size == 18.0);
    CHECK(s.texts[0].font.color.str() == "#1F1F1F");
    CHECK(s.texts[1].font.name == "Georgia");
    CHECK(s.texts[1].font.size == 31.5);
    CHECK(s.texts[1].font.italic);
}

TEST_CASE("scheme colour modifiers") {
    DeckSpec d;
    auto fill = [](const std::string& mods) {
        return R"(<p:sp><p:nvSpPr><p:cNvPr id="3" name="r"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr><p:spPr>)"
               R"(<a:xfrm><a:off x="0" y="0"/><a:ext cx="10" cy="10"/></a:xfrm><a:prstGeom prst="rect"/>)"
               R"(<a:solidFill><a:schemeClr val="accent1">)" +
               mods + "</a:schemeClr></a:solidFill></p:spPr></p:sp>";
    };
    d.slide_trees = {fill("") + fill(R"(<a:tint val="50000"/>)") + fill(R"(<a:shade val="50000"/>)") +
                     fill(R"(<a:lumMod val="75000"/>)")};
    const auto s = Deck::from_bytes(build_deck(d), "d").extract_slide(1).slide;
    REQUIRE(s.rects.size() == 4);
    CHECK(s.rects[0].fill->str() == "#4472C4");
    // 0x44=68: 255-(187*.5)=161.5 -> 162; 0x72=114 -> 184.5 -> 185 (half away from zero); 0xC4=196 -> 225.5 -> 226
    CHECK(s.rects[1].fill->str() == "#A2B9E2");
    CHECK(s.rects[2].fill->str() == "#223962");
    const Hls base = rgb_to_hls(Rgb{0x44, 0x72, 0xC4});
    CHECK(s.rects[3].fill->rgb() == hls_to_rgb(Hls{base.h, base.l * 0.75, base.s}));
}

TEST_CASE("tables keep rows, columns and cell text") {
    DeckSpec d;
    std::string rows;
    for (int r = 0; r < 2; ++r) {
        rows += "<a:tr h=\"100\">";
        for (int c = 0; c < 3; ++c) {
            rows += "<a:tc><a:txBody><a:bodyPr/><a:p><a:r><a:t>" + std::to_string(r) + std::to_string(c) +
                    "</a:t></a:r></a:p></a:txBody></a:tc>";
        }
        rows += "</a:tr>";
    }
    d.slide_trees = {
        R"(<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="4" name="T"/><p:cNvGraphicFramePr/><p:nvPr/></p:nvGraphicFramePr>)"
        R"(<p:xfrm><a:off x="0" y="0"/><a:ext cx="6096000" cy="3429000"/></p:xfrm><a:graphic>)"
        R"(<a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table"><a:tbl><a:tblGrid>)"
        R"(<a:gridCol w="1"/><a:gridCol w="1"/><a:gridCol w="1"/></a:tblGrid>)" +
        rows + "</a:tbl></a:graphicData></a:graphic></p:graphicFrame>"};
    const auto s = Deck::from_bytes(build_deck(d), "d").extract_slide(1).slide;
    REQUIRE(s.tables.size() == 1);
    CHECK(s.tables[0].rows == 2);
    CHECK(s.tables[0].cols == 3);
    CHECK(s.tables[0].cell(1, 2) == "12");
    CHECK(s.tables[0].geometry == BoxGeometry{0, 0, 480, 270});
}

TEST_CASE("charts flatten to rects unless strict") {
    DeckSpec d;
    d.slide_trees = {
        R"(<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="4" name="C"/><p:cNvGraphicFramePr/><p:nvPr/></p:nvGraphicFramePr>)"
        R"(<p:xfrm><a:off x="0" y="0"/><a:ext cx="1219200" cy="685800"/></p:xfrm><a:graphic>)"
        R"(<a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/chart"/></a:graphic></p:graphicFrame>)"};
    const Deck deck = Deck::from_bytes(build_deck(d), "d");
    const auto loose = deck.extract_slide(1);
    CHECK(loose.slide.rects.size() == 1);
    CHECK(loose.slide.rects[0].geometry == BoxGeometry{0, 0, 96, 54});
    CHECK(!loose.warnings.empty());
    const auto strict = deck.extract_slide(1, IngestOptions{.strict = true});
    CHECK(strict.slide.rects.empty());
}

TEST_CASE("hidden shapes are skipped") {
    DeckSpec d;
    std::string hidden = sp("h", 0, 0, 10, 10, text_body("secret"));
    hidden.replace(hidden.find(R"(name="h")"), 8, R"(name="h" hidden="1")");
    d.slide_trees = {hidden + sp("v", 0, 0, 10, 10, text_body("shown"))};
    const auto r = Deck::from_bytes(build_deck(d), "d").extract_slide(1);
    REQUIRE(r.slide.texts.size() == 1);
    CHECK(r.slide.texts[0].content == "shown");
}

TEST_CASE("error kinds") {
    CHECK_THROWS_AS(Deck::from_bytes("not a zip at all", "x"), NotAZip);
    CHECK_THROWS_AS(Deck::from_bytes(std::string("\xD0\xCF\x11\xE0\xA1\xB1\x1A\xE1", 8) + std::string(504, '\0'), "x"),
                    UnsupportedLegacyFormat);
    CHECK_THROWS_AS(Deck::from_bytes(write_stored_zip({{"a.txt", "hi"}}), "x"), MissingPresentationPart);
    DeckSpec empty;
    CHECK_THROWS_AS(Deck::from_bytes(build_deck(empty), "x"), MissingPresentationPart);
    DeckSpec zero;
    zero.cx = 0;
    zero.slide_trees = {""};
    CHECK_THROWS_AS(Deck::from_bytes(build_deck(zero), "x"), ZeroExtent);

    DeckSpec one;
    one.slide_trees = {""};
    const Deck deck = Deck::from_bytes(build_deck(one), "x");
    CHECK_THROWS_AS(deck.extract_slide(0), IndexOutOfRange);
    CHECK_THROWS_AS(deck.extract_slide(2), IndexOutOfRange);
    CHECK_NOTHROW(deck.extract_slide(1));
}

TEST_CASE("malformed slides are recorded and skipped") {
    DeckSpec d;
    d.slide_trees = {sp("a", 0, 0, 10, 10, text_body("fine")), "<broken", sp("c", 0, 0, 10, 10, text_body("ok"))};
    const auto dir = std::filesystem::temp_directory_path() / "slideeval_ingest_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "broken.pptx";
    std::ofstream(path, std::ios::binary) << build_deck(d);
    const auto r = ingest_deck(path);
    CHECK(r.slides.size() == 2);
    REQUIRE(r.manifest.slides.size() == 3);
    CHECK(r.manifest.slides[1].status == "malformed_xml");
    CHECK(r.manifest.slides[2].slide_id == "broken#3");
    CHECK(r.manifest.to_json()["slides"][0]["status"] == "ok");
    std::filesystem::remove_all(dir);
}

TEST_CASE("python-pptx fixture deck") {
    const auto r = ingest_deck(kData / "fixture.pptx");
    REQUIRE(r.slides.size() == 3);
    for (const auto& s : r.slides) CHECK_NOTHROW(validate_slide(to_json(s)));

    const Slide& title = r.slides[0];
    REQUIRE(title.texts.size() == 2);
    CHECK(title.texts[0].content == "Quarterly Review");
    CHECK(title.texts[0].font.name == "Calibri");
    CHECK(title.texts[0].font.size == 44.0);
    CHECK(title.texts[0].align == Alignment::center);
    CHECK(title.texts[1].content == "Q3 revenue 42.5");
    CHECK(title.texts[1].font.name == "Calibri");

    const Slide& s2 = r.slides[1];
    REQUIRE(s2.texts.size() == 2);
    CHECK(s2.texts[0].geometry == BoxGeometry{480, 0, 240, 135});
    CHECK(s2.texts[0].font.name == "Calibri");
    CHECK(s2.texts[1].font == FontSpec{"Georgia", 24.0, true, false, false, ColorHex::from_string("#C01020")});
    REQUIRE(s2.rects.size() == 1);
    CHECK(s2.rects[0].fill->str() == "#123456");
    CHECK(s2.rects[0].stroke_width == 0.0);
    REQUIRE(s2.lines.size() == 1);
    CHECK(s2.lines[0].x1 == 0.0);
    CHECK(s2.lines[0].y1 == 540.0);
    CHECK(s2.lines[0].x2 == 960.0);
    CHECK(s2.lines[0].y2 == 0.0);
    CHECK(s2.lines[0].stroke_width == 2.0);

    const Slide& s3 = r.slides[2];
    REQUIRE(s3.tables.size() == 1);
    CHECK(s3.tables[0].rows == 2);
    CHECK(s3.tables[0].cols == 3);
    CHECK(s3.tables[0].cell(0, 1) == "r0c1");
    CHECK(s3.tables[0].geometry == BoxGeometry{96, 54, 480, 135});
    REQUIRE(s3.images.size() == 1);
    CHECK(s3.images[0].source.starts_with("ppt/media/"));
    const Deck deck = Deck::open(kData / "fixture.pptx");
    const auto png = deck.read_part(s3.images[0].source);
    REQUIRE(png);
    CHECK(png->substr(1, 3) == "PNG");
}

TEST_CASE("extraction is deterministic") {
    const auto a = ingest_deck(kData / "fixture.pptx");
    const auto b = ingest_deck(kData / "fixture.pptx");
    CHECK(a.slides == b.slides);
    CHECK(a.manifest.to_json() == b.manifest.to_json());
}
