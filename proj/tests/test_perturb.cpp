#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include "slideeval/fonts.hpp"
#include "slideeval/perturb.hpp"
#include "slideeval/slide_io.hpp"
#include "support.hpp"

using namespace slideeval;

namespace {

std::vector<Slide> seed_slides(std::size_t n) {
    CounterRng rng(2024);
    std::vector<Slide> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(testing::random_slide(rng, 3 + rng.index(10), "seed#" + std::to_string(i + 1)));
    }
    return out;
}

std::vector<std::string> regex_runs(const std::string& text) {
    static const std::regex re(R"(\d+(\.\d+)?)");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back(it->str());
    }
    return out;
}

bool box_inside(const BoxGeometry& b, const Slide& s) {
    return b.w >= 1.0 && b.h >= 1.0 && b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= s.width + 1e-9 &&
           b.y + b.h <= s.height + 1e-9;
}

}  // namespace

TEST_CASE("derive_seed golden values") {
    // Frozen from an independent Python implementation of FNV-1a + splitmix64.
    CHECK(derive_seed(42, "deckA#1", Axis::geometry, 0.5) == 1153562638662448846ULL);
    CHECK(derive_seed(0, "x", Axis::text, 0.0) == 14621475410547204299ULL);
    CHECK(derive_seed(7, "deck#3", Axis::style, 1.0) == 6219094483028401665ULL);
}

TEST_CASE("derive_seed separates its inputs") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {0ULL, 1ULL}) {
        for (const char* id : {"a#1", "a#2"}) {
            for (Axis a : kAllAxes) {
                for (double s : {0.1, 0.2}) seen.insert(derive_seed(base, id, a, s));
            }
        }
    }
    CHECK(seen.size() == 24);
}

TEST_CASE("property: severity zero is a no-op on every axis") {
    for (const Slide& slide : seed_slides(50)) {
        for (Axis a : kAllAxes) {
            auto p = perturb(slide, a, 0.0);
            CHECK(p.slide == slide);
            CHECK(p.record.events.empty());
        }
    }
}

TEST_CASE("property: identical inputs give byte-identical output") {
    PerturbationConfig cfg;
    cfg.base_seed = 99;
    for (const Slide& slide : seed_slides(20)) {
        for (Axis a : kAllAxes) {
            for (double s : {0.3, 1.0}) {
                auto x = perturb(slide, a, s, cfg);
                auto y = perturb(slide, a, s, cfg);
                CHECK(serialize(x.slide) == serialize(y.slide));
                CHECK(to_json(x.record).dump() == to_json(y.record).dump());
            }
        }
    }
}

TEST_CASE("property: replay from a serialized record reproduces the variant") {
    for (const Slide& slide : seed_slides(25)) {
        for (Axis a : kAllAxes) {
            for (double s : {0.2, 0.7, 1.0}) {
                auto p = perturb(slide, a, s);
                auto record = record_from_json(nlohmann::json::parse(to_json(p.record).dump()));
                CHECK(record == p.record);
                CHECK(replay(slide, record) == p.slide);
            }
        }
    }
}

TEST_CASE("property: variants stay schema-valid") {
    for (const Slide& slide : seed_slides(40)) {
        for (Axis a : kAllAxes) {
            for (double s : default_severity_grid()) {
                auto p = perturb(slide, a, s);
                CHECK_NOTHROW(parse_slide(serialize(p.slide)));
                for (const auto& t : p.slide.texts) {
                    CHECK(t.font.size >= 6.0 - 1e-9);
                    CHECK(t.font.size <= 120.0 + 1e-9);
                }
                if (a == Axis::geometry) {
                    for (const auto& t : p.slide.texts) CHECK(box_inside(t.geometry, p.slide));
                    for (const auto& r : p.slide.rects) CHECK(box_inside(r.geometry, p.slide));
                    for (const auto& im : p.slide.images) CHECK(box_inside(im.geometry, p.slide));
                    for (const auto& tb : p.slide.tables) CHECK(box_inside(tb.geometry, p.slide));
                    CHECK(p.slide.lines == slide.lines);
                }
                if (a == Axis::text) {
                    for (const auto& t : p.slide.texts) CHECK(box_inside(t.geometry, p.slide));
                }
            }
        }
    }
}

TEST_CASE("allow_clipping keeps the positive-size floor only") {
    PerturbationConfig cfg;
    cfg.allow_clipping = true;
    bool escaped = false;
    for (const Slide& slide : seed_slides(30)) {
        auto p = perturb(slide, Axis::geometry, 1.0, cfg);
        for (const auto& r : p.slide.rects) {
            CHECK(r.geometry.w >= 1.0);
            CHECK(r.geometry.h >= 1.0);
            escaped |= !box_inside(r.geometry, p.slide);
        }
    }
    CHECK(escaped);
}

TEST_CASE("property: schedules are non-decreasing on the severity grid") {
    const auto grid = default_severity_grid();
    REQUIRE(grid.size() == 11);
    for (const auto& e : schedule::all()) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            INFO(e.name << " at s=" << grid[i]);
            CHECK(e.fn(grid[i]) >= e.fn(grid[i - 1]));
        }
    }
    for (int m = 1; m <= 5; ++m) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            CHECK(schedule::max_insert_count(grid[i], m) >= schedule::max_insert_count(grid[i - 1], m));
        }
    }
}

TEST_CASE("schedule endpoints") {
    CHECK(schedule::p_char(0.0) == doctest::Approx(0.02));
    CHECK(schedule::p_char(1.0) == doctest::Approx(0.25));
    CHECK(schedule::sigma_translate(1.0) == doctest::Approx(0.20));
    CHECK(schedule::sigma_log_scale(1.0) == doctest::Approx(0.67));
    CHECK(schedule::insert_font_size(1.0) == doctest::Approx(28.0));
    CHECK(schedule::alpha_low_contrast(1.0) == doctest::Approx(0.90));
    CHECK(schedule::max_insert_count(0.0, 3) == 1);
    CHECK(schedule::max_insert_count(0.34, 3) == 2);
    CHECK(schedule::max_insert_count(1.0, 3) == 3);
    CHECK(schedule::max_insert_count(1.0, 10) == 4);
}

TEST_CASE("apply_edits") {
    using Op = TextEdit::Op;
    CHECK(apply_edits("abc", {}) == "abc");
    std::vector<TextEdit> e{{0, Op::swap, 0}, {2, Op::insert, U'x'}};
    CHECK(apply_edits("abcd", e) == "bacxd");
    e = {{1, Op::remove, 0}, {3, Op::substitute, U'é'}};
    CHECK(apply_edits("abcd", e) == "acé");
    e = {{1, Op::substitute, U'z'}};
    CHECK(apply_edits("né!", e) == "nz!");
}

TEST_CASE("numeric runs agree with the regex") {
    CounterRng rng(5);
    const std::string alphabet = "0123456789..ab -";
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const std::size_t n = rng.index(20);
        for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.index(alphabet.size())];
        CHECK(numeric_runs(s) == regex_runs(s));
    }
}

TEST_CASE("restore_numbers") {
    CHECK(restore_numbers("Q3 revenue 42.5", "Q8 rvenue 42.7") == "Q3 rvenue 42.5");
    CHECK(restore_numbers("Q3 revenue 42.5", "Qe revenue 4x.5") == "Qe revenue 3x.42.5");
    CHECK(restore_numbers("Q3 revenue 42.5", "Q revenue") == "Q revenue 3 42.5");
    CHECK(restore_numbers("total 100", "tota 10 0") == "tota 100 0");
    CHECK(restore_numbers("no digits", "no digts") == "no digts");
}

TEST_CASE("property: preserve_numbers keeps every numeric run") {
    Slide slide;
    slide.slide_id = "num#1";
    TextElement t;
    t.geometry = {100, 100, 300, 50};
    t.content = "Q3 revenue 42.5";
    t.font.name = "Arial";
    slide.texts.push_back(t);
    PerturbationConfig cfg;
    int noised = 0;
    for (double s : {0.5, 1.0}) {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            cfg.base_seed = seed;
            auto p = perturb(slide, Axis::text, s, cfg);
            const bool dropped = std::any_of(p.record.events.begin(), p.record.events.end(),
                                             [](const PerturbationEvent& e) { return e.op == "drop"; });
            if (dropped) continue;
            const std::string& out = p.slide.texts.front().content;
            noised += out != t.content;
            const auto runs = numeric_runs(out);
            auto three = std::find(runs.begin(), runs.end(), "3");
            REQUIRE(three != runs.end());
            CHECK(std::find(three + 1, runs.end(), "42.5") != runs.end());
        }
    }
    CHECK(noised > 50);
}

TEST_CASE("property: inserted text boxes respect the schedule bounds") {
    std::size_t inserts = 0;
    for (const Slide& slide : seed_slides(60)) {
        for (double s : {0.3, 0.6, 1.0}) {
            auto p = perturb(slide, Axis::text, s);
            std::size_t n = 0;
            for (const auto& e : p.record.events) {
                if (e.op != "insert") continue;
                ++n;
                CHECK(e.params.at("w") >= 0.15 * slide.width);
                CHECK(e.params.at("w") <= schedule::insert_w_hi(s) * slide.width);
                CHECK(e.params.at("h") >= 0.08 * slide.height);
                CHECK(e.params.at("h") <= schedule::insert_h_hi(s) * slide.height);
                CHECK(e.params.at("size") == doctest::Approx(14.0 * (1.0 + s)));
            }
            CHECK(n <= static_cast<std::size_t>(schedule::max_insert_count(s, 3)));
            inserts += n;
        }
    }
    CHECK(inserts > 0);
}

TEST_CASE("style family switches never pick the current family") {
    for (const Slide& slide : seed_slides(40)) {
        auto p = perturb(slide, Axis::style, 1.0);
        for (const auto& e : p.record.events) {
            if (e.op == "family") CHECK(canonical_font(e.value) != canonical_font(slide.texts.at(e.index).font.name));
        }
    }
}

TEST_CASE("keyboard neighbors are symmetric") {
    for (char32_t c = U'a'; c <= U'z'; ++c) {
        for (char32_t n : keyboard_neighbors(c)) {
            auto back = keyboard_neighbors(n);
            CHECK(back.find(c) != std::u32string_view::npos);
        }
    }
    CHECK(keyboard_neighbors(U'!').empty());
}

TEST_CASE("suite cardinality and manifest") {
    const auto seeds = seed_slides(4);
    const auto grid = default_severity_grid();
    auto m = synthesize_suite(seeds, grid, kAllAxes, {}, {});
    CHECK(m.rows.size() == 4 * 3 * 11);
    CHECK(m.failures == 0);

    const double zero[] = {0.0};
    const Axis geo[] = {Axis::geometry};
    auto one = synthesize_suite(std::span(seeds).first(1), zero, geo, {}, {});
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].variant_id == "seed#1|geometry|0.000");

    SuiteOptions capped;
    capped.cap_per_cell = 2;
    auto c = synthesize_suite(seeds, grid, kAllAxes, {}, capped);
    CHECK(c.rows.size() == 2 * 3 * 11);
}

TEST_CASE("suite writes files deterministically across worker counts") {
    const auto seeds = seed_slides(3);
    const double sev[] = {0.0, 0.5, 1.0};
    const auto root = std::filesystem::temp_directory_path() / "slideeval_suite_test";
    std::filesystem::remove_all(root);
    SuiteOptions a{root / "a", std::nullopt, 1, {}};
    SuiteOptions b{root / "b", std::nullopt, 4, {}};
    auto ma = synthesize_suite(seeds, sev, kAllAxes, {}, a);
    auto mb = synthesize_suite(seeds, sev, kAllAxes, {}, b);
    CHECK(ma.to_tsv() == mb.to_tsv());
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), {});
    };
    for (const auto& row : ma.rows) {
        CHECK(slurp(root / "a" / row.slide_path) == slurp(root / "b" / row.slide_path));
        CHECK(slurp(root / "a" / row.record_path) == slurp(root / "b" / row.record_path));
    }
    auto back = PerturbationManifest::from_tsv(slurp(root / "a" / "manifest.tsv"));
    CHECK(back.to_tsv() == ma.to_tsv());
    std::filesystem::remove_all(root);
}

TEST_CASE("config validation") {
    PerturbationConfig cfg;
    cfg.pi_geo = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.palette = {"red"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(perturb(Slide{}, Axis::text, 1.5), std::invalid_argument);
}
