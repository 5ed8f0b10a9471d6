#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ciede2000_data.hpp"
#include "slideeval/rng.hpp"

using namespace slideeval;

TEST_CASE("CIEDE2000 verification pairs") {
    int i = 1;
    for (const auto& p : testing::kCiede2000Pairs) {
        CAPTURE(i);
        CHECK(std::abs(delta_e2000(p.a, p.b) - p.de) < 1e-4);
        CHECK(std::abs(delta_e2000(p.b, p.a) - p.de) < 1e-4);
        ++i;
    }
}

TEST_CASE("black versus white") {
    const double de = delta_e2000(ColorHex::from_string("#000000"), ColorHex::from_string("#FFFFFF"));
    CHECK(std::abs(de - 100.0) < 1e-9);
    const Lab white = srgb_to_lab({255, 255, 255});
    CHECK(white.l == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(std::abs(white.a) < 1e-9);
    CHECK(std::abs(white.b) < 1e-9);
}

TEST_CASE("property: delta E is symmetric, non-negative, zero on identity") {
    CounterRng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const Rgb a{static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
                    static_cast<std::uint8_t>(rng.index(256))};
        const Rgb b{static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
                    static_cast<std::uint8_t>(rng.index(256))};
        const double ab = delta_e2000(ColorHex(a), ColorHex(b));
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(delta_e2000(ColorHex(b), ColorHex(a))).epsilon(1e-12));
        CHECK(delta_e2000(ColorHex(a), ColorHex(a)) == 0.0);
    }
}

TEST_CASE("hex parsing") {
    CHECK(ColorHex::parse("#abcdef")->str() == "#ABCDEF");
    CHECK_FALSE(ColorHex::parse("abcdef"));
    CHECK_FALSE(ColorHex::parse("#abcde"));
    CHECK_FALSE(ColorHex::parse("#GGGGGG"));
    CHECK(ColorHex::from_string("#102030").rgb() == Rgb{16, 32, 48});
    CHECK_THROWS_AS(ColorHex::from_string("red"), std::invalid_argument);
    CHECK(ColorHex().str() == "#000000");
}

TEST_CASE("WCAG contrast") {
    CHECK(contrast_ratio({0, 0, 0}, {255, 255, 255}) == doctest::Approx(21.0));
    CHECK(contrast_ratio({255, 255, 255}, {0, 0, 0}) == doctest::Approx(21.0));
    CHECK(contrast_ratio({119, 119, 119}, {119, 119, 119}) == doctest::Approx(1.0));
    // #777777 on white: luminance 0.18447, ratio 1.05 / 0.23447
    CHECK(contrast_ratio({119, 119, 119}, {255, 255, 255}) == doctest::Approx(4.478).epsilon(1e-3));
}

TEST_CASE("HLS matches the colorsys convention") {
    struct Case {
        Rgb rgb;
        double h, l, s;
    };
    // values from Python's colorsys.rgb_to_hls, hue scaled to degrees
    const Case cases[] = {
        {{255, 0, 0}, 0.0, 0.5, 1.0},
        {{12, 200, 99}, 147.765957447, 0.41568627451, 0.88679245283},
        {{128, 128, 128}, 0.0, 0.501960784314, 0.0},
        {{30, 60, 200}, 229.411764706, 0.450980392157, 0.739130434783},
    };
    for (const auto& c : cases) {
        const Hls h = rgb_to_hls(c.rgb);
        CHECK(h.h == doctest::Approx(c.h).epsilon(1e-9));
        CHECK(h.l == doctest::Approx(c.l).epsilon(1e-9));
        CHECK(h.s == doctest::Approx(c.s).epsilon(1e-9));
        CHECK(hls_to_rgb(h) == c.rgb);
    }
}

TEST_CASE("property: HLS roundtrip over random colors") {
    CounterRng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const Rgb c{static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
                    static_cast<std::uint8_t>(rng.index(256))};
        CHECK(hls_to_rgb(rgb_to_hls(c)) == c);
    }
}

TEST_CASE("blend toward background") {
    CHECK(blend({0, 0, 0}, {255, 255, 255}, 0.0) == Rgb{0, 0, 0});
    CHECK(blend({0, 0, 0}, {255, 255, 255}, 1.0) == Rgb{255, 255, 255});
    // alpha 0.9: 0.1 * 100 + 0.9 * 200 = 190
    CHECK(blend({100, 0, 50}, {200, 100, 50}, 0.9) == Rgb{190, 90, 50});
}
