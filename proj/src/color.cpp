#include "slideeval/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slideeval {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

constexpr char kHexDigits[] = "0123456789ABCDEF";

double srgb_to_linear(std::uint8_t v) {
    const double c = v / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    if (t > delta * delta * delta) return std::cbrt(t);
    return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double rad(double deg) { return deg * std::numbers::pi / 180.0; }

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

ColorHex::ColorHex(Rgb rgb) {
    value_ = "#";
    for (std::uint8_t v : {rgb.r, rgb.g, rgb.b}) {
        value_ += kHexDigits[v >> 4];
        value_ += kHexDigits[v & 0xF];
    }
}

std::optional<ColorHex> ColorHex::parse(std::string_view text) {
    if (text.size() != 7 || text[0] != '#') return std::nullopt;
    ColorHex out;
    out.value_ = "#";
    for (std::size_t i = 1; i < 7; ++i) {
        const int v = hex_value(text[i]);
        if (v < 0) return std::nullopt;
        out.value_ += kHexDigits[v];
    }
    return out;
}

ColorHex ColorHex::from_string(std::string_view text) {
    auto c = parse(text);
    if (!c) throw std::invalid_argument("not a #RRGGBB color: " + std::string(text));
    return *c;
}

Rgb ColorHex::rgb() const {
    auto byte = [&](std::size_t i) {
        return static_cast<std::uint8_t>(hex_value(value_[i]) * 16 + hex_value(value_[i + 1]));
    };
    return {byte(1), byte(3), byte(5)};
}

bool is_canonical_hex(std::string_view text) {
    if (text.size() != 7 || text[0] != '#') return false;
    return std::all_of(text.begin() + 1, text.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F');
    });
}

namespace {

struct Xyz {
    double x, y, z;
};

Xyz linear_to_xyz(double r, double g, double b) {
    return {0.4124564 * r + 0.3575761 * g + 0.1804375 * b, 0.2126729 * r + 0.7151522 * g + 0.0721750 * b,
            0.0193339 * r + 0.1191920 * g + 0.9503041 * b};
}

}  // namespace

Lab srgb_to_lab(Rgb c) {
    // D65 white is the image of linear (1, 1, 1), so #FFFFFF lands on exactly (100, 0, 0).
    static const Xyz white = linear_to_xyz(1.0, 1.0, 1.0);
    const Xyz v = linear_to_xyz(srgb_to_linear(c.r), srgb_to_linear(c.g), srgb_to_linear(c.b));
    const double fx = lab_f(v.x / white.x), fy = lab_f(v.y / white.y), fz = lab_f(v.z / white.z);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double delta_e2000(const Lab& x, const Lab& y) {
    const double c1 = std::hypot(x.a, x.b);
    const double c2 = std::hypot(y.a, y.b);
    const double c_bar = 0.5 * (c1 + c2);
    const double c_bar7 = std::pow(c_bar, 7.0);
    const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + std::pow(25.0, 7.0))));

    const double a1p = (1.0 + g) * x.a;
    const double a2p = (1.0 + g) * y.a;
    const double c1p = std::hypot(a1p, x.b);
    const double c2p = std::hypot(a2p, y.b);

    auto hue = [](double b, double ap) {
        if (b == 0.0 && ap == 0.0) return 0.0;
        double h = deg(std::atan2(b, ap));
        return h < 0.0 ? h + 360.0 : h;
    };
    const double h1p = hue(x.b, a1p);
    const double h2p = hue(y.b, a2p);

    const double dlp = y.l - x.l;
    const double dcp = c2p - c1p;

    double dhp = 0.0;
    if (c1p * c2p != 0.0) {
        dhp = h2p - h1p;
        if (dhp > 180.0) dhp -= 360.0;
        else if (dhp < -180.0) dhp += 360.0;
    }
    const double dHp = 2.0 * std::sqrt(c1p * c2p) * std::sin(rad(dhp / 2.0));

    const double lbp = 0.5 * (x.l + y.l);
    const double cbp = 0.5 * (c1p + c2p);

    double hbp = h1p + h2p;
    if (c1p * c2p != 0.0) {
        if (std::abs(h1p - h2p) <= 180.0) hbp *= 0.5;
        else if (h1p + h2p < 360.0) hbp = 0.5 * (hbp + 360.0);
        else hbp = 0.5 * (hbp - 360.0);
    }

    const double t = 1.0 - 0.17 * std::cos(rad(hbp - 30.0)) + 0.24 * std::cos(rad(2.0 * hbp)) +
                     0.32 * std::cos(rad(3.0 * hbp + 6.0)) - 0.20 * std::cos(rad(4.0 * hbp - 63.0));
    const double dtheta = 30.0 * std::exp(-std::pow((hbp - 275.0) / 25.0, 2.0));
    const double cbp7 = std::pow(cbp, 7.0);
    const double rc = 2.0 * std::sqrt(cbp7 / (cbp7 + std::pow(25.0, 7.0)));
    const double lb50 = (lbp - 50.0) * (lbp - 50.0);
    const double sl = 1.0 + 0.015 * lb50 / std::sqrt(20.0 + lb50);
    const double sc = 1.0 + 0.045 * cbp;
    const double sh = 1.0 + 0.015 * cbp * t;
    const double rt = -std::sin(rad(2.0 * dtheta)) * rc;

    const double tl = dlp / sl;
    const double tc = dcp / sc;
    const double th = dHp / sh;
    return std::sqrt(tl * tl + tc * tc + th * th + rt * tc * th);
}

double delta_e2000(const ColorHex& x, const ColorHex& y) {
    if (x == y) return 0.0;
    return delta_e2000(srgb_to_lab(x.rgb()), srgb_to_lab(y.rgb()));
}

double relative_luminance(Rgb c) {
    return 0.2126 * srgb_to_linear(c.r) + 0.7152 * srgb_to_linear(c.g) + 0.0722 * srgb_to_linear(c.b);
}

double contrast_ratio(Rgb fg, Rgb bg) {
    const double l1 = relative_luminance(fg);
    const double l2 = relative_luminance(bg);
    return (std::max(l1, l2) + 0.05) / (std::min(l1, l2) + 0.05);
}

// Same construction as Python's colorsys, hue in degrees.
Hls rgb_to_hls(Rgb c) {
    const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    const double maxc = std::max({r, g, b});
    const double minc = std::min({r, g, b});
    const double l = 0.5 * (minc + maxc);
    if (maxc == minc) return {0.0, l, 0.0};
    const double span = maxc - minc;
    const double s = l <= 0.5 ? span / (maxc + minc) : span / (2.0 - maxc - minc);
    const double rc = (maxc - r) / span, gc = (maxc - g) / span, bc = (maxc - b) / span;
    double h;
    if (r == maxc) h = bc - gc;
    else if (g == maxc) h = 2.0 + rc - bc;
    else h = 4.0 + gc - rc;
    h = std::fmod(h / 6.0, 1.0);
    if (h < 0.0) h += 1.0;
    return {h * 360.0, l, s};
}

namespace {
double hls_channel(double m1, double m2, double hue) {
    hue = std::fmod(hue, 1.0);
    if (hue < 0.0) hue += 1.0;
    if (hue < 1.0 / 6.0) return m1 + (m2 - m1) * hue * 6.0;
    if (hue < 0.5) return m2;
    if (hue < 2.0 / 3.0) return m1 + (m2 - m1) * (2.0 / 3.0 - hue) * 6.0;
    return m1;
}
}  // namespace

Rgb hls_to_rgb(const Hls& c) {
    const double h = c.h / 360.0;
    const double l = std::clamp(c.l, 0.0, 1.0);
    const double s = std::clamp(c.s, 0.0, 1.0);
    if (s == 0.0) return {to_byte(l * 255.0), to_byte(l * 255.0), to_byte(l * 255.0)};
    const double m2 = l <= 0.5 ? l * (1.0 + s) : l + s - l * s;
    const double m1 = 2.0 * l - m2;
    return {to_byte(hls_channel(m1, m2, h + 1.0 / 3.0) * 255.0), to_byte(hls_channel(m1, m2, h) * 255.0),
            to_byte(hls_channel(m1, m2, h - 1.0 / 3.0) * 255.0)};
}

Rgb blend(Rgb c, Rgb target, double alpha) {
    auto mix = [alpha](std::uint8_t a, std::uint8_t b) { return to_byte((1.0 - alpha) * a + alpha * b); };
    return {mix(c.r, target.r), mix(c.g, target.g), mix(c.b, target.b)};
}

}  // namespace slideeval
