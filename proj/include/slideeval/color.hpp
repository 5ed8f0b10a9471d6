#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace slideeval {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// A color in normalized "#RRGGBB" form. Hex digits are always stored
/// uppercase, so two equal colors always compare equal as strings.
class ColorHex {
public:
    ColorHex() = default;  // "#000000"
    explicit ColorHex(Rgb rgb);

    /// Accepts "#rrggbb" in either case. Returns nullopt on anything else.
    static std::optional<ColorHex> parse(std::string_view text);
    /// Like parse() but throws std::invalid_argument.
    static ColorHex from_string(std::string_view text);

    const std::string& str() const { return value_; }
    Rgb rgb() const;

    friend bool operator==(const ColorHex&, const ColorHex&) = default;

private:
    std::string value_ = "#000000";
};

bool is_canonical_hex(std::string_view text);

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// sRGB (D65) -> linear RGB -> XYZ -> CIE L*a*b*.
Lab srgb_to_lab(Rgb c);

/// CIEDE2000 colour difference with k_L = k_C = k_H = 1.
double delta_e2000(const Lab& x, const Lab& y);
double delta_e2000(const ColorHex& x, const ColorHex& y);

/// WCAG 2.x relative luminance in [0, 1].
double relative_luminance(Rgb c);
/// WCAG contrast ratio in [1, 21].
double contrast_ratio(Rgb fg, Rgb bg);

struct Hls {
    double h = 0.0;  // degrees in [0, 360)
    double l = 0.0;  // [0, 1]
    double s = 0.0;  // [0, 1]
};

Hls rgb_to_hls(Rgb c);
Rgb hls_to_rgb(const Hls& c);

/// c' = (1 - alpha) c + alpha target, per channel in sRGB, rounded to nearest.
Rgb blend(Rgb c, Rgb target, double alpha);

}  // namespace slideeval
