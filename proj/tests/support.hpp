#pragma once

#include <string>

#include "slideeval/rng.hpp"
#include "slideeval/slide.hpp"

namespace slideeval::testing {

inline ColorHex random_color(CounterRng& rng) {
    return ColorHex(Rgb{static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
                        static_cast<std::uint8_t>(rng.index(256))});
}

inline BoxGeometry random_box(CounterRng& rng) {
    const double w = 20 + std::floor(rng.uniform(0, 300));
    const double h = 10 + std::floor(rng.uniform(0, 200));
    return {std::floor(rng.uniform(0, kSlideWidth - w)), std::floor(rng.uniform(0, kSlideHeight - h)), w, h};
}

inline std::string random_words(CounterRng& rng, std::size_t max_words) {
    static const char* kWords[] = {"quarterly", "revenue", "growth", "Q3", "42.5", "team", "roadmap", "launch",
                                   "customer", "risk", "summary", "next", "steps", "2024", "market", "share"};
    std::string out;
    const std::size_t n = 1 + rng.index(max_words);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += kWords[rng.index(std::size(kWords))];
    }
    return out;
}

/// Synthetic slide with `n` elements drawn across all families.
inline Slide random_slide(CounterRng& rng, std::size_t n, std::string id = "synthetic#1") {
    static const char* kFonts[] = {"Calibri", "Arial", "Times New Roman", "Georgia", "Consolas", "Verdana"};
    Slide s;
    s.slide_id = std::move(id);
    s.background = rng.bernoulli(0.5) ? ColorHex(Rgb{255, 255, 255}) : random_color(rng);
    for (std::size_t i = 0; i < n; ++i) {
        switch (rng.index(5)) {
            case 0: {
                TextElement t;
                t.geometry = random_box(rng);
                t.content = random_words(rng, 6);
                t.font.name = kFonts[rng.index(std::size(kFonts))];
                t.font.size = 10 + static_cast<double>(rng.index(30));
                t.font.bold = rng.bernoulli(0.3);
                t.font.italic = rng.bernoulli(0.2);
                t.font.underline = rng.bernoulli(0.1);
                t.font.color = random_color(rng);
                t.align = static_cast<Alignment>(rng.index(5));
                s.texts.push_back(t);
                break;
            }
            case 1: {
                RectElement r;
                r.geometry = random_box(rng);
                r.rx = std::floor(rng.uniform(0, 12));
                if (rng.bernoulli(0.8)) r.fill = random_color(rng);
                r.stroke = random_color(rng);
                r.stroke_width = static_cast<double>(rng.index(4));
                s.rects.push_back(r);
                break;
            }
            case 2: {
                LineElement l;
                l.x1 = std::floor(rng.uniform(0, kSlideWidth));
                l.y1 = std::floor(rng.uniform(0, kSlideHeight));
                l.x2 = std::floor(rng.uniform(0, kSlideWidth));
                l.y2 = std::floor(rng.uniform(0, kSlideHeight));
                l.stroke = random_color(rng);
                l.stroke_width = 1 + static_cast<double>(rng.index(3));
                s.lines.push_back(l);
                break;
            }
            case 3: {
                ImageElement im;
                im.geometry = random_box(rng);
                im.source = "media/image" + std::to_string(i) + ".png";
                s.images.push_back(im);
                break;
            }
            default: {
                TableElement tb;
                tb.geometry = random_box(rng);
                tb.rows = 1 + static_cast<int>(rng.index(3));
                tb.cols = 1 + static_cast<int>(rng.index(3));
                for (int c = 0; c < tb.rows * tb.cols; ++c) tb.cells.push_back(random_words(rng, 2));
                s.tables.push_back(tb);
                break;
            }
        }
    }
    return s;
}

}  // namespace slideeval::testing
