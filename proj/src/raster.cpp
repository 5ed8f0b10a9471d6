#include "raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slideeval::raster {

void Path::add_edge(Point a, Point b) {
    if (a.y == b.y) return;
    if (a.y < b.y) edges_.push_back({a.x, a.y, b.x, b.y, 1});
    else edges_.push_back({b.x, b.y, a.x, a.y, -1});
}

void Path::move_to(Point p) {
    close();
    start_ = cur_ = p;
    open_ = true;
}

void Path::line_to(Point p) {
    add_edge(cur_, p);
    cur_ = p;
}

void Path::quad_to(Point c, Point e) {
    const double len = std::hypot(c.x - cur_.x, c.y - cur_.y) + std::hypot(e.x - c.x, e.y - c.y);
    const int steps = std::clamp(static_cast<int>(std::ceil(len / 3.0)), 1, 16);
    const Point s = cur_;
    for (int i = 1; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps, u = 1.0 - t;
        line_to({u * u * s.x + 2 * u * t * c.x + t * t * e.x, u * u * s.y + 2 * u * t * c.y + t * t * e.y});
    }
}

void Path::close() {
    if (open_) add_edge(cur_, start_);
    cur_ = start_;
    open_ = false;
}

void Path::polygon(const std::vector<Point>& pts) {
    if (pts.size() < 3) return;
    move_to(pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) line_to(pts[i]);
    close();
}

void Path::rect(double x, double y, double w, double h, bool clockwise) {
    if (clockwise) polygon({{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}});
    else polygon({{x, y}, {x, y + h}, {x + w, y + h}, {x + w, y}});
}

void Path::rounded_rect(double x, double y, double w, double h, double r, bool clockwise) {
    r = std::min({r, w / 2, h / 2});
    if (r <= 0.0) {
        rect(x, y, w, h, clockwise);
        return;
    }
    constexpr int kArc = 8;
    std::vector<Point> pts;
    const Point centres[4] = {{x + w - r, y + r}, {x + w - r, y + h - r}, {x + r, y + h - r}, {x + r, y + r}};
    for (int c = 0; c < 4; ++c) {
        const double a0 = -std::numbers::pi / 2 + c * std::numbers::pi / 2;
        for (int i = 0; i <= kArc; ++i) {
            const double a = a0 + (std::numbers::pi / 2) * i / kArc;
            pts.push_back({centres[c].x + r * std::cos(a), centres[c].y + r * std::sin(a)});
        }
    }
    if (!clockwise) std::reverse(pts.begin(), pts.end());
    polygon(pts);
}

void fill(RasterImage& img, const Path& path, Rgb color, bool antialias) {
    if (path.empty() || img.width <= 0 || img.height <= 0) return;
    const int S = antialias ? 4 : 1;
    auto edges = path.edges();
    std::sort(edges.begin(), edges.end(), [](const Path::Edge& a, const Path::Edge& b) { return a.y0 < b.y0; });
    double ymin = edges.front().y0, ymax = ymin;
    for (const auto& e : edges) ymax = std::max(ymax, e.y1);
    const int row0 = std::max(0, static_cast<int>(std::floor(ymin)));
    const int row1 = std::min(img.height - 1, static_cast<int>(std::ceil(ymax)));

    const long samples_w = static_cast<long>(img.width) * S;
    std::vector<int> cover(static_cast<std::size_t>(img.width));
    std::vector<std::pair<double, int>> xs;
    std::vector<const Path::Edge*> active;
    std::size_t next = 0;
    for (int row = row0; row <= row1; ++row) {
        std::fill(cover.begin(), cover.end(), 0);
        int lo = img.width, hi = -1;
        for (int k = 0; k < S; ++k) {
            const double sy = row + (k + 0.5) / S;
            while (next < edges.size() && edges[next].y0 <= sy) active.push_back(&edges[next++]);
            std::erase_if(active, [&](const Path::Edge* e) { return e->y1 <= sy; });
            xs.clear();
            for (const Path::Edge* e : active) {
                if (e->y0 > sy) continue;
                xs.emplace_back(e->x0 + (sy - e->y0) * (e->x1 - e->x0) / (e->y1 - e->y0), e->dir);
            }
            std::sort(xs.begin(), xs.end());
            int winding = 0;
            double span_start = 0.0;
            for (const auto& [x, dir] : xs) {
                const int before = winding;
                winding += dir;
                if (before == 0 && winding != 0) {
                    span_start = x;
                } else if (before != 0 && winding == 0) {
                    long q0 = static_cast<long>(std::ceil(span_start * S - 0.5));
                    long q1 = static_cast<long>(std::ceil(x * S - 0.5));
                    q0 = std::max(q0, 0L);
                    q1 = std::min(q1, samples_w);
                    for (long q = q0; q < q1; ++q) ++cover[static_cast<std::size_t>(q / S)];
                    if (q0 < q1) {
                        lo = std::min(lo, static_cast<int>(q0 / S));
                        hi = std::max(hi, static_cast<int>((q1 - 1) / S));
                    }
                }
            }
        }
        const int full = S * S;
        for (int px = lo; px <= hi; ++px) {
            const int c = cover[static_cast<std::size_t>(px)];
            if (c == 0) continue;
            if (c >= full) {
                img.set(px, row, color);
            } else {
                const double a = static_cast<double>(c) / full;
                img.set(px, row, blend(img.at(px, row), color, a));
            }
        }
    }
}

void stroke_pixels(RasterImage& img, int x0, int y0, int x1, int y1, int width, Rgb color) {
    width = std::max(1, width);
    const int lo = -(width - 1) / 2, hi = width / 2;
    auto stamp = [&](int x, int y) {
        for (int dy = lo; dy <= hi; ++dy) {
            for (int dx = lo; dx <= hi; ++dx) {
                const int px = x + dx, py = y + dy;
                if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.set(px, py, color);
            }
        }
    };
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        stamp(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

}  // namespace slideeval::raster
