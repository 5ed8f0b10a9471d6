#pragma once

#include <vector>

#include "slideeval/renderer.hpp"

namespace slideeval::raster {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Polygonal path in output pixels; curves are flattened on insertion.
class Path {
public:
    void move_to(Point p);
    void line_to(Point p);
    void quad_to(Point ctrl, Point end);
    void close();
    void rect(double x, double y, double w, double h, bool clockwise = true);
    void rounded_rect(double x, double y, double w, double h, double r, bool clockwise = true);
    void polygon(const std::vector<Point>& pts);

    struct Edge {
        double x0, y0, x1, y1;
        int dir;
    };
    const std::vector<Edge>& edges() const { return edges_; }
    bool empty() const { return edges_.empty(); }

private:
    void add_edge(Point a, Point b);
    std::vector<Edge> edges_;
    Point start_{}, cur_{};
    bool open_ = false;
};

/// Nonzero-winding fill. Samples per pixel: 4x4 when antialiased, else the
/// pixel centre only.
void fill(RasterImage& img, const Path& path, Rgb color, bool antialias);

/// Bresenham segment stamped with a square brush of `width` pixels.
void stroke_pixels(RasterImage& img, int x0, int y0, int x1, int y1, int width, Rgb color);

}  // namespace slideeval::raster
