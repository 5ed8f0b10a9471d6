#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "slideeval/assignment.hpp"
#include "slideeval/matcher.hpp"
#include "support.hpp"

using namespace slideeval;

namespace {

// Counts unit cells covered by both boxes on the integer grid.
double pixel_iou(const BoxGeometry& a, const BoxGeometry& b) {
    long inter = 0, ua = 0, ub = 0;
    for (int x = 0; x < 400; ++x) {
        for (int y = 0; y < 300; ++y) {
            const bool in_a = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
            const bool in_b = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
            inter += in_a && in_b;
            ua += in_a;
            ub += in_b;
        }
    }
    return ua + ub - inter == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(ua + ub - inter);
}

double brute_force_min(const std::vector<double>& c, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += c[i * n + perm[i]];
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Element box_image(double x, double y, double w = 100, double h = 100) {
    ImageElement im;
    im.geometry = {x, y, w, h};
    return im;
}

Element text(double x, double y, std::string content) {
    TextElement t;
    t.geometry = {x, y, 100, 40};
    t.content = std::move(content);
    return t;
}

}  // namespace

TEST_CASE("iou examples") {
    const BoxGeometry a{0, 0, 100, 100}, b{50, 0, 100, 100}, c{300, 0, 10, 10};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, c) == 0.0);
    CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(iou(a, b) == doctest::Approx(pixel_iou(a, b)));
    CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("property: iou equals the pixel-count oracle on integer boxes") {
    CounterRng rng(21);
    for (int i = 0; i < 60; ++i) {
        auto box = [&] {
            return BoxGeometry{std::floor(rng.uniform(0, 200)), std::floor(rng.uniform(0, 150)),
                               1 + std::floor(rng.uniform(0, 150)), 1 + std::floor(rng.uniform(0, 120))};
        };
        const BoxGeometry a = box(), b = box();
        CHECK(iou(a, b) == doctest::Approx(pixel_iou(a, b)).epsilon(1e-12));
        CHECK(iou(a, b) == doctest::Approx(iou(b, a)));
    }
}

TEST_CASE("blended cost examples") {
    MatchConfig cfg;
    CHECK(blended_cost(text(10, 10, "Hello"), text(10, 10, "Hello"), cfg) == 0.0);
    const double d = center_distance({0, 0, 100, 100}, {50, 0, 100, 100}, 960, 540);
    CHECK(d == doctest::Approx(50.0 / std::sqrt(960.0 * 960.0 + 540.0 * 540.0)));
    CHECK(d == doctest::Approx(0.0454).epsilon(1e-3));
    CHECK(blended_cost(text(10, 10, "abc"), text(10, 10, "xyz"), cfg) == doctest::Approx(0.15));
    CHECK_THROWS_AS(blended_cost(text(0, 0, "a"), box_image(0, 0), cfg), KindMismatch);
}

TEST_CASE("weights without a content term keep their sum") {
    MatchConfig cfg;
    const Weights w = effective_weights(cfg, false);
    CHECK(w.delta == 0.0);
    CHECK(w.alpha + w.beta + w.gamma == doctest::Approx(1.0));
    CHECK(w.alpha / w.beta == doctest::Approx(0.45 / 0.25));
    const Weights t = effective_weights(cfg, true);
    CHECK(t.delta == 0.15);
}

TEST_CASE("size_rel floors only the ground-truth side") {
    CHECK(size_rel({0, 0, 0, 0}, {0, 0, 2, 2}, 1.0) == doctest::Approx(2.0));
    CHECK(size_rel({0, 0, 100, 100}, {0, 0, 1000, 100}, 1.0) == doctest::Approx(4.5));
}

TEST_CASE("match_elements examples") {
    MatchConfig cfg;
    SUBCASE("identical pair") {
        const std::vector<Element> g{text(0, 0, "x")}, p{text(0, 0, "x")};
        const auto r = match_elements(g, p, cfg);
        REQUIRE(r.matches.size() == 1);
        CHECK(r.matches[0].cost == 0.0);
        CHECK(r.false_positives.empty());
        CHECK(r.false_negatives.empty());
    }
    SUBCASE("crossed order is resolved by total cost") {
        const std::vector<Element> g{box_image(0, 0), box_image(500, 300)};
        const std::vector<Element> p{box_image(490, 310), box_image(10, 5)};
        const auto r = match_elements(g, p, cfg);
        REQUIRE(r.matches.size() == 2);
        CHECK(r.matches[0].gt == 0);
        CHECK(r.matches[0].pred == 1);
        CHECK(r.matches[1].gt == 1);
        CHECK(r.matches[1].pred == 0);
    }
    SUBCASE("a pair above the gate becomes one FP and one FN") {
        const std::vector<Element> g{box_image(0, 0)}, p{box_image(800, 400)};
        const auto r = match_elements(g, p, cfg);
        CHECK(r.matches.empty());
        CHECK(r.false_positives == std::vector<std::size_t>{0});
        CHECK(r.false_negatives == std::vector<std::size_t>{0});
    }
    SUBCASE("empty sides") {
        const std::vector<Element> g{box_image(0, 0), box_image(10, 10)}, none;
        CHECK(match_elements(g, none, cfg).false_negatives.size() == 2);
        CHECK(match_elements(none, g, cfg).false_positives.size() == 2);
        CHECK(match_elements(none, none, cfg).matches.empty());
    }
}

TEST_CASE("identical horizontal lines match") {
    LineElement l;
    l.x1 = 10;
    l.y1 = 100;
    l.x2 = 500;
    l.y2 = 100;
    const std::vector<Element> g{l}, p{l};
    const auto r = match_elements(g, p, MatchConfig{});
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0].cost == 0.0);
}

TEST_CASE("property: assignment equals exhaustive minimum") {
    CounterRng rng(99);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + rng.index(6);
        CostMatrix m(n);
        std::vector<double> flat(n * n);
        for (std::size_t i = 0; i < n * n; ++i) flat[i] = m(i / n, i % n) = rng.uniform();
        const auto cols = solve_assignment(m);
        std::set<std::size_t> used(cols.begin(), cols.end());
        CHECK(used.size() == n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += m(i, cols[i]);
        CHECK(total == doctest::Approx(brute_force_min(flat, n)).epsilon(1e-12));
    }
}

TEST_CASE("property: gate bookkeeping partitions indices") {
    CounterRng rng(123);
    MatchConfig cfg;
    for (int t = 0; t < 300; ++t) {
        std::vector<Element> g, p;
        const std::size_t ng = rng.index(7), np = rng.index(7);
        for (std::size_t i = 0; i < ng; ++i) g.push_back(box_image(rng.uniform(0, 800), rng.uniform(0, 400)));
        for (std::size_t i = 0; i < np; ++i) p.push_back(box_image(rng.uniform(0, 800), rng.uniform(0, 400)));
        const auto r = match_elements(g, p, cfg);
        std::vector<int> gt_seen(ng, 0), pred_seen(np, 0);
        for (const auto& m : r.matches) {
            CHECK(m.cost <= cfg.tau);
            ++gt_seen[m.gt];
            ++pred_seen[m.pred];
        }
        for (auto i : r.false_negatives) ++gt_seen[i];
        for (auto j : r.false_positives) ++pred_seen[j];
        CHECK(std::all_of(gt_seen.begin(), gt_seen.end(), [](int c) { return c == 1; }));
        CHECK(std::all_of(pred_seen.begin(), pred_seen.end(), [](int c) { return c == 1; }));
        CHECK(r.matches.size() <= std::min(ng, np));
    }
}

TEST_CASE("property: swapping sides swaps FP and FN on equal-size boxes") {
    CounterRng rng(8);
    MatchConfig cfg;
    for (int t = 0; t < 200; ++t) {
        std::vector<Element> g, p;
        for (std::size_t i = 0, n = rng.index(6); i < n; ++i) g.push_back(box_image(rng.uniform(0, 300), 0));
        for (std::size_t i = 0, n = rng.index(6); i < n; ++i) p.push_back(box_image(rng.uniform(0, 300), 0));
        const auto ab = match_elements(g, p, cfg);
        const auto ba = match_elements(p, g, cfg);
        CHECK(ab.false_positives == ba.false_negatives);
        CHECK(ab.false_negatives == ba.false_positives);
        std::set<std::pair<std::size_t, std::size_t>> x, y;
        for (const auto& m : ab.matches) x.insert({m.gt, m.pred});
        for (const auto& m : ba.matches) y.insert({m.pred, m.gt});
        CHECK(x == y);
    }
}

TEST_CASE("property: cost bounds") {
    CounterRng rng(17);
    MatchConfig cfg;
    for (int t = 0; t < 500; ++t) {
        const BoxGeometry x = testing::random_box(rng), y = testing::random_box(rng);
        CHECK(iou(x, y) >= 0.0);
        CHECK(iou(x, y) <= 1.0);
        CHECK(center_distance(x, y, 960, 540) <= 1.0);
        ImageElement i1, i2;
        i1.geometry = x;
        i2.geometry = y;
        const double c = blended_cost(i1, i2, cfg);
        CHECK(c >= 0.0);
        CHECK(c <= cfg.alpha + cfg.beta + cfg.delta + cfg.gamma * (1.0 + size_rel(x, y, cfg.eps)) + 1e-12);
    }
}

TEST_CASE("match_slide keeps families apart") {
    Slide g, p;
    TextElement t;
    t.geometry = {0, 0, 100, 50};
    t.content = "x";
    g.texts.push_back(t);
    RectElement r;
    r.geometry = {0, 0, 100, 50};
    p.rects.push_back(r);
    const SlideMatch m = match_slide(g, p, MatchConfig{});
    CHECK(m[ElementKind::text].false_negatives.size() == 1);
    CHECK(m[ElementKind::rect].false_positives.size() == 1);
    CHECK(m[ElementKind::text].matches.empty());
}

TEST_CASE("table cell overlap plug-in") {
    TableElement a, b;
    a.rows = b.rows = 1;
    a.cols = b.cols = 3;
    a.cells = {"Q1", "Q2", "Q3"};
    b.cells = {"q1", "Q2", "Q4"};
    CHECK(table_cell_overlap(a, b) == doctest::Approx(2.0 / 4.0));
    MatchConfig cfg;
    cfg.table_content = true;
    a.geometry = b.geometry = {0, 0, 100, 100};
    CHECK(blended_cost(a, b, cfg) == doctest::Approx(0.15 * 0.5));
}
