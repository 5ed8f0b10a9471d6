#include "slideeval/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "slideeval/assignment.hpp"
#include "slideeval/text_similarity.hpp"

namespace slideeval {

void MatchConfig::validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || delta < 0) throw std::invalid_argument("match weights must be >= 0");
    if (alpha + beta + gamma + delta <= 0) throw std::invalid_argument("match weights must not all be 0");
    if (tau < 0 || tau > 1) throw std::invalid_argument("tau must lie in [0, 1]");
    if (eps <= 0) throw std::invalid_argument("eps must be > 0");
    if (width <= 0 || height <= 0) throw std::invalid_argument("slide frame must be positive");
}

Weights effective_weights(const MatchConfig& cfg, bool has_content) {
    if (has_content) return {cfg.alpha, cfg.beta, cfg.gamma, cfg.delta};
    const double geometric = cfg.alpha + cfg.beta + cfg.gamma;
    if (geometric <= 0.0) return {0.0, 0.0, 0.0, 0.0};
    const double scale = (geometric + cfg.delta) / geometric;
    return {cfg.alpha * scale, cfg.beta * scale, cfg.gamma * scale, 0.0};
}

double iou(const BoxGeometry& a, const BoxGeometry& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    const double inter = iw > 0.0 && ih > 0.0 ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const BoxGeometry& a, const BoxGeometry& b, double width, double height) {
    return std::hypot(a.cx() - b.cx(), a.cy() - b.cy()) / std::hypot(width, height);
}

double size_rel(const BoxGeometry& a, const BoxGeometry& b, double eps) {
    return 0.5 * (std::abs(a.w - b.w) / std::max(eps, a.w) + std::abs(a.h - b.h) / std::max(eps, a.h));
}

ElementKind kind_of(const Element& e) { return static_cast<ElementKind>(e.index()); }

BoxGeometry box_of(const Element& e) {
    return std::visit(
        [](const auto& el) -> BoxGeometry {
            if constexpr (std::is_same_v<std::decay_t<decltype(el)>, LineElement>) {
                // Thicken axis-parallel lines to their stroke so they have area.
                BoxGeometry b = el.bounds();
                const double t = std::max(1.0, el.stroke_width);
                if (b.w < t) {
                    b.x -= 0.5 * (t - b.w);
                    b.w = t;
                }
                if (b.h < t) {
                    b.y -= 0.5 * (t - b.h);
                    b.h = t;
                }
                return b;
            } else {
                return el.geometry;
            }
        },
        e);
}

KindMismatch::KindMismatch(ElementKind gt, ElementKind pred)
    : std::invalid_argument("cannot compare " + std::string(to_string(gt)) + " with " +
                            std::string(to_string(pred))) {}

double table_cell_overlap(const TableElement& a, const TableElement& b) {
    std::map<std::string, int> ca, cb;
    for (const auto& c : a.cells) {
        auto n = normalize_text(c);
        if (!n.empty()) ++ca[n];
    }
    for (const auto& c : b.cells) {
        auto n = normalize_text(c);
        if (!n.empty()) ++cb[n];
    }
    if (ca.empty() && cb.empty()) return 1.0;
    int inter = 0, uni = 0;
    auto ia = ca.begin();
    auto ib = cb.begin();
    while (ia != ca.end() || ib != cb.end()) {
        if (ib == cb.end() || (ia != ca.end() && ia->first < ib->first)) {
            uni += (ia++)->second;
        } else if (ia == ca.end() || ib->first < ia->first) {
            uni += (ib++)->second;
        } else {
            inter += std::min(ia->second, ib->second);
            uni += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(inter) / uni;
}

namespace {

std::optional<double> content_term(const Element& gt, const Element& pred, const MatchConfig& cfg) {
    if (const auto* g = std::get_if<TextElement>(&gt)) {
        return normalized_similarity(g->content, std::get<TextElement>(pred).content);
    }
    if (const auto* g = std::get_if<TableElement>(&gt); g && cfg.table_content) {
        return table_cell_overlap(*g, std::get<TableElement>(pred));
    }
    return std::nullopt;
}

}  // namespace

double blended_cost(const Element& gt, const Element& pred, const MatchConfig& cfg) {
    if (gt.index() != pred.index()) throw KindMismatch(kind_of(gt), kind_of(pred));
    const BoxGeometry a = box_of(gt);
    const BoxGeometry b = box_of(pred);
    const auto sim = content_term(gt, pred, cfg);
    const Weights w = effective_weights(cfg, sim.has_value());
    double cost = w.alpha * (1.0 - iou(a, b)) + w.beta * center_distance(a, b, cfg.width, cfg.height) +
                  w.gamma * size_rel(a, b, cfg.eps);
    if (sim) cost += w.delta * (1.0 - *sim);
    return cost;
}

MatchResult match_costs(std::span<const double> costs, std::size_t n_gt, std::size_t n_pred, double tau) {
    MatchResult result;
    const std::size_t n = std::max(n_gt, n_pred);
    CostMatrix padded(n, tau + 1.0);
    for (std::size_t i = 0; i < n_gt; ++i) {
        for (std::size_t j = 0; j < n_pred; ++j) padded(i, j) = costs[i * n_pred + j];
    }
    const auto assignment = solve_assignment(padded);

    std::vector<bool> pred_used(n_pred, false);
    for (std::size_t i = 0; i < n_gt; ++i) {
        const std::size_t j = assignment[i];
        if (j >= n_pred) {
            result.false_negatives.push_back(i);
            continue;
        }
        const double c = costs[i * n_pred + j];
        result.assignment_cost += c;
        if (c <= tau) {
            result.matches.push_back({i, j, c});
            pred_used[j] = true;
        } else {
            result.false_negatives.push_back(i);
        }
    }
    for (std::size_t j = 0; j < n_pred; ++j) {
        if (!pred_used[j]) result.false_positives.push_back(j);
    }
    return result;
}

MatchResult match_elements(std::span<const Element> gt, std::span<const Element> pred, const MatchConfig& cfg) {
    std::vector<double> costs(gt.size() * pred.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        for (std::size_t j = 0; j < pred.size(); ++j) costs[i * pred.size() + j] = blended_cost(gt[i], pred[j], cfg);
    }
    return match_costs(costs, gt.size(), pred.size(), cfg.tau);
}

std::vector<Element> elements_of(const Slide& slide, ElementKind kind) {
    std::vector<Element> out;
    auto add = [&](const auto& list) {
        for (const auto& e : list) out.emplace_back(e);
    };
    switch (kind) {
        case ElementKind::text: add(slide.texts); break;
        case ElementKind::rect: add(slide.rects); break;
        case ElementKind::line: add(slide.lines); break;
        case ElementKind::image: add(slide.images); break;
        case ElementKind::table: add(slide.tables); break;
    }
    return out;
}

SlideMatch match_slide(const Slide& gt, const Slide& pred, const MatchConfig& cfg) {
    SlideMatch out;
    for (ElementKind k : kAllKinds) {
        const auto g = elements_of(gt, k);
        const auto p = elements_of(pred, k);
        out[k] = match_elements(g, p, cfg);
    }
    return out;
}

}  // namespace slideeval
