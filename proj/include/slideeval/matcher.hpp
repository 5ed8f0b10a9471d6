#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "slideeval/slide.hpp"

namespace slideeval {

struct MatchConfig {
    double alpha = 0.45;  // 1 - IoU
    double beta = 0.25;   // normalized center distance
    double gamma = 0.15;  // relative size drift
    double delta = 0.15;  // 1 - content similarity
    double tau = 0.5;     // accept iff cost <= tau
    double eps = 1.0;     // px floor for size denominators
    double width = kSlideWidth;
    double height = kSlideHeight;
    /// Use cell-text overlap as the content term for tables. Off by default,
    /// in which case tables match on geometry only like images and lines.
    bool table_content = false;

    void validate() const;
};

struct Weights {
    double alpha, beta, gamma, delta;
};

/// Weights actually applied to a pair. Without a content term delta is 0 and
/// alpha..gamma are rescaled so the four weights keep their configured sum.
Weights effective_weights(const MatchConfig& cfg, bool has_content);

double iou(const BoxGeometry& a, const BoxGeometry& b);
double center_distance(const BoxGeometry& a, const BoxGeometry& b, double width, double height);
/// Floors only the ground-truth side (a) with eps, as in the matching definition.
double size_rel(const BoxGeometry& a, const BoxGeometry& b, double eps);

using Element = std::variant<TextElement, RectElement, LineElement, ImageElement, TableElement>;

ElementKind kind_of(const Element& e);
/// Lines use their endpoint bounds widened to at least the stroke width (min 1 px).
BoxGeometry box_of(const Element& e);

class KindMismatch : public std::invalid_argument {
public:
    KindMismatch(ElementKind gt, ElementKind pred);
};

/// Jaccard overlap of the normalized non-empty cell strings (as multisets).
double table_cell_overlap(const TableElement& a, const TableElement& b);

double blended_cost(const Element& gt, const Element& pred, const MatchConfig& cfg);

struct Match {
    std::size_t gt = 0;
    std::size_t pred = 0;
    double cost = 0.0;
};

struct MatchResult {
    std::vector<Match> matches;                 // ascending gt index
    std::vector<std::size_t> false_positives;   // unmatched pred indices, ascending
    std::vector<std::size_t> false_negatives;   // unmatched gt indices, ascending
    /// Sum of blended costs over every assigned (gt, pred) pair, accepted or
    /// rejected by the gate.
    double assignment_cost = 0.0;
};

/// Minimum-cost assignment of one element family followed by the threshold
/// gate. All elements must be of one kind.
MatchResult match_elements(std::span<const Element> gt, std::span<const Element> pred, const MatchConfig& cfg);

/// Same, from a precomputed |G| x |P| cost table (row-major).
MatchResult match_costs(std::span<const double> costs, std::size_t n_gt, std::size_t n_pred, double tau);

std::vector<Element> elements_of(const Slide& slide, ElementKind kind);

struct SlideMatch {
    std::array<MatchResult, 5> by_kind;  // indexed by ElementKind

    const MatchResult& operator[](ElementKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
    MatchResult& operator[](ElementKind k) { return by_kind[static_cast<std::size_t>(k)]; }
};

/// Per-family matching; cross-family pairs are never considered.
SlideMatch match_slide(const Slide& gt, const Slide& pred, const MatchConfig& cfg);

}  // namespace slideeval
