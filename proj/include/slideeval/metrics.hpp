#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slideeval/matcher.hpp"
#include "slideeval/slide.hpp"

namespace slideeval {

struct MetricConfig {
    double eps_px = 1.0;       // floor for pixel denominators
    double eps_ratio = 1e-6;   // floor for dimensionless denominators (aspect ratio)
};

/// Geometry terms of one matched pair. Box terms are always set; the
/// kind-specific ones only for their family.
struct GeometryErrors {
    double one_minus_iou = 0.0;
    double d_center = 0.0;
    double r_size = 0.0;
    std::optional<double> r_ar;   // images
    std::optional<double> r_rx;   // rects
    std::optional<double> r_len;  // lines
    std::optional<double> r_ang;  // lines
};

GeometryErrors geometry_errors(const Element& gt, const Element& pred, const MatchConfig& match,
                               const MetricConfig& cfg = {});

/// Undirected angle between two lines over pi/2, in [0, 1].
double angular_error(const LineElement& a, const LineElement& b);

struct StyleErrors {
    // texts
    std::optional<bool> font_family_hit;
    std::optional<bool> font_group_hit;
    std::optional<double> font_size_abs_err;  // pt
    std::optional<bool> bold_mismatch;
    std::optional<bool> italic_mismatch;
    std::optional<bool> underline_mismatch;
    std::optional<double> text_color_de;
    std::optional<double> contrast_shift;
    // rects / lines
    std::optional<double> fill_de;
    std::optional<double> stroke_de;
    std::optional<double> stroke_width_abs_err;  // pt
};

/// Backgrounds are those of the slides each element lives on; contrast is the
/// WCAG ratio of the element color against its own slide background.
StyleErrors style_errors(const Element& gt, const Element& pred, const ColorHex& gt_background,
                         const ColorHex& pred_background);

struct PRF1Counters {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    PRF1Counters& operator+=(const PRF1Counters& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const PRF1Counters&, const PRF1Counters&) = default;
};

struct PRF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Zero denominators give 0.
PRF1 micro_prf1(const PRF1Counters& c);

class EmptySample : public std::invalid_argument {
public:
    EmptySample() : std::invalid_argument("bootstrap needs at least one sample") {}
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct BootstrapOptions {
    std::size_t n_resamples = 2000;
    double level = 0.95;
    std::uint64_t seed = 0x5EED;
};

using Statistic = std::function<double(std::span<const double>)>;

double mean_of(std::span<const double> xs);

/// Percentile interval (linear interpolation between order statistics).
Interval bootstrap_ci(std::span<const double> samples, const Statistic& statistic, const BootstrapOptions& opts = {});

struct ComplexityBin {
    double lo;  // exclusive
    double hi;  // inclusive; infinity for the open top bin
};

std::vector<ComplexityBin> default_complexity_bins();
/// Index of the bin containing c, or nullopt if none does (e.g. c = 0).
std::optional<std::size_t> bin_index(std::span<const ComplexityBin> bins, std::size_t complexity);

struct ParseObservation {
    std::size_t complexity = 0;
    bool parsed = false;
};

struct BinRate {
    ComplexityBin bin;
    std::size_t n = 0;
    std::size_t parsed = 0;
    double rate = 0.0;
    Interval ci;
};

/// Populated bins only, in bin order.
std::vector<BinRate> parseability_curve(std::span<const ParseObservation> records,
                                        std::span<const ComplexityBin> bins, const BootstrapOptions& opts = {});

struct ScalarStat {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 when n < 2
    std::size_t n = 0;
    Interval ci;      // bootstrap CI of the mean; degenerate when n == 0
};

ScalarStat summarize(std::span<const double> values, const BootstrapOptions& opts = {});

/// All metric terms for one matched pair, flattened for tabular output.
struct PairRecord {
    std::string slide_id;
    int run = 0;
    ElementKind kind = ElementKind::text;
    std::size_t gt = 0;
    std::size_t pred = 0;
    double cost = 0.0;
    GeometryErrors geometry;
    std::optional<double> content_sim;
    StyleErrors style;
};

/// Per-family and pooled counts for one evaluation mode.
struct ModeCounts {
    std::array<PRF1Counters, 5> by_kind{};
    PRF1Counters overall;
    std::uint64_t gt_total = 0;       // GT elements in the denominator set
    std::uint64_t gt_matched = 0;
    // texts
    double content_sim_sum = 0.0;     // soft true positives
    std::uint64_t gt_texts = 0;
    std::uint64_t pred_texts = 0;
    std::uint64_t text_pairs = 0;
    std::uint64_t font_family_hits = 0;
    std::uint64_t font_group_hits = 0;
    std::uint64_t style_denominator = 0;  // text pairs, plus failed-run GT texts in e2e
    PRF1Counters any_style;
};

struct ModeSummary {
    std::array<PRF1, 5> by_kind{};
    PRF1 matching;
    double coverage = 0.0;
    PRF1 text_content;
    PRF1 any_style;
    bool any_style_defined = false;  // false when no element has emphasis at all
    double font_family_acc = 0.0;
    double font_group_acc = 0.0;
    ModeCounts counts;
};

struct ExtractionSummary {
    std::uint64_t runs = 0;
    std::uint64_t parsed_runs = 0;
    ModeSummary e2e;
    ModeSummary parsed_only;
    std::map<std::string, ScalarStat> scalars;  // keyed by metric name, over matched pairs
};

/// Folds per-run extraction outcomes. A run whose response failed to parse
/// contributes its GT elements to the end-to-end denominators only.
class ExtractionScorer {
public:
    ExtractionScorer(MatchConfig match, MetricConfig metric = {}) : match_(match), metric_(metric) {}

    /// pred == nullptr records a parse (or transport) failure.
    std::vector<PairRecord> add_run(const Slide& gt, const Slide* pred, int run = 0);

    ExtractionSummary summary(const BootstrapOptions& opts = {}) const;

private:
    void add_failure(const Slide& gt);

    MatchConfig match_;
    MetricConfig metric_;
    std::uint64_t runs_ = 0;
    std::uint64_t parsed_runs_ = 0;
    ModeCounts e2e_;
    ModeCounts parsed_;
    std::map<std::string, std::vector<double>> scalars_;
};

std::vector<std::string> scalar_metric_names();

}  // namespace slideeval
