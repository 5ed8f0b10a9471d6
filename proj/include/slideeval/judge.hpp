#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace slideeval {

// ---- judge scores -------------------------------------------------------

struct Scale {
    int min = 1;
    int max = 5;

    double mid() const { return 0.5 * (min + max); }
    friend bool operator==(const Scale&, const Scale&) = default;
};

inline constexpr Scale kFivePoint{1, 5};
inline constexpr Scale kHundredPoint{1, 100};

class OutOfScale : public std::out_of_range {
public:
    OutOfScale(double raw, Scale scale);
};

class TooFewPoints : public std::invalid_argument {
public:
    explicit TooFewPoints(std::size_t needed)
        : std::invalid_argument("need at least " + std::to_string(needed) + " points") {}
};

/// y* = (max - raw) / (max - min): 0 is pristine, 1 maximally degraded.
double normalize_score(double raw, Scale scale);

struct SeriesPoint {
    double severity = 0.0;
    double y = 0.0;  // normalized degradation y*
};

struct JudgeSeries {
    std::string slide_id;
    std::string axis;
    Scale scale;
    std::vector<SeriesPoint> points;  // ascending severity
};

/// Normalizes raw scores and sorts by severity.
JudgeSeries make_series(std::string slide_id, std::string axis, Scale scale,
                        std::span<const std::pair<double, int>> severity_raw);

/// Fraction of adjacent severity steps where y* does not decrease.
double poa_adjacent(std::span<const SeriesPoint> points);
/// Mean |y*(s) - s| over the grid.
double mace(std::span<const SeriesPoint> points);
/// Spearman(severity, y*); nullopt when either side is constant.
std::optional<double> fidelity(std::span<const SeriesPoint> points);

/// POA pooled two ways over many series.
struct PoaPooled {
    double mean_of_series = 0.0;  // average of per-series POA
    double pooled_steps = 0.0;    // non-decreasing steps / all steps
    std::size_t series = 0;
    std::size_t steps = 0;
};
PoaPooled poa_pooled(std::span<const JudgeSeries> series);

// ---- isotonic link ------------------------------------------------------

/// Pool-adjacent-violators on a sequence; returns the non-decreasing
/// weighted least-squares fit.
std::vector<double> pava(std::span<const double> y, std::span<const double> weights = {});

struct IsotonicFit {
    std::vector<double> knots;   // ascending distinct x
    std::vector<double> values;  // non-decreasing fitted value at each knot
    std::vector<double> fitted;  // per input point, input order
    double r2 = 0.0;
    double rmse = 0.0;
    bool degenerate = false;     // SS_tot == 0; r2 reported as 0

    /// Step map: value of the last knot <= x (first knot below the range).
    double operator()(double x) const;
};

/// Fits y as a non-decreasing function of x. Equal x values are pooled first.
IsotonicFit isotonic_fit(std::span<const double> x, std::span<const double> y);

// ---- cross-model agreement ---------------------------------------------

struct SeverityBucket {
    double lo;
    double hi;
    bool closed_right = false;

    bool contains(double s) const { return s >= lo && (s < hi || (closed_right && s == hi)); }
};

/// [0,.2), [.2,.4), [.4,.6), [.6,.8), [.8,1.0]
std::vector<SeverityBucket> default_severity_buckets();

class NoSharedSlides : public std::invalid_argument {
public:
    NoSharedSlides(const std::string& a, const std::string& b)
        : std::invalid_argument("models " + a + " and " + b + " share no slides") {}
};

/// One judged variant: item id (e.g. slide_id/axis/severity) with its severity and y*.
struct JudgedItem {
    double severity = 0.0;
    double y = 0.0;
};
using ModelScores = std::map<std::string, JudgedItem>;  // item id -> score

struct PairAgreement {
    std::optional<double> mean_rho;             // over usable buckets
    std::vector<std::optional<double>> per_bucket;
    std::size_t skipped_buckets = 0;            // < 3 shared items or constant scores
};

inline constexpr std::size_t kMinSharedPerBucket = 3;

PairAgreement pair_agreement(const ModelScores& a, const ModelScores& b, std::span<const SeverityBucket> buckets,
                             const std::string& name_a = "a", const std::string& name_b = "b");

struct AgreementMatrix {
    std::vector<std::string> models;
    std::vector<std::vector<PairAgreement>> cells;  // symmetric; diagonal is self-agreement
};

AgreementMatrix cross_model_agreement(const std::map<std::string, ModelScores>& scores,
                                      std::span<const SeverityBucket> buckets);

// ---- narrative ordering -------------------------------------------------

class InvalidPermutation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct OrderingResult {
    std::vector<int> predicted;
    std::vector<int> truth;
    double length_ratio = 0.0;
    bool computable = false;  // lengths match and pred is a permutation of truth
    std::optional<double> kendall_tau;
    std::optional<double> spearman_rho;
    std::optional<double> exact_match;
};

/// Throws InvalidPermutation when pred repeats an index or truth is not a
/// permutation. A length mismatch or foreign index only marks the result
/// not computable.
OrderingResult rank_metrics(std::span<const int> pred, std::span<const int> truth);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

MeanSd mean_sd(std::span<const double> xs);

struct OrderingSummary {
    MeanSd length_ratio;  // all decks
    MeanSd kendall_tau;   // computable decks only
    MeanSd spearman_rho;
    MeanSd exact_match;
    std::size_t decks = 0;
    std::size_t computable = 0;
    std::size_t invalid = 0;
};

OrderingSummary summarize_ordering(std::span<const OrderingResult> results, std::size_t invalid = 0);

}  // namespace slideeval
