#include "slideeval/judge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "slideeval/stats.hpp"

namespace slideeval {

OutOfScale::OutOfScale(double raw, Scale scale)
    : std::out_of_range("score " + std::to_string(raw) + " outside " + std::to_string(scale.min) + ".." +
                        std::to_string(scale.max)) {}

double normalize_score(double raw, Scale scale) {
    if (scale.max <= scale.min) throw std::invalid_argument("scale max must exceed min");
    if (!(raw >= scale.min && raw <= scale.max)) throw OutOfScale(raw, scale);
    return (scale.max - raw) / static_cast<double>(scale.max - scale.min);
}

JudgeSeries make_series(std::string slide_id, std::string axis, Scale scale,
                        std::span<const std::pair<double, int>> severity_raw) {
    JudgeSeries s{std::move(slide_id), std::move(axis), scale, {}};
    for (const auto& [sev, raw] : severity_raw) s.points.push_back({sev, normalize_score(raw, scale)});
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](const SeriesPoint& a, const SeriesPoint& b) { return a.severity < b.severity; });
    return s;
}

namespace {

std::vector<SeriesPoint> sorted(std::span<const SeriesPoint> points) {
    std::vector<SeriesPoint> out(points.begin(), points.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const SeriesPoint& a, const SeriesPoint& b) { return a.severity < b.severity; });
    return out;
}

std::size_t non_decreasing_steps(const std::vector<SeriesPoint>& p) {
    std::size_t ok = 0;
    for (std::size_t i = 1; i < p.size(); ++i) ok += p[i].y >= p[i - 1].y;
    return ok;
}

}  // namespace

double poa_adjacent(std::span<const SeriesPoint> points) {
    if (points.size() < 2) throw TooFewPoints(2);
    const auto p = sorted(points);
    return static_cast<double>(non_decreasing_steps(p)) / static_cast<double>(p.size() - 1);
}

double mace(std::span<const SeriesPoint> points) {
    if (points.empty()) throw TooFewPoints(1);
    double sum = 0.0;
    for (const auto& p : points) sum += std::abs(p.y - p.severity);
    return sum / static_cast<double>(points.size());
}

std::optional<double> fidelity(std::span<const SeriesPoint> points) {
    std::vector<double> s, y;
    for (const auto& p : points) {
        s.push_back(p.severity);
        y.push_back(p.y);
    }
    return spearman(s, y);
}

PoaPooled poa_pooled(std::span<const JudgeSeries> series) {
    PoaPooled out;
    double sum = 0.0;
    std::size_t ok = 0;
    for (const auto& s : series) {
        if (s.points.size() < 2) continue;
        const auto p = sorted(s.points);
        const std::size_t good = non_decreasing_steps(p);
        sum += static_cast<double>(good) / static_cast<double>(p.size() - 1);
        ok += good;
        out.steps += p.size() - 1;
        ++out.series;
    }
    if (out.series == 0) throw TooFewPoints(2);
    out.mean_of_series = sum / static_cast<double>(out.series);
    out.pooled_steps = static_cast<double>(ok) / static_cast<double>(out.steps);
    return out;
}

std::vector<double> pava(std::span<const double> y, std::span<const double> weights) {
    if (!weights.empty() && weights.size() != y.size()) throw std::invalid_argument("weights differ in length");
    struct Block {
        double mean, weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
        blocks.push_back({y[i], w, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            const double total = a.weight + b.weight;
            a.mean = (a.mean * a.weight + b.mean * b.weight) / total;
            a.weight = total;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
    return out;
}

double IsotonicFit::operator()(double x) const {
    if (knots.empty()) return 0.0;
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.begin()) return values.front();
    return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

IsotonicFit isotonic_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("paired samples differ in length");
    if (x.size() < 2) throw TooFewPoints(2);
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    IsotonicFit fit;
    std::vector<double> means, weights;
    std::vector<std::size_t> group_of(x.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t j = k;
        double sum = 0.0;
        while (j < order.size() && x[order[j]] == x[order[k]]) {
            sum += y[order[j]];
            group_of[order[j]] = fit.knots.size();
            ++j;
        }
        fit.knots.push_back(x[order[k]]);
        means.push_back(sum / static_cast<double>(j - k));
        weights.push_back(static_cast<double>(j - k));
        k = j;
    }
    fit.values = pava(means, weights);

    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double f = fit.values[group_of[i]];
        fit.fitted.push_back(f);
        ss_res += (y[i] - f) * (y[i] - f);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    fit.rmse = std::sqrt(ss_res / static_cast<double>(y.size()));
    fit.degenerate = ss_tot == 0.0;
    fit.r2 = fit.degenerate ? 0.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

std::vector<SeverityBucket> default_severity_buckets() {
    return {{0.0, 0.2}, {0.2, 0.4}, {0.4, 0.6}, {0.6, 0.8}, {0.8, 1.0, true}};
}

PairAgreement pair_agreement(const ModelScores& a, const ModelScores& b, std::span<const SeverityBucket> buckets,
                             const std::string& name_a, const std::string& name_b) {
    PairAgreement out;
    std::vector<std::vector<double>> ya(buckets.size()), yb(buckets.size());
    bool shared = false;
    for (const auto& [id, sa] : a) {
        auto it = b.find(id);
        if (it == b.end()) continue;
        shared = true;
        for (std::size_t k = 0; k < buckets.size(); ++k) {
            if (buckets[k].contains(sa.severity)) {
                ya[k].push_back(sa.y);
                yb[k].push_back(it->second.y);
                break;
            }
        }
    }
    if (!shared) throw NoSharedSlides(name_a, name_b);

    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < buckets.size(); ++k) {
        std::optional<double> rho;
        if (ya[k].size() >= kMinSharedPerBucket) rho = spearman(ya[k], yb[k]);
        if (rho) {
            sum += *rho;
            ++used;
        } else {
            ++out.skipped_buckets;
        }
        out.per_bucket.push_back(rho);
    }
    if (used) out.mean_rho = sum / static_cast<double>(used);
    return out;
}

AgreementMatrix cross_model_agreement(const std::map<std::string, ModelScores>& scores,
                                      std::span<const SeverityBucket> buckets) {
    if (scores.size() < 2) throw std::invalid_argument("agreement needs at least two models");
    AgreementMatrix m;
    for (const auto& [name, _] : scores) m.models.push_back(name);
    const std::size_t n = m.models.size();
    m.cells.assign(n, std::vector<PairAgreement>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const auto& a = scores.at(m.models[i]);
            const auto& b = scores.at(m.models[j]);
            m.cells[i][j] = pair_agreement(a, b, buckets, m.models[i], m.models[j]);
            m.cells[j][i] = m.cells[i][j];
        }
    }
    return m;
}

OrderingResult rank_metrics(std::span<const int> pred, std::span<const int> truth) {
    OrderingResult r;
    r.predicted.assign(pred.begin(), pred.end());
    r.truth.assign(truth.begin(), truth.end());
    if (truth.empty()) throw InvalidPermutation("empty truth order");

    std::unordered_map<int, std::size_t> truth_pos;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!truth_pos.emplace(truth[i], i).second) throw InvalidPermutation("truth repeats an index");
    }
    std::set<int> seen;
    for (int v : pred) {
        if (!seen.insert(v).second) throw InvalidPermutation("prediction repeats index " + std::to_string(v));
    }

    r.length_ratio = static_cast<double>(pred.size()) / static_cast<double>(truth.size());
    if (pred.size() != truth.size()) return r;
    for (int v : pred) {
        if (!truth_pos.count(v)) return r;
    }
    r.computable = true;

    // Compare positions item by item, so any relabeling of deck indices cancels.
    std::vector<double> pos_pred(truth.size()), pos_truth(truth.size());
    std::size_t exact = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const std::size_t item = truth_pos.at(pred[i]);
        pos_pred[item] = static_cast<double>(i);
        pos_truth[item] = static_cast<double>(item);
        exact += pred[i] == truth[i];
    }
    r.kendall_tau = kendall_tau_b(pos_pred, pos_truth);
    r.spearman_rho = spearman(pos_pred, pos_truth);
    r.exact_match = static_cast<double>(exact) / static_cast<double>(truth.size());
    return r;
}

MeanSd mean_sd(std::span<const double> xs) {
    MeanSd out;
    out.n = xs.size();
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double v : xs) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

OrderingSummary summarize_ordering(std::span<const OrderingResult> results, std::size_t invalid) {
    OrderingSummary s;
    s.decks = results.size() + invalid;
    s.invalid = invalid;
    std::vector<double> len, tau, rho, exact;
    for (const auto& r : results) {
        len.push_back(r.length_ratio);
        if (!r.computable) continue;
        ++s.computable;
        if (r.kendall_tau) tau.push_back(*r.kendall_tau);
        if (r.spearman_rho) rho.push_back(*r.spearman_rho);
        if (r.exact_match) exact.push_back(*r.exact_match);
    }
    s.length_ratio = mean_sd(len);
    s.kendall_tau = mean_sd(tau);
    s.spearman_rho = mean_sd(rho);
    s.exact_match = mean_sd(exact);
    return s;
}

}  // namespace slideeval
