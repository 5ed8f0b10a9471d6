#include "slideeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "slideeval/fonts.hpp"
#include "slideeval/rng.hpp"
#include "slideeval/text_similarity.hpp"

namespace slideeval {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

double line_angle(const LineElement& l) {
    double a = std::atan2(l.y2 - l.y1, l.x2 - l.x1);
    a = std::fmod(a, std::numbers::pi);
    return a < 0.0 ? a + std::numbers::pi : a;
}

}  // namespace

double angular_error(const LineElement& a, const LineElement& b) {
    double d = std::abs(line_angle(a) - line_angle(b));
    d = std::min(d, std::numbers::pi - d);
    return clip01(d / (0.5 * std::numbers::pi));
}

GeometryErrors geometry_errors(const Element& gt, const Element& pred, const MatchConfig& match,
                               const MetricConfig& cfg) {
    if (gt.index() != pred.index()) throw KindMismatch(kind_of(gt), kind_of(pred));
    const BoxGeometry a = box_of(gt);
    const BoxGeometry b = box_of(pred);
    GeometryErrors e;
    e.one_minus_iou = 1.0 - iou(a, b);
    e.d_center = center_distance(a, b, match.width, match.height);
    e.r_size = size_rel(a, b, cfg.eps_px);

    if (const auto* g = std::get_if<ImageElement>(&gt)) {
        const auto& p = std::get<ImageElement>(pred);
        const double ar_g = g->geometry.w / std::max(cfg.eps_px, g->geometry.h);
        const double ar_p = p.geometry.w / std::max(cfg.eps_px, p.geometry.h);
        e.r_ar = clip01(std::abs(ar_p - ar_g) / std::max(cfg.eps_ratio, ar_g));
    } else if (const auto* g = std::get_if<RectElement>(&gt)) {
        const auto& p = std::get<RectElement>(pred);
        e.r_rx = clip01(std::abs(p.rx - g->rx) / std::max({cfg.eps_px, g->rx, p.rx}));
    } else if (const auto* g = std::get_if<LineElement>(&gt)) {
        const auto& p = std::get<LineElement>(pred);
        e.r_len = clip01(std::abs(p.length() - g->length()) / std::max(cfg.eps_px, g->length()));
        e.r_ang = angular_error(*g, p);
    }
    return e;
}

StyleErrors style_errors(const Element& gt, const Element& pred, const ColorHex& gt_background,
                         const ColorHex& pred_background) {
    if (gt.index() != pred.index()) throw KindMismatch(kind_of(gt), kind_of(pred));
    StyleErrors e;
    if (const auto* g = std::get_if<TextElement>(&gt)) {
        const auto& p = std::get<TextElement>(pred);
        const std::string cg = canonical_font(g->font.name);
        const std::string cp = canonical_font(p.font.name);
        e.font_family_hit = cg == cp;
        e.font_group_hit = font_group(cg) == font_group(cp);
        e.font_size_abs_err = std::abs(p.font.size - g->font.size);
        e.bold_mismatch = g->font.bold != p.font.bold;
        e.italic_mismatch = g->font.italic != p.font.italic;
        e.underline_mismatch = g->font.underline != p.font.underline;
        e.text_color_de = delta_e2000(g->font.color, p.font.color);
        e.contrast_shift = std::abs(contrast_ratio(p.font.color.rgb(), pred_background.rgb()) -
                                    contrast_ratio(g->font.color.rgb(), gt_background.rgb()));
    } else if (const auto* g = std::get_if<RectElement>(&gt)) {
        const auto& p = std::get<RectElement>(pred);
        e.fill_de = delta_e2000(g->fill.value_or(gt_background), p.fill.value_or(pred_background));
        e.stroke_de = delta_e2000(g->stroke, p.stroke);
        e.stroke_width_abs_err = std::abs(p.stroke_width - g->stroke_width);
    } else if (const auto* g = std::get_if<LineElement>(&gt)) {
        const auto& p = std::get<LineElement>(pred);
        e.stroke_de = delta_e2000(g->stroke, p.stroke);
        e.stroke_width_abs_err = std::abs(p.stroke_width - g->stroke_width);
    }
    return e;
}

PRF1 micro_prf1(const PRF1Counters& c) {
    PRF1 out;
    if (c.tp + c.fp > 0) out.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) out.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (out.precision + out.recall > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

namespace {

double quantile_sorted(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval bootstrap_ci(std::span<const double> samples, const Statistic& statistic, const BootstrapOptions& opts) {
    if (samples.empty()) throw EmptySample();
    if (opts.n_resamples == 0) throw std::invalid_argument("n_resamples must be > 0");
    if (!(opts.level > 0.0 && opts.level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    CounterRng rng(opts.seed);
    std::vector<double> resample(samples.size());
    std::vector<double> stats;
    stats.reserve(opts.n_resamples);
    for (std::size_t b = 0; b < opts.n_resamples; ++b) {
        for (double& v : resample) v = samples[rng.index(samples.size())];
        stats.push_back(statistic(resample));
    }
    std::sort(stats.begin(), stats.end());
    const double tail = 0.5 * (1.0 - opts.level);
    return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

std::vector<ComplexityBin> default_complexity_bins() {
    const double inf = std::numeric_limits<double>::infinity();
    return {{0, 1}, {1, 2}, {2, 4}, {4, 8}, {8, 16}, {16, 32}, {32, inf}};
}

std::optional<std::size_t> bin_index(std::span<const ComplexityBin> bins, std::size_t complexity) {
    const auto c = static_cast<double>(complexity);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (c > bins[i].lo && c <= bins[i].hi) return i;
    }
    return std::nullopt;
}

std::vector<BinRate> parseability_curve(std::span<const ParseObservation> records,
                                        std::span<const ComplexityBin> bins, const BootstrapOptions& opts) {
    std::vector<std::vector<double>> outcomes(bins.size());
    for (const auto& r : records) {
        if (auto k = bin_index(bins, r.complexity)) outcomes[*k].push_back(r.parsed ? 1.0 : 0.0);
    }
    std::vector<BinRate> out;
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const auto& xs = outcomes[k];
        if (xs.empty()) continue;
        BinRate b;
        b.bin = bins[k];
        b.n = xs.size();
        b.parsed = static_cast<std::size_t>(std::count(xs.begin(), xs.end(), 1.0));
        b.rate = static_cast<double>(b.parsed) / static_cast<double>(b.n);
        b.ci = bootstrap_ci(xs, mean_of, opts);
        out.push_back(b);
    }
    return out;
}

ScalarStat summarize(std::span<const double> values, const BootstrapOptions& opts) {
    ScalarStat s;
    s.n = values.size();
    if (values.empty()) return s;
    s.mean = mean_of(values);
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    s.ci = bootstrap_ci(values, mean_of, opts);
    return s;
}

std::vector<std::string> scalar_metric_names() {
    return {"one_minus_iou",      "d_center",       "r_size",        "r_ar",
            "r_rx",               "r_len",          "r_ang",         "content_sim",
            "font_size_abs_err",  "text_color_de",  "contrast_shift", "bold_mismatch",
            "italic_mismatch",    "underline_mismatch", "fill_de",   "stroke_de",
            "stroke_width_abs_err", "background_de"};
}

namespace {

bool any_emphasis(const FontSpec& f) { return f.bold || f.italic || f.underline; }

}  // namespace

void ExtractionScorer::add_failure(const Slide& gt) {
    for (ElementKind k : kAllKinds) {
        const auto n = gt.count(k);
        e2e_.by_kind[static_cast<std::size_t>(k)].fn += n;
        e2e_.overall.fn += n;
        e2e_.gt_total += n;
    }
    e2e_.gt_texts += gt.texts.size();
    e2e_.style_denominator += gt.texts.size();
    for (const auto& t : gt.texts) {
        if (any_emphasis(t.font)) ++e2e_.any_style.fn;
    }
}

std::vector<PairRecord> ExtractionScorer::add_run(const Slide& gt, const Slide* pred, int run) {
    ++runs_;
    std::vector<PairRecord> pairs;
    if (!pred) {
        add_failure(gt);
        return pairs;
    }
    ++parsed_runs_;

    const SlideMatch sm = match_slide(gt, *pred, match_);
    scalars_["background_de"].push_back(delta_e2000(gt.background, pred->background));

    for (ModeCounts* mode : {&e2e_, &parsed_}) {
        for (ElementKind k : kAllKinds) {
            const MatchResult& r = sm[k];
            PRF1Counters c{r.matches.size(), r.false_positives.size(), r.false_negatives.size()};
            mode->by_kind[static_cast<std::size_t>(k)] += c;
            mode->overall += c;
            mode->gt_total += gt.count(k);
            mode->gt_matched += r.matches.size();
        }
        mode->gt_texts += gt.texts.size();
        mode->pred_texts += pred->texts.size();
    }

    for (ElementKind k : kAllKinds) {
        const auto g_elems = elements_of(gt, k);
        const auto p_elems = elements_of(*pred, k);
        for (const Match& m : sm[k].matches) {
            PairRecord rec;
            rec.slide_id = gt.slide_id;
            rec.run = run;
            rec.kind = k;
            rec.gt = m.gt;
            rec.pred = m.pred;
            rec.cost = m.cost;
            rec.geometry = geometry_errors(g_elems[m.gt], p_elems[m.pred], match_, metric_);
            rec.style = style_errors(g_elems[m.gt], p_elems[m.pred], gt.background, pred->background);

            const auto& g = rec.geometry;
            scalars_["one_minus_iou"].push_back(g.one_minus_iou);
            scalars_["d_center"].push_back(g.d_center);
            scalars_["r_size"].push_back(g.r_size);
            if (g.r_ar) scalars_["r_ar"].push_back(*g.r_ar);
            if (g.r_rx) scalars_["r_rx"].push_back(*g.r_rx);
            if (g.r_len) scalars_["r_len"].push_back(*g.r_len);
            if (g.r_ang) scalars_["r_ang"].push_back(*g.r_ang);

            const auto& s = rec.style;
            auto flag = [](bool b) { return b ? 1.0 : 0.0; };
            if (s.font_size_abs_err) scalars_["font_size_abs_err"].push_back(*s.font_size_abs_err);
            if (s.text_color_de) scalars_["text_color_de"].push_back(*s.text_color_de);
            if (s.contrast_shift) scalars_["contrast_shift"].push_back(*s.contrast_shift);
            if (s.bold_mismatch) scalars_["bold_mismatch"].push_back(flag(*s.bold_mismatch));
            if (s.italic_mismatch) scalars_["italic_mismatch"].push_back(flag(*s.italic_mismatch));
            if (s.underline_mismatch) scalars_["underline_mismatch"].push_back(flag(*s.underline_mismatch));
            if (s.fill_de) scalars_["fill_de"].push_back(*s.fill_de);
            if (s.stroke_de) scalars_["stroke_de"].push_back(*s.stroke_de);
            if (s.stroke_width_abs_err) scalars_["stroke_width_abs_err"].push_back(*s.stroke_width_abs_err);

            if (k == ElementKind::text) {
                const auto& gt_text = std::get<TextElement>(g_elems[m.gt]);
                const auto& pred_text = std::get<TextElement>(p_elems[m.pred]);
                rec.content_sim = normalized_similarity(gt_text.content, pred_text.content);
                scalars_["content_sim"].push_back(*rec.content_sim);
                const bool ga = any_emphasis(gt_text.font), pa = any_emphasis(pred_text.font);
                for (ModeCounts* mode : {&e2e_, &parsed_}) {
                    mode->content_sim_sum += *rec.content_sim;
                    ++mode->text_pairs;
                    ++mode->style_denominator;
                    if (*s.font_family_hit) ++mode->font_family_hits;
                    if (*s.font_group_hit) ++mode->font_group_hits;
                    if (ga && pa) ++mode->any_style.tp;
                    else if (pa) ++mode->any_style.fp;
                    else if (ga) ++mode->any_style.fn;
                }
            }
            pairs.push_back(std::move(rec));
        }
    }
    // Emphasized GT texts left unmatched are missed style detections.
    for (std::size_t i : sm[ElementKind::text].false_negatives) {
        if (any_emphasis(gt.texts[i].font)) {
            ++e2e_.any_style.fn;
            ++parsed_.any_style.fn;
        }
    }
    return pairs;
}

namespace {

ModeSummary finish(const ModeCounts& c) {
    ModeSummary s;
    s.counts = c;
    for (std::size_t k = 0; k < c.by_kind.size(); ++k) s.by_kind[k] = micro_prf1(c.by_kind[k]);
    s.matching = micro_prf1(c.overall);
    s.coverage = c.gt_total ? static_cast<double>(c.gt_matched) / static_cast<double>(c.gt_total) : 0.0;

    PRF1& tc = s.text_content;
    if (c.pred_texts) tc.precision = c.content_sim_sum / static_cast<double>(c.pred_texts);
    if (c.gt_texts) tc.recall = c.content_sim_sum / static_cast<double>(c.gt_texts);
    if (tc.precision + tc.recall > 0.0) tc.f1 = 2.0 * tc.precision * tc.recall / (tc.precision + tc.recall);

    s.any_style = micro_prf1(c.any_style);
    s.any_style_defined = c.any_style.tp + c.any_style.fp + c.any_style.fn > 0;
    if (c.style_denominator) {
        s.font_family_acc = static_cast<double>(c.font_family_hits) / static_cast<double>(c.style_denominator);
        s.font_group_acc = static_cast<double>(c.font_group_hits) / static_cast<double>(c.style_denominator);
    }
    return s;
}

}  // namespace

ExtractionSummary ExtractionScorer::summary(const BootstrapOptions& opts) const {
    ExtractionSummary s;
    s.runs = runs_;
    s.parsed_runs = parsed_runs_;
    s.e2e = finish(e2e_);
    s.parsed_only = finish(parsed_);
    for (const auto& name : scalar_metric_names()) {
        auto it = scalars_.find(name);
        s.scalars[name] = it == scalars_.end() ? ScalarStat{} : summarize(it->second, opts);
    }
    return s;
}

}  // namespace slideeval
