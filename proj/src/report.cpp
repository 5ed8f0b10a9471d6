#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "pipeline_io.hpp"
#include "slideeval/judge.hpp"
#include "slideeval/pipeline.hpp"
#include "svg.hpp"

namespace slideeval {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace io;

namespace {

struct JudgeRow {
    std::string endpoint, variant_id, slide_id, axis, dimension, scale;
    double severity = 0.0;
    int run = 0;
    std::optional<int> score;
};

std::vector<JudgeRow> read_scores(const fs::path& path, const std::string& endpoint) {
    std::vector<JudgeRow> out;
    const auto rows = read_tsv(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 9) throw std::runtime_error(path.string() + ": short row");
        JudgeRow j{endpoint, r[0], r[1], r[2], r[4], r[5], std::stod(r[3]), std::stoi(r[6]), std::nullopt};
        if (r[8] != "NA") j.score = std::stoi(r[8]);
        out.push_back(std::move(j));
    }
    return out;
}

Scale scale_of(const std::string& t) {
    const auto dash = t.find('-');
    return {std::stoi(t.substr(0, dash)), std::stoi(t.substr(dash + 1))};
}

std::vector<int> ints(const std::string& s) {
    std::vector<int> out;
    if (s.empty() || s == "NA") return out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(std::stoi(s.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

StageResult Pipeline::analyze() {
    const fs::path out = stage_dir(Stage::analyze);
    json summary = json::object();

    // ---- judge sensitivity ----
    std::vector<JudgeRow> judged;
    for (const auto& name : config_.judge_endpoints) {
        auto rows = read_scores(stage_dir(Stage::judge) / name / "scores.tsv", name);
        judged.insert(judged.end(), rows.begin(), rows.end());
    }
    using GroupKey = std::tuple<std::string, std::string, std::string, std::string>;  // ep, dim, scale, axis
    std::map<GroupKey, std::map<std::pair<std::string, int>, std::vector<std::pair<double, int>>>> groups;
    std::map<GroupKey, std::size_t> missing;
    for (const auto& r : judged) {
        const GroupKey k{r.endpoint, r.dimension, r.scale, r.axis};
        if (!r.score) {
            ++missing[k];
            continue;
        }
        groups[k][{r.slide_id, r.run}].push_back({r.severity, *r.score});
    }
    std::vector<std::vector<std::string>> sens = {{"endpoint", "dimension", "scale", "axis", "series", "points",
                                                   "missing", "poa_mean", "poa_pooled", "mace", "fidelity",
                                                   "fidelity_n", "isotonic_r2"}};
    std::vector<std::vector<std::string>> curve = {{"endpoint", "dimension", "scale", "axis", "severity", "n", "mean_y"}};
    for (const auto& [k, by_series] : groups) {
        const auto& [ep, dim, scale_text, axis] = k;
        const Scale scale = scale_of(scale_text);
        std::vector<JudgeSeries> series;
        std::vector<double> xs, ys;
        std::map<double, std::pair<double, std::size_t>> per_sev;
        for (const auto& [id, pts] : by_series) {
            auto s = make_series(id.first, axis, scale, pts);
            for (const auto& p : s.points) {
                xs.push_back(p.severity);
                ys.push_back(p.y);
                auto& acc = per_sev[p.severity];
                acc.first += p.y;
                ++acc.second;
            }
            if (s.points.size() >= 2) series.push_back(std::move(s));
        }
        double mace_sum = 0.0, fid_sum = 0.0;
        std::size_t fid_n = 0;
        for (const auto& s : series) {
            mace_sum += mace(s.points);
            if (auto f = fidelity(s.points)) {
                fid_sum += *f;
                ++fid_n;
            }
        }
        const PoaPooled poa = poa_pooled(series);
        std::optional<double> r2;
        if (xs.size() >= 2) r2 = isotonic_fit(xs, ys).r2;
        const double nan = std::nan("");
        sens.push_back({ep, dim, scale_text, axis, std::to_string(series.size()), std::to_string(xs.size()),
                        std::to_string(missing[k]), series.empty() ? "NA" : num(poa.mean_of_series),
                        poa.steps ? num(poa.pooled_steps) : "NA",
                        series.empty() ? "NA" : num(mace_sum / static_cast<double>(series.size())),
                        fid_n ? num(fid_sum / static_cast<double>(fid_n)) : num(nan), std::to_string(fid_n),
                        num(r2)});
        for (const auto& [sev, acc] : per_sev) {
            curve.push_back({ep, dim, scale_text, axis, num(sev), std::to_string(acc.second),
                             num(acc.first / static_cast<double>(acc.second))});
        }
    }
    write_file_atomic(out / "sensitivity.tsv", tsv(sens));
    write_file_atomic(out / "severity_curve.tsv", tsv(curve));

    // ---- isotonic link between rating scales ----
    std::vector<std::vector<std::string>> link = {{"endpoint", "dimension", "scale_x", "scale_y", "n", "r2", "rmse"}};
    if (config_.judge_scales.size() >= 2) {
        const std::string sa = std::to_string(config_.judge_scales[0].min) + "-" + std::to_string(config_.judge_scales[0].max);
        const std::string sb = std::to_string(config_.judge_scales[1].min) + "-" + std::to_string(config_.judge_scales[1].max);
        std::map<std::pair<std::string, std::string>, std::map<std::pair<std::string, int>, std::pair<double, double>>> paired;
        for (const auto& r : judged) {
            if (!r.score || (r.scale != sa && r.scale != sb)) continue;
            auto& cell = paired[{r.endpoint, r.dimension}]
                             .try_emplace({r.variant_id, r.run}, std::nan(""), std::nan(""))
                             .first->second;
            const double y = normalize_score(*r.score, scale_of(r.scale));
            (r.scale == sa ? cell.first : cell.second) = y;
        }
        for (const auto& [k, cells] : paired) {
            std::vector<double> x, y;
            for (const auto& [_, v] : cells) {
                if (std::isnan(v.first) || std::isnan(v.second)) continue;
                x.push_back(v.first);
                y.push_back(v.second);
            }
            if (x.size() < 2) {
                link.push_back({k.first, k.second, sa, sb, std::to_string(x.size()), "NA", "NA"});
                continue;
            }
            const auto fit = isotonic_fit(x, y);
            link.push_back({k.first, k.second, sa, sb, std::to_string(x.size()), num(fit.r2), num(fit.rmse)});
        }
    }
    write_file_atomic(out / "scale_link.tsv", tsv(link));

    // ---- cross-model agreement ----
    std::vector<std::vector<std::string>> agree = {
        {"dimension", "scale", "model_a", "model_b", "mean_rho", "usable_buckets", "skipped_buckets"}};
    {
        std::map<std::pair<std::string, std::string>, std::map<std::string, ModelScores>> by_cell;
        std::map<std::tuple<std::string, std::string, std::string, std::string>, std::pair<double, int>> sums;
        std::map<std::string, double> severity;
        for (const auto& r : judged) {
            if (!r.score) continue;
            auto& s = sums[{r.dimension, r.scale, r.endpoint, r.variant_id}];
            s.first += normalize_score(*r.score, scale_of(r.scale));
            ++s.second;
            severity[r.variant_id] = r.severity;
        }
        for (const auto& [k, s] : sums) {
            const auto& [dim, scale, ep, variant] = k;
            by_cell[{dim, scale}][ep][variant] = {severity[variant], s.first / s.second};
        }
        const auto buckets = default_severity_buckets();
        for (const auto& [cell, models] : by_cell) {
            for (auto a = models.begin(); a != models.end(); ++a) {
                for (auto b = a; b != models.end(); ++b) {
                    std::vector<std::string> row = {cell.first, cell.second, a->first, b->first};
                    try {
                        const auto pa = pair_agreement(a->second, b->second, buckets, a->first, b->first);
                        const std::size_t usable = std::count_if(pa.per_bucket.begin(), pa.per_bucket.end(),
                                                                 [](const auto& v) { return v.has_value(); });
                        row.insert(row.end(), {num(pa.mean_rho), std::to_string(usable), std::to_string(pa.skipped_buckets)});
                    } catch (const NoSharedSlides&) {
                        row.insert(row.end(), {"NA", "0", std::to_string(buckets.size())});
                    }
                    agree.push_back(std::move(row));
                }
            }
        }
    }
    write_file_atomic(out / "agreement.tsv", tsv(agree));

    // ---- narrative ordering ----
    std::vector<std::vector<std::string>> ord = {{"endpoint", "decks", "computable", "invalid", "length_ratio",
                                                  "kendall_tau", "kendall_tau_sd", "spearman_rho", "exact_match"}};
    std::vector<std::vector<std::string>> per_deck = {
        {"endpoint", "deck_id", "run", "n", "status", "length_ratio", "kendall_tau", "spearman_rho", "exact_match"}};
    for (const auto& name : config_.order_endpoints) {
        const auto rows = read_tsv(stage_dir(Stage::order) / name / "orderings.tsv");
        std::vector<OrderingResult> results;
        std::size_t invalid = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            const int n = std::stoi(r[2]);
            const auto shuffle = ints(r[3]);
            std::vector<int> truth(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) truth[static_cast<std::size_t>(k)] = k + 1;
            std::string status = r[4];
            if (status != "ok") {
                ++invalid;
                per_deck.push_back({name, r[0], r[1], r[2], status, "NA", "NA", "NA", "NA"});
                continue;
            }
            std::vector<int> pred;
            for (int label : ints(r[5])) {
                pred.push_back(label >= 1 && label <= n ? shuffle[static_cast<std::size_t>(label - 1)] + 1 : -label);
            }
            try {
                const auto res = rank_metrics(pred, truth);
                per_deck.push_back({name, r[0], r[1], r[2], res.computable ? "computable" : "not_computable",
                                    num(res.length_ratio), num(res.kendall_tau), num(res.spearman_rho),
                                    num(res.exact_match)});
                results.push_back(res);
            } catch (const InvalidPermutation&) {
                ++invalid;
                per_deck.push_back({name, r[0], r[1], r[2], "invalid_permutation", "NA", "NA", "NA", "NA"});
            }
        }
        const auto s = summarize_ordering(results, invalid);
        ord.push_back({name, std::to_string(s.decks), std::to_string(s.computable), std::to_string(s.invalid),
                       num(s.length_ratio.mean), s.kendall_tau.n ? num(s.kendall_tau.mean) : "NA",
                       s.kendall_tau.n ? num(s.kendall_tau.sd) : "NA",
                       s.spearman_rho.n ? num(s.spearman_rho.mean) : "NA",
                       s.exact_match.n ? num(s.exact_match.mean) : "NA"});
    }
    write_file_atomic(out / "ordering.tsv", tsv(ord));
    write_file_atomic(out / "ordering_decks.tsv", tsv(per_deck));

    summary["judged_rows"] = judged.size();
    mark_complete(Stage::analyze, summary);
    return {Stage::analyze, StageStatus::done, ""};
}

namespace {

struct Table3Row {
    std::string label;
    std::function<std::optional<std::pair<double, double>>(const json&)> cell;
};

std::optional<std::pair<double, double>> both(const json& s, const std::vector<std::string>& path) {
    const json* e = &s["e2e"];
    const json* p = &s["parsed_only"];
    for (const auto& key : path) {
        e = &(*e)[key];
        p = &(*p)[key];
    }
    if (!e->is_number() || !p->is_number()) return std::nullopt;
    return std::pair{e->get<double>(), p->get<double>()};
}

std::optional<std::pair<double, double>> scalar(const json& s, const std::string& name) {
    const auto& st = s["scalars"][name];
    if (!st.is_object() || st["n"].get<std::size_t>() == 0) return std::nullopt;
    const double v = st["mean"].get<double>();
    return std::pair{v, v};
}

const std::vector<Table3Row>& table3_rows() {
    static const std::vector<Table3Row> rows = {
        {"Parse rate", [](const json& s) -> std::optional<std::pair<double, double>> {
             const double v = s["parse_rate"].get<double>();
             return std::pair{v, v};
         }},
        {"Matching F1", [](const json& s) { return both(s, {"matching", "f1"}); }},
        {"Coverage", [](const json& s) { return both(s, {"coverage"}); }},
        {"Text F1", [](const json& s) { return both(s, {"by_kind", "text", "f1"}); }},
        {"Rect F1", [](const json& s) { return both(s, {"by_kind", "rect", "f1"}); }},
        {"Line F1", [](const json& s) { return both(s, {"by_kind", "line", "f1"}); }},
        {"Image F1", [](const json& s) { return both(s, {"by_kind", "image", "f1"}); }},
        {"Table F1", [](const json& s) { return both(s, {"by_kind", "table", "f1"}); }},
        {"1 - IoU", [](const json& s) { return scalar(s, "one_minus_iou"); }},
        {"Center error", [](const json& s) { return scalar(s, "d_center"); }},
        {"Size error", [](const json& s) { return scalar(s, "r_size"); }},
        {"Image AR error", [](const json& s) { return scalar(s, "r_ar"); }},
        {"Text Content F1", [](const json& s) { return both(s, {"text_content", "f1"}); }},
        {"Any-style F1", [](const json& s) { return both(s, {"any_style", "f1"}); }},
        {"Font Family Acc", [](const json& s) { return both(s, {"font_family_acc"}); }},
        {"Font Group Acc", [](const json& s) { return both(s, {"font_group_acc"}); }},
        {"Font size MAE (pt)", [](const json& s) { return scalar(s, "font_size_abs_err"); }},
        {"Text color dE00", [](const json& s) { return scalar(s, "text_color_de"); }},
        {"Contrast shift", [](const json& s) { return scalar(s, "contrast_shift"); }},
    };
    return rows;
}

std::vector<double> severities_of(const std::vector<std::vector<std::string>>& curve) {
    std::set<double> s;
    for (std::size_t i = 1; i < curve.size(); ++i) s.insert(std::stod(curve[i][4]));
    return {s.begin(), s.end()};
}

}  // namespace

StageResult Pipeline::report() {
    for (Stage s : {Stage::score, Stage::analyze}) {
        if (!complete(s)) throw MissingStage(s, Stage::report);
    }
    const fs::path out = stage_dir(Stage::report);
    std::string md = "# Evaluation report\n\n";

    // extraction table
    std::map<std::string, json> summaries;
    for (const auto& name : config_.extract_endpoints) {
        summaries[name] = read_json(stage_dir(Stage::score) / name / "summary.json");
    }
    std::vector<std::vector<std::string>> t3 = {{"metric"}};
    for (const auto& name : config_.extract_endpoints) {
        t3[0].push_back(name + ":e2e");
        t3[0].push_back(name + ":parsed");
    }
    if (!config_.extract_endpoints.empty()) {
        md += "## Extraction\n\nCells read `end-to-end (parsed-only)`.\n\n| Metric |";
        for (const auto& name : config_.extract_endpoints) md += " " + name + " |";
        md += "\n|---|";
        for (std::size_t i = 0; i < config_.extract_endpoints.size(); ++i) md += "---|";
        md += "\n";
        for (const auto& row : table3_rows()) {
            std::vector<std::string> line = {row.label};
            md += "| " + row.label + " |";
            for (const auto& name : config_.extract_endpoints) {
                const auto v = row.cell(summaries[name]);
                line.push_back(v ? num(v->first) : "NA");
                line.push_back(v ? num(v->second) : "NA");
                md += v ? " " + fixed2(v->first) + " (" + fixed2(v->second) + ") |" : " n/a |";
            }
            md += "\n";
            t3.push_back(std::move(line));
        }
        md += "\n";
    }
    write_file_atomic(out / "table3.tsv", tsv(t3));

    // parseability
    std::vector<std::vector<std::string>> parse_rows = {{"endpoint", "bin_lo", "bin_hi", "n", "parsed", "rate", "ci_lo", "ci_hi"}};
    std::vector<svg::Series> parse_series;
    for (const auto& name : config_.extract_endpoints) {
        const auto rows = read_tsv(stage_dir(Stage::score) / name / "parseability.tsv");
        svg::Series s{name, {}};
        for (std::size_t i = 1; i < rows.size(); ++i) {
            std::vector<std::string> r = {name};
            r.insert(r.end(), rows[i].begin(), rows[i].end());
            parse_rows.push_back(r);
            s.points.push_back({static_cast<double>(i), std::stod(rows[i][4])});
        }
        parse_series.push_back(std::move(s));
    }
    write_file_atomic(out / "parseability.tsv", tsv(parse_rows));
    if (!parse_series.empty()) {
        write_file_atomic(out / "parseability.svg",
                          svg::line_chart("Parse rate by complexity bin", "complexity bin", "parse rate", parse_series,
                                          {0.0, 1.0}));
        md += "## Parseability\n\n![parse rate](parseability.svg)\n\n";
    }

    // judge sensitivity
    const auto sens = read_tsv(stage_dir(Stage::analyze) / "sensitivity.tsv");
    if (sens.size() > 1) {
        md += "## Judge sensitivity\n\n| Endpoint | Dimension | Scale | Axis | POA | MACE | Fidelity | Isotonic R2 |\n"
              "|---|---|---|---|---|---|---|---|\n";
        for (std::size_t i = 1; i < sens.size(); ++i) {
            const auto& r = sens[i];
            auto cell = [](const std::string& v) { return v == "NA" ? std::string("n/a") : fixed2(std::stod(v)); };
            md += "| " + r[0] + " | " + r[1] + " | " + r[2] + " | " + r[3] + " | " + cell(r[8]) + " | " + cell(r[9]) +
                  " | " + cell(r[10]) + " | " + cell(r[12]) + " |\n";
        }
        md += "\n";
        const auto curve = read_tsv(stage_dir(Stage::analyze) / "severity_curve.tsv");
        std::map<std::string, svg::Series> lines;
        for (std::size_t i = 1; i < curve.size(); ++i) {
            const auto& r = curve[i];
            const std::string label = r[0] + " " + r[1] + " " + r[2];
            auto& s = lines.try_emplace(label, svg::Series{label, {}}).first->second;
            s.points.push_back({std::stod(r[4]), std::stod(r[6])});
        }
        std::vector<svg::Series> series;
        svg::Series ideal{"ideal", {}};
        for (double s : severities_of(curve)) ideal.points.push_back({s, s});
        series.push_back(ideal);
        for (auto& [_, s] : lines) series.push_back(std::move(s));
        write_file_atomic(out / "sensitivity.svg",
                          svg::line_chart("Normalized degradation vs severity", "severity", "y*", series, {0.0, 1.0}));
        md += "![sensitivity](sensitivity.svg)\n\n";
    }

    // agreement heatmaps
    const auto agree = read_tsv(stage_dir(Stage::analyze) / "agreement.tsv");
    std::map<std::string, std::map<std::pair<std::string, std::string>, std::optional<double>>> heat;
    for (std::size_t i = 1; i < agree.size(); ++i) {
        const auto& r = agree[i];
        std::optional<double> v;
        if (r[4] != "NA") v = std::stod(r[4]);
        auto& m = heat[r[0] + " " + r[1]];
        m[{r[2], r[3]}] = v;
        m[{r[3], r[2]}] = v;
    }
    if (!heat.empty()) md += "## Cross-model agreement\n\n";
    for (const auto& [label, cells] : heat) {
        std::set<std::string> names;
        for (const auto& [k, _] : cells) names.insert(k.first);
        const std::vector<std::string> models(names.begin(), names.end());
        std::vector<std::vector<std::optional<double>>> grid(models.size(), std::vector<std::optional<double>>(models.size()));
        for (std::size_t i = 0; i < models.size(); ++i) {
            for (std::size_t j = 0; j < models.size(); ++j) {
                if (auto it = cells.find({models[i], models[j]}); it != cells.end()) grid[i][j] = it->second;
            }
        }
        std::string file = "agreement_" + label + ".svg";
        std::replace(file.begin(), file.end(), ' ', '_');
        write_file_atomic(out / file, svg::heatmap("Agreement (" + label + ")", models, grid));
        md += "![" + label + "](" + file + ")\n\n";
    }

    // ordering
    const auto ord = read_tsv(stage_dir(Stage::analyze) / "ordering.tsv");
    if (ord.size() > 1) {
        md += "## Narrative ordering\n\n| Endpoint | Decks | Computable | Invalid | Length ratio | Kendall tau | "
              "Spearman rho | Exact match |\n|---|---|---|---|---|---|---|---|\n";
        std::vector<std::pair<std::string, double>> bars;
        for (std::size_t i = 1; i < ord.size(); ++i) {
            const auto& r = ord[i];
            auto cell = [](const std::string& v) { return v == "NA" ? std::string("n/a") : fixed2(std::stod(v)); };
            md += "| " + r[0] + " | " + r[1] + " | " + r[2] + " | " + r[3] + " | " + cell(r[4]) + " | " + cell(r[5]) +
                  " | " + cell(r[7]) + " | " + cell(r[8]) + " |\n";
            bars.push_back({r[0], r[5] == "NA" ? 0.0 : std::stod(r[5])});
        }
        write_file_atomic(out / "ordering.svg", svg::bar_chart("Kendall tau by endpoint", bars, {-1.0, 1.0}));
        md += "\n![ordering](ordering.svg)\n";
    }

    write_file_atomic(out / "report.md", md);
    mark_complete(Stage::report);
    return {Stage::report, StageStatus::done, (out / "report.md").string()};
}

}  // namespace slideeval
