#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slideeval/color.hpp"
#include "slideeval/gateway.hpp"
#include "slideeval/ingest.hpp"
#include "slideeval/judge.hpp"
#include "slideeval/matcher.hpp"
#include "slideeval/metrics.hpp"
#include "slideeval/perturb.hpp"
#include "slideeval/pipeline.hpp"
#include "slideeval/renderer.hpp"
#include "slideeval/slide_io.hpp"

namespace py = pybind11;
using namespace slideeval;
using nlohmann::json;

namespace {

json parse_or_empty(const std::string& text) {
    if (text.empty()) return json::object();
    return json::parse(text);
}

Axis axis_of(const std::string& name) {
    auto a = parse_axis(name);
    if (!a) throw py::value_error("unknown axis '" + name + "'");
    return *a;
}

std::vector<SeriesPoint> points_of(const std::vector<std::pair<double, double>>& pts) {
    std::vector<SeriesPoint> out;
    for (const auto& [s, y] : pts) out.push_back({s, y});
    return out;
}

std::string match_slides(const std::string& gt, const std::string& pred, const std::string& config) {
    const MatchConfig cfg = match_config_from_json(parse_or_empty(config));
    const auto m = match_slide(parse_slide(gt), parse_slide(pred), cfg);
    json out = json::object();
    for (ElementKind k : kAllKinds) {
        const auto& r = m[k];
        json matches = json::array();
        for (const auto& x : r.matches) matches.push_back({x.gt, x.pred, x.cost});
        out[std::string(to_string(k))] = {{"matches", matches},
                                          {"false_positives", r.false_positives},
                                          {"false_negatives", r.false_negatives},
                                          {"assignment_cost", r.assignment_cost}};
    }
    return out.dump();
}

std::string score_extraction(const std::vector<std::string>& gts, const std::vector<std::optional<std::string>>& preds,
                             const std::string& config, std::size_t n_resamples) {
    if (gts.size() != preds.size()) throw py::value_error("ground truth and predictions differ in length");
    ExtractionScorer scorer(match_config_from_json(parse_or_empty(config)));
    for (std::size_t i = 0; i < gts.size(); ++i) {
        const Slide gt = parse_slide(gts[i]);
        std::optional<Slide> pred;
        if (preds[i]) pred = parse_slide(*preds[i]);
        scorer.add_run(gt, pred ? &*pred : nullptr, 0);
    }
    BootstrapOptions b;
    b.n_resamples = n_resamples;
    return to_json(scorer.summary(b)).dump();
}

py::dict run_pipeline(const std::string& config_path, const std::vector<std::string>& stage_names, bool force,
                      const std::optional<std::string>& run_id, const std::optional<std::string>& output_root,
                      bool offline, std::optional<unsigned> workers) {
    RunConfig cfg = RunConfig::load(config_path);
    if (run_id) cfg.run_id = *run_id;
    if (output_root) cfg.output_root = *output_root;
    if (offline) cfg.offline = true;
    std::vector<Stage> stages;
    for (const auto& n : stage_names) {
        auto s = parse_stage(n);
        if (!s) throw py::value_error("unknown stage '" + n + "'");
        stages.push_back(*s);
    }
    if (stages.empty()) stages = all_stages();
    PipelineOptions opts;
    opts.force = force;
    opts.workers = workers;
    PipelineResult r;
    {
        py::gil_scoped_release release;
        r = Pipeline(std::move(cfg), std::move(opts)).run(stages);
    }
    py::list rows;
    for (const auto& s : r.stages) {
        rows.append(py::make_tuple(std::string(to_string(s.stage)), std::string(to_string(s.status)), s.message));
    }
    py::dict out;
    out["exit_code"] = r.exit_code();
    out["run_dir"] = r.run_dir.string();
    out["network_requests"] = r.network_requests;
    out["stages"] = rows;
    return out;
}

}  // namespace

PYBIND11_MODULE(_slideeval, m) {
    m.doc() = "Native core of the slideeval toolkit";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<InvalidPermutation>(m, "InvalidPermutation", PyExc_ValueError);
    py::register_exception<IngestError>(m, "IngestError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("validate_slide", [](const std::string& text, bool strict, bool round_geometry) {
        ValidationOptions o;
        o.strict = strict;
        o.round_geometry = round_geometry;
        return serialize(parse_slide(text, o));
    }, py::arg("text"), py::arg("strict") = true, py::arg("round_geometry") = false,
       "Validate a slide document and return its canonical serialization.");

    m.def("delta_e2000", [](const std::string& a, const std::string& b) {
        return delta_e2000(ColorHex::from_string(a), ColorHex::from_string(b));
    }, py::arg("a"), py::arg("b"));
    m.def("delta_e2000_lab", [](std::tuple<double, double, double> a, std::tuple<double, double, double> b) {
        return delta_e2000(Lab{std::get<0>(a), std::get<1>(a), std::get<2>(a)},
                           Lab{std::get<0>(b), std::get<1>(b), std::get<2>(b)});
    }, py::arg("a"), py::arg("b"));

    m.def("match_slides", &match_slides, py::arg("gt"), py::arg("pred"), py::arg("config") = "");
    m.def("score_extraction", &score_extraction, py::arg("gts"), py::arg("preds"), py::arg("config") = "",
          py::arg("n_resamples") = 2000);

    m.def("perturb", [](const std::string& slide, const std::string& axis, double severity, const std::string& config) {
        const auto p = perturb(parse_slide(slide), axis_of(axis), severity,
                               perturbation_config_from_json(parse_or_empty(config)));
        return py::make_tuple(serialize(p.slide), to_json(p.record).dump());
    }, py::arg("slide"), py::arg("axis"), py::arg("severity"), py::arg("config") = "");
    m.def("replay", [](const std::string& slide, const std::string& record) {
        return serialize(replay(parse_slide(slide), record_from_json(json::parse(record))));
    }, py::arg("slide"), py::arg("record"));
    m.def("derive_seed", [](std::uint64_t base, const std::string& id, const std::string& axis, double s) {
        return derive_seed(base, id, axis_of(axis), s);
    }, py::arg("base_seed"), py::arg("slide_id"), py::arg("axis"), py::arg("severity"));

    m.def("render_png", [](const std::string& slide, double scale, const std::string& mode) {
        RenderOptions o;
        o.scale = scale;
        if (mode != "presentation" && mode != "test") throw py::value_error("mode must be presentation or test");
        o.mode = mode == "test" ? RenderMode::test : RenderMode::presentation;
        std::string png;
        {
            const Slide s = parse_slide(slide);
            py::gil_scoped_release release;
            png = encode_png(render_slide(s, o));
        }
        return py::bytes(png);
    }, py::arg("slide"), py::arg("scale") = 1.0, py::arg("mode") = "presentation");

    m.def("ingest", [](const std::string& path, bool strict) {
        IngestOptions o;
        o.strict = strict;
        const auto r = ingest_deck(path, o);
        std::vector<std::string> slides;
        for (const auto& s : r.slides) slides.push_back(to_json(s).dump());
        std::vector<std::string> ids;
        for (const auto& s : r.slides) ids.push_back(s.slide_id);
        return py::make_tuple(slides, ids, r.manifest.to_json().dump());
    }, py::arg("path"), py::arg("strict") = false);

    m.def("rank_metrics", [](const std::vector<int>& pred, const std::vector<int>& truth) {
        const auto r = rank_metrics(pred, truth);
        py::dict d;
        d["length_ratio"] = r.length_ratio;
        d["computable"] = r.computable;
        d["kendall_tau"] = r.kendall_tau;
        d["spearman_rho"] = r.spearman_rho;
        d["exact_match"] = r.exact_match;
        return d;
    }, py::arg("pred"), py::arg("truth"));

    m.def("pava", [](const std::vector<double>& y, const std::vector<double>& w) { return pava(y, w); },
          py::arg("y"), py::arg("weights") = std::vector<double>{});
    m.def("isotonic_fit", [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto f = isotonic_fit(x, y);
        py::dict d;
        d["knots"] = f.knots;
        d["values"] = f.values;
        d["fitted"] = f.fitted;
        d["r2"] = f.r2;
        d["rmse"] = f.rmse;
        d["degenerate"] = f.degenerate;
        return d;
    }, py::arg("x"), py::arg("y"));

    m.def("normalize_score", [](double raw, int lo, int hi) { return normalize_score(raw, Scale{lo, hi}); },
          py::arg("raw"), py::arg("min"), py::arg("max"));
    m.def("poa_adjacent", [](const std::vector<std::pair<double, double>>& p) { return poa_adjacent(points_of(p)); });
    m.def("mace", [](const std::vector<std::pair<double, double>>& p) { return mace(points_of(p)); });
    m.def("fidelity", [](const std::vector<std::pair<double, double>>& p) { return fidelity(points_of(p)); });

    m.def("parse_judge_reply", [](const std::string& c, int lo, int hi) { return parse_judge_reply(c, Scale{lo, hi}); },
          py::arg("content"), py::arg("min"), py::arg("max"));
    m.def("parse_ordering_reply", &parse_ordering_reply, py::arg("content"));

    m.def("run_pipeline", &run_pipeline, py::arg("config_path"), py::arg("stages") = std::vector<std::string>{},
          py::arg("force") = false, py::arg("run_id") = std::nullopt, py::arg("output_root") = std::nullopt,
          py::arg("offline") = false, py::arg("workers") = std::nullopt);
}
