#include <fstream>
#include <set>
#include <sstream>

#include "slideeval/digest.hpp"
#include "slideeval/pipeline.hpp"

namespace slideeval {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, _] : j.items()) {
        if (!known.contains(k)) throw ConfigError("unknown field '" + k + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

std::string scale_name(Scale s) { return std::to_string(s.min) + "-" + std::to_string(s.max); }

Scale parse_scale(const std::string& text) {
    const auto dash = text.find('-');
    try {
        if (dash == std::string::npos) throw std::invalid_argument(text);
        std::size_t used = 0;
        Scale s{std::stoi(text.substr(0, dash), &used), std::stoi(text.substr(dash + 1))};
        if (used != dash || s.min >= s.max) throw std::invalid_argument(text);
        return s;
    } catch (const std::exception&) {
        throw ConfigError("scale must look like '1-5', got '" + text + "'");
    }
}

}  // namespace

json to_json(const MatchConfig& c) {
    return {{"alpha", c.alpha}, {"beta", c.beta},   {"gamma", c.gamma},   {"delta", c.delta},
            {"tau", c.tau},     {"eps", c.eps},     {"table_content", c.table_content}};
}

MatchConfig match_config_from_json(const json& j) {
    check_keys(j, {"alpha", "beta", "gamma", "delta", "tau", "eps", "table_content"}, "match");
    MatchConfig c;
    read(j, "alpha", c.alpha, "match");
    read(j, "beta", c.beta, "match");
    read(j, "gamma", c.gamma, "match");
    read(j, "delta", c.delta, "match");
    read(j, "tau", c.tau, "match");
    read(j, "eps", c.eps, "match");
    read(j, "table_content", c.table_content, "match");
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("match: ") + e.what());
    }
    return c;
}

json to_json(const PerturbationConfig& c) {
    return {{"base_seed", c.base_seed}, {"allow_clipping", c.allow_clipping}, {"preserve_numbers", c.preserve_numbers},
            {"max_inserts", c.max_inserts}, {"pi_geo", c.pi_geo}, {"pi_txt", c.pi_txt}, {"pi_sty", c.pi_sty},
            {"font_pool", c.font_pool}, {"palette", c.palette}, {"filler", c.filler}};
}

PerturbationConfig perturbation_config_from_json(const json& j) {
    check_keys(j,
               {"base_seed", "allow_clipping", "preserve_numbers", "max_inserts", "pi_geo", "pi_txt", "pi_sty",
                "font_pool", "palette", "filler"},
               "perturbation");
    PerturbationConfig c;
    read(j, "base_seed", c.base_seed, "perturbation");
    read(j, "allow_clipping", c.allow_clipping, "perturbation");
    read(j, "preserve_numbers", c.preserve_numbers, "perturbation");
    read(j, "max_inserts", c.max_inserts, "perturbation");
    read(j, "pi_geo", c.pi_geo, "perturbation");
    read(j, "pi_txt", c.pi_txt, "perturbation");
    read(j, "pi_sty", c.pi_sty, "perturbation");
    read(j, "font_pool", c.font_pool, "perturbation");
    read(j, "palette", c.palette, "perturbation");
    read(j, "filler", c.filler, "perturbation");
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("perturbation: ") + e.what());
    }
    return c;
}

json RunConfig::to_json() const {
    json corpus_j = json::array();
    for (const auto& p : corpus) corpus_j.push_back(p.generic_string());
    json axes_j = json::array();
    for (Axis a : axes) axes_j.push_back(to_string(a));
    json scales_j = json::array();
    for (Scale s : judge_scales) scales_j.push_back(scale_name(s));
    json eps = json::array();
    for (const auto& e : endpoints) eps.push_back(e.to_json());
    json j = {{"version", kRunSchemaVersion},
              {"corpus", corpus_j},
              {"output_root", output_root.generic_string()},
              {"run_id", run_id},
              {"workers", workers},
              {"offline", offline},
              {"strict_ingest", strict_ingest},
              {"render", {{"scale", render_scale}, {"mode", render_mode == RenderMode::test ? "test" : "presentation"}}},
              {"match", slideeval::to_json(match)},
              {"metric", {{"eps_px", metric.eps_px}, {"eps_ratio", metric.eps_ratio}}},
              {"bootstrap",
               {{"n_resamples", bootstrap.n_resamples}, {"level", bootstrap.level}, {"seed", bootstrap.seed}}},
              {"perturbation", slideeval::to_json(perturbation)},
              {"severity_grid", severity_grid},
              {"axes", axes_j},
              {"endpoints", eps},
              {"extract",
               {{"endpoints", extract_endpoints},
                {"runs", extract_runs},
                {"variants", extract_variants},
                {"exclude_transport_failures", exclude_transport_failures}}},
              {"judge",
               {{"endpoints", judge_endpoints},
                {"scales", scales_j},
                {"runs", judge_runs},
                {"all_dimensions", judge_all_dimensions}}},
              {"order", {{"endpoints", order_endpoints}, {"seed", order_seed}, {"runs", order_runs}}}};
    j["max_seed_slides"] = max_seed_slides ? json(*max_seed_slides) : json(nullptr);
    j["cap_per_cell"] = cap_per_cell ? json(*cap_per_cell) : json(nullptr);
    j["extract"]["max_subjects"] = extract_max_subjects ? json(*extract_max_subjects) : json(nullptr);
    return j;
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    check_keys(j,
               {"version", "corpus", "output_root", "run_id", "workers", "offline", "strict_ingest", "render", "match",
                "metric", "bootstrap", "perturbation", "severity_grid", "axes", "max_seed_slides", "cap_per_cell",
                "endpoints", "extract", "judge", "order"},
               "config");
    RunConfig c;
    int version = kRunSchemaVersion;
    read(j, "version", version, "config");
    if (version != kRunSchemaVersion) {
        throw ConfigError("config version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kRunSchemaVersion) + ")");
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    std::vector<std::string> corpus;
    read(j, "corpus", corpus, "config");
    for (const auto& p : corpus) c.corpus.push_back(resolve(p));
    std::string root = c.output_root.string();
    read(j, "output_root", root, "config");
    c.output_root = resolve(root);
    read(j, "run_id", c.run_id, "config");
    read(j, "workers", c.workers, "config");
    read(j, "offline", c.offline, "config");
    read(j, "strict_ingest", c.strict_ingest, "config");
    if (j.contains("render")) {
        const json& r = j.at("render");
        check_keys(r, {"scale", "mode"}, "render");
        read(r, "scale", c.render_scale, "render");
        std::string mode = "presentation";
        read(r, "mode", mode, "render");
        if (mode != "presentation" && mode != "test") throw ConfigError("render.mode must be presentation or test");
        c.render_mode = mode == "test" ? RenderMode::test : RenderMode::presentation;
    }
    if (j.contains("match")) c.match = match_config_from_json(j.at("match"));
    if (j.contains("metric")) {
        check_keys(j.at("metric"), {"eps_px", "eps_ratio"}, "metric");
        read(j.at("metric"), "eps_px", c.metric.eps_px, "metric");
        read(j.at("metric"), "eps_ratio", c.metric.eps_ratio, "metric");
    }
    if (j.contains("bootstrap")) {
        const json& b = j.at("bootstrap");
        check_keys(b, {"n_resamples", "level", "seed"}, "bootstrap");
        read(b, "n_resamples", c.bootstrap.n_resamples, "bootstrap");
        read(b, "level", c.bootstrap.level, "bootstrap");
        read(b, "seed", c.bootstrap.seed, "bootstrap");
    }
    if (j.contains("perturbation")) c.perturbation = perturbation_config_from_json(j.at("perturbation"));
    read(j, "severity_grid", c.severity_grid, "config");
    if (j.contains("axes")) {
        std::vector<std::string> names;
        read(j, "axes", names, "config");
        c.axes.clear();
        for (const auto& n : names) {
            auto a = parse_axis(n);
            if (!a) throw ConfigError("unknown axis '" + n + "'");
            c.axes.push_back(*a);
        }
    }
    if (j.contains("max_seed_slides") && !j.at("max_seed_slides").is_null()) {
        c.max_seed_slides = j.at("max_seed_slides").get<std::size_t>();
    }
    if (j.contains("cap_per_cell") && !j.at("cap_per_cell").is_null()) {
        c.cap_per_cell = j.at("cap_per_cell").get<std::size_t>();
    }
    if (j.contains("endpoints")) {
        if (!j.at("endpoints").is_array()) throw ConfigError("endpoints must be an array");
        for (const auto& e : j.at("endpoints")) {
            ModelEndpoint ep = ModelEndpoint::from_json(e);
            if (ep.kind == "replay" && !ep.base_url.empty()) ep.base_url = resolve(ep.base_url).string();
            c.endpoints.push_back(std::move(ep));
        }
    }
    if (j.contains("extract")) {
        const json& x = j.at("extract");
        check_keys(x, {"endpoints", "runs", "variants", "exclude_transport_failures", "max_subjects"}, "extract");
        if (x.contains("max_subjects") && !x["max_subjects"].is_null()) {
            if (!x["max_subjects"].is_number_unsigned()) throw ConfigError("extract.max_subjects must be a count");
            c.extract_max_subjects = x["max_subjects"].get<std::size_t>();
        }
        read(x, "endpoints", c.extract_endpoints, "extract");
        read(x, "runs", c.extract_runs, "extract");
        read(x, "variants", c.extract_variants, "extract");
        read(x, "exclude_transport_failures", c.exclude_transport_failures, "extract");
    }
    if (j.contains("judge")) {
        const json& x = j.at("judge");
        check_keys(x, {"endpoints", "scales", "runs", "all_dimensions"}, "judge");
        read(x, "endpoints", c.judge_endpoints, "judge");
        read(x, "runs", c.judge_runs, "judge");
        read(x, "all_dimensions", c.judge_all_dimensions, "judge");
        if (x.contains("scales")) {
            std::vector<std::string> names;
            read(x, "scales", names, "judge");
            c.judge_scales.clear();
            for (const auto& n : names) c.judge_scales.push_back(parse_scale(n));
        }
    }
    if (j.contains("order")) {
        const json& x = j.at("order");
        check_keys(x, {"endpoints", "seed", "runs"}, "order");
        read(x, "endpoints", c.order_endpoints, "order");
        read(x, "seed", c.order_seed, "order");
        read(x, "runs", c.order_runs, "order");
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    return from_json(j, path.parent_path());
}

void RunConfig::validate() const {
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..") {
        throw ConfigError("run_id must be a plain directory name");
    }
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(render_scale > 0.0)) throw ConfigError("render.scale must be > 0");
    if (severity_grid.empty()) throw ConfigError("severity_grid is empty");
    for (double s : severity_grid) {
        if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("severities must lie in [0, 1]");
    }
    if (axes.empty()) throw ConfigError("axes is empty");
    if (extract_runs < 1 || judge_runs < 1 || order_runs < 1) throw ConfigError("run counts must be >= 1");
    if (bootstrap.n_resamples < 1 || !(bootstrap.level > 0.0 && bootstrap.level < 1.0)) {
        throw ConfigError("bootstrap needs n_resamples >= 1 and 0 < level < 1");
    }
    std::set<std::string> names;
    for (const auto& e : endpoints) {
        if (!names.insert(e.name).second) throw ConfigError("duplicate endpoint name '" + e.name + "'");
        if (e.name.find_first_of("/\\|") != std::string::npos) {
            throw ConfigError("endpoint name '" + e.name + "' may not contain / \\ or |");
        }
    }
    for (const auto* list : {&extract_endpoints, &judge_endpoints, &order_endpoints}) {
        for (const auto& n : *list) {
            if (!names.contains(n)) throw ConfigError("unknown endpoint '" + n + "'");
        }
    }
}

const ModelEndpoint& RunConfig::endpoint(const std::string& name) const {
    for (const auto& e : endpoints) {
        if (e.name == name) return e;
    }
    throw ConfigError("unknown endpoint '" + name + "'");
}

std::string RunConfig::content_hash() const {
    json j = to_json();
    for (const char* k : {"output_root", "run_id", "workers", "offline"}) j.erase(k);
    for (auto& e : j["endpoints"]) {
        e.erase("max_concurrency");
        e.erase("timeout_s");
    }
    return sha256_hex(j.dump());
}

std::string RunConfig::stage_hash(Stage s) const {
    const json all = to_json();
    std::map<std::string, json> eps;
    for (json e : all["endpoints"]) {
        e.erase("max_concurrency");
        e.erase("timeout_s");
        eps[e["name"].get<std::string>()] = e;
    }
    auto section = [&](const char* name) {
        json out = all[name];
        if (out.is_object() && out.contains("endpoints")) {
            json used = json::array();
            for (const auto& n : out["endpoints"]) used.push_back(eps.at(n.get<std::string>()));
            out["endpoints"] = used;
        }
        return out;
    };
    json j = {{"version", kRunSchemaVersion}, {"stage", to_string(s)}};
    switch (s) {
        case Stage::ingest:
            j["corpus"] = all["corpus"];
            j["strict_ingest"] = all["strict_ingest"];
            break;
        case Stage::render: j["render"] = all["render"]; break;
        case Stage::perturb:
            for (const char* k : {"render", "perturbation", "severity_grid", "axes", "max_seed_slides", "cap_per_cell"}) {
                j[k] = all[k];
            }
            break;
        case Stage::extract:
            j["extract"] = section("extract");
            if (extract_variants) j["perturb"] = stage_hash(Stage::perturb);
            break;
        case Stage::judge: j["judge"] = section("judge"); break;
        case Stage::order: j["order"] = section("order"); break;
        case Stage::match:
        case Stage::score:
            j["extract"] = section("extract");
            j["match"] = all["match"];
            j["metric"] = all["metric"];
            if (s == Stage::score) j["bootstrap"] = all["bootstrap"];
            if (extract_variants) j["perturb"] = stage_hash(Stage::perturb);
            break;
        case Stage::analyze:
            j["judge"] = section("judge");
            j["order"] = section("order");
            break;
        case Stage::report:
            j["extract"] = section("extract");
            j["judge"] = section("judge");
            j["order"] = section("order");
            break;
    }
    return sha256_hex(j.dump());
}

}  // namespace slideeval
