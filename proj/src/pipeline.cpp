#include "slideeval/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pipeline_io.hpp"
#include "slideeval/digest.hpp"
#include "slideeval/ingest.hpp"
#include "slideeval/slide_io.hpp"

namespace slideeval {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- stages ----------------------------------------------------------------

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::render: return "render";
        case Stage::perturb: return "perturb";
        case Stage::extract: return "extract";
        case Stage::judge: return "judge";
        case Stage::order: return "order";
        case Stage::match: return "match";
        case Stage::score: return "score";
        case Stage::analyze: return "analyze";
        case Stage::report: return "report";
    }
    return "ingest";
}

std::optional<Stage> parse_stage(std::string_view text) {
    for (Stage s : all_stages()) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> v = {Stage::ingest, Stage::render, Stage::perturb, Stage::extract, Stage::judge,
                                         Stage::order,  Stage::match,  Stage::score,   Stage::analyze, Stage::report};
    return v;
}

std::vector<Stage> dependencies(Stage s) {
    switch (s) {
        case Stage::ingest: return {};
        case Stage::render: return {Stage::ingest};
        case Stage::perturb: return {Stage::ingest};
        case Stage::extract: return {Stage::ingest, Stage::render};
        case Stage::judge: return {Stage::perturb};
        case Stage::order: return {Stage::ingest, Stage::render};
        case Stage::match: return {Stage::extract};
        case Stage::score: return {Stage::match};
        case Stage::analyze: return {Stage::judge, Stage::order};
        case Stage::report: return {Stage::score, Stage::analyze};
    }
    return {};
}

std::string_view to_string(StageStatus s) {
    switch (s) {
        case StageStatus::done: return "done";
        case StageStatus::up_to_date: return "up_to_date";
        case StageStatus::partial: return "partial";
        case StageStatus::blocked: return "blocked";
        case StageStatus::failed: return "failed";
    }
    return "done";
}

int PipelineResult::exit_code() const {
    int worst = 0;
    for (const auto& s : stages) {
        switch (s.status) {
            case StageStatus::partial: worst = std::max(worst, 1); break;
            case StageStatus::blocked: worst = std::max(worst, 2); break;
            case StageStatus::failed: worst = std::max(worst, 3); break;
            default: break;
        }
    }
    return worst;
}

// ---- file helpers ----------------------------------------------------------

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace io {

std::string file_stem(std::string_view id) {
    std::string s = image_file_name(id);
    s.resize(s.size() - 4);
    return s;
}

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

std::string tsv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += '\t';
            out += r[i];
        }
        out += '\n';
    }
    return out;
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            cells.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

json read_json(const fs::path& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw std::runtime_error(path.string() + " is not valid JSON");
    return j;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<RunRecord> read_records(const fs::path& path) {
    std::vector<RunRecord> out;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(RunRecord::from_json(json::parse(line)));
    }
    return out;
}

void write_records(const fs::path& dir, const std::vector<RunRecord>& records) {
    std::string body, latency = "key\tattempts\tlatency_ms\n";
    for (const auto& r : records) {
        body += r.to_json(false).dump() + "\n";
        latency += r.key + "\t" + std::to_string(r.attempts) + "\t" + num(r.latency_ms) + "\n";
    }
    write_file_atomic(dir / "records.jsonl", body);
    write_file_atomic(dir / "latency.tsv", latency);
}

json accounting_json(const std::vector<RunRecord>& records) {
    json out = json::object();
    for (const auto& [task, a] : account(records)) {
        out[std::string(to_string(task))] = {{"ok", a.ok},
                                             {"parse_failure", a.parse_failure},
                                             {"transport_failure", a.transport_failure},
                                             {"total", a.total()}};
    }
    return out;
}

}  // namespace io

using namespace io;

// ---- run state -------------------------------------------------------------

struct DeckInfo {
    std::string deck_id;
    std::vector<std::string> slide_ids;  // successfully extracted, deck order
};

struct Pipeline::State {
    std::optional<std::vector<Slide>> slides;
    std::vector<DeckInfo> decks;
    std::optional<PerturbationManifest> variants;
};

Pipeline::Pipeline(RunConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)), state_(std::make_shared<State>()) {
    config_.validate();
    if (options_.workers) config_.workers = std::max(1u, *options_.workers);
}

fs::path Pipeline::run_dir() const { return config_.output_root / config_.run_id; }
fs::path Pipeline::stage_dir(Stage s) const { return run_dir() / std::string(to_string(s)); }

void Pipeline::log(const std::string& msg) const {
    if (options_.log) options_.log(msg);
}

namespace {

std::string stage_marker_digest(const fs::path& marker) {
    std::error_code ec;
    if (!fs::exists(marker, ec)) return {};
    return sha256_hex(read_file(marker));
}

}  // namespace

bool Pipeline::complete(Stage s) const {
    const fs::path marker = stage_dir(s) / "stage.json";
    std::error_code ec;
    if (!fs::exists(marker, ec)) return false;
    const json j = json::parse(read_file(marker), nullptr, false);
    if (j.is_discarded() || j.value("version", 0) != kRunSchemaVersion) return false;
    if (j.value("config_hash", "") != config_.stage_hash(s)) return false;
    for (Stage d : dependencies(s)) {
        const std::string want = j["inputs"].value(std::string(to_string(d)), "");
        if (want.empty() || want != stage_marker_digest(stage_dir(d) / "stage.json")) return false;
    }
    return true;
}

void Pipeline::mark_complete(Stage s, const json& extra) const {
    json inputs = json::object();
    for (Stage d : dependencies(s)) inputs[std::string(to_string(d))] = stage_marker_digest(stage_dir(d) / "stage.json");
    json j = {{"version", kRunSchemaVersion},
              {"stage", to_string(s)},
              {"config_hash", config_.stage_hash(s)},
              {"inputs", inputs}};
    if (!extra.is_null()) j["summary"] = extra;
    write_json(stage_dir(s) / "stage.json", j);
}

PipelineResult Pipeline::run(const std::vector<Stage>& stages) {
    PipelineResult result;
    result.run_dir = run_dir();
    fs::create_directories(run_dir());
    write_json(run_dir() / "config.json", config_.to_json());

    const std::set<Stage> wanted(stages.begin(), stages.end());
    std::map<Stage, StageStatus> outcome;
    for (Stage s : all_stages()) {
        if (!wanted.contains(s)) continue;
        StageResult r;
        r.stage = s;
        std::string missing;
        for (Stage d : dependencies(s)) {
            auto it = outcome.find(d);
            const bool ran_ok = it != outcome.end() && it->second != StageStatus::failed &&
                                it->second != StageStatus::blocked;
            if (it != outcome.end() ? !ran_ok : !complete(d)) missing += (missing.empty() ? "" : ", ") + std::string(to_string(d));
        }
        if (!missing.empty()) {
            r.status = StageStatus::blocked;
            r.message = "needs completed stage(s): " + missing;
        } else if (!options_.force && complete(s)) {
            r.status = StageStatus::up_to_date;
            r.message = "already complete";
        } else {
            r = run_stage(s);
        }
        log(std::string(to_string(s)) + ": " + std::string(to_string(r.status)) +
            (r.message.empty() ? "" : " (" + r.message + ")"));
        outcome[s] = r.status;
        result.stages.push_back(std::move(r));
    }
    result.network_requests = network_requests_;
    return result;
}

StageResult Pipeline::run_stage(Stage s) {
    for (Stage d : dependencies(s)) {
        if (!complete(d)) {
            StageResult r;
            r.stage = s;
            r.status = StageStatus::blocked;
            r.message = MissingStage(d, s).what();
            return r;
        }
    }
    std::error_code ec;
    fs::remove_all(stage_dir(s), ec);
    fs::create_directories(stage_dir(s));
    try {
        switch (s) {
            case Stage::ingest: return ingest();
            case Stage::render: return render();
            case Stage::perturb: return perturb_stage();
            case Stage::extract: return extract();
            case Stage::judge: return judge();
            case Stage::order: return order();
            case Stage::match: return match();
            case Stage::score: return score();
            case Stage::analyze: return analyze();
            case Stage::report: return report();
        }
    } catch (const MissingStage& e) {
        return {s, StageStatus::blocked, e.what()};
    } catch (const std::exception& e) {
        return {s, StageStatus::failed, e.what()};
    }
    return {s, StageStatus::failed, "unknown stage"};
}

std::shared_ptr<ChatClient> Pipeline::client_for(const ModelEndpoint& ep) {
    std::shared_ptr<ChatClient> client;
    if (auto it = options_.clients.find(ep.name); it != options_.clients.end()) {
        client = it->second;
    } else if (ep.kind == "synthetic") {
        throw ConfigError("synthetic endpoint '" + ep.name + "' resolved without a world");
    } else {
        if (config_.offline && (ep.kind == "openai" || ep.kind == "azure")) {
            throw ConfigError("endpoint '" + ep.name + "' needs the network but the run is offline");
        }
        client = make_client(ep);
    }
    if (options_.record_dir) {
        fs::create_directories(*options_.record_dir);
        client = std::make_shared<RecordingChatClient>(client, *options_.record_dir / (ep.name + ".jsonl"));
    }
    return client;
}

namespace {

ImageLoader media_loader(const fs::path& ingest_dir) {
    return [ingest_dir](std::string_view source) -> std::optional<std::string> {
        if (source.starts_with("data:")) {
            const auto comma = source.find(',');
            if (comma == std::string_view::npos) return std::nullopt;
            return base64_decode(source.substr(comma + 1));
        }
        std::error_code ec;
        const fs::path p = fs::path(source).is_absolute() ? fs::path(source) : ingest_dir / fs::path(source);
        if (!fs::is_regular_file(p, ec)) return std::nullopt;
        try {
            return read_file(p);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
}

std::vector<fs::path> expand_corpus(const std::vector<fs::path>& corpus) {
    std::vector<fs::path> out;
    for (const auto& p : corpus) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                std::string ext = e.path().extension().string();
                std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
                if (e.is_regular_file() && (ext == ".pptx" || ext == ".ppt")) found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p, ec)) {
            out.push_back(p);
        } else {
            throw std::runtime_error("corpus path does not exist: " + p.string());
        }
    }
    return out;
}

std::string error_kind(const IngestError& e) {
    if (dynamic_cast<const NotAZip*>(&e)) return "not_a_zip";
    if (dynamic_cast<const UnsupportedLegacyFormat*>(&e)) return "unsupported_legacy_format";
    if (dynamic_cast<const MissingPresentationPart*>(&e)) return "missing_presentation_part";
    if (dynamic_cast<const ZeroExtent*>(&e)) return "zero_extent";
    if (dynamic_cast<const MalformedXml*>(&e)) return "malformed_xml";
    return "ingest_error";
}

}  // namespace

StageResult Pipeline::ingest() {
    const fs::path dir = stage_dir(Stage::ingest);
    const auto files = expand_corpus(config_.corpus);
    json decks = json::array(), slide_ids = json::array(), errors = json::array();
    std::set<std::string> seen;
    bool partial = false;
    IngestOptions opts;
    opts.strict = config_.strict_ingest;
    for (const auto& file : files) {
        const std::string deck_id = file.stem().string();
        if (!seen.insert(deck_id).second) throw std::runtime_error("two decks share the id '" + deck_id + "'");
        IngestResult r;
        std::optional<Deck> deck;
        try {
            r = ingest_deck(file, opts);
            deck.emplace(Deck::open(file));
        } catch (const IngestError& e) {
            errors.push_back({{"deck_id", deck_id}, {"file", file.filename().string()}, {"kind", error_kind(e)},
                              {"message", e.what()}});
            partial = true;
            continue;
        }
        const std::string deck_stem = file_stem(deck_id);
        json ids = json::array();
        for (auto& slide : r.slides) {
            for (auto& im : slide.images) {
                if (im.source.empty() || im.source.starts_with("data:")) continue;
                const auto bytes = deck->read_part(im.source);
                if (!bytes) continue;
                const std::string rel = "media/" + deck_stem + "/" + fs::path(im.source).filename().string();
                if (!fs::exists(dir / rel)) write_file_atomic(dir / rel, *bytes);
                im.source = rel;
            }
            write_file_atomic(dir / "slides" / (file_stem(slide.slide_id) + ".json"), serialize(slide));
            ids.push_back(slide.slide_id);
            slide_ids.push_back(slide.slide_id);
        }
        std::size_t failed = 0;
        for (const auto& e : r.manifest.slides) failed += e.status != "ok";
        partial = partial || failed > 0;
        write_json(dir / "decks" / (deck_stem + ".json"), r.manifest.to_json());
        decks.push_back({{"deck_id", deck_id}, {"file", file.filename().string()}, {"slides", ids}, {"failed", failed}});
    }
    const json summary = {{"decks", decks.size()}, {"slides", slide_ids.size()}, {"errors", errors.size()}};
    write_json(dir / "manifest.json",
               {{"version", kRunSchemaVersion}, {"decks", decks}, {"slides", slide_ids}, {"errors", errors}});
    mark_complete(Stage::ingest, summary);
    state_->slides.reset();
    return {Stage::ingest, partial ? StageStatus::partial : StageStatus::done,
            std::to_string(decks.size()) + " decks, " + std::to_string(slide_ids.size()) + " slides"};
}

namespace {

struct Loaded {
    std::vector<Slide> slides;
    std::vector<DeckInfo> decks;
};

Loaded load_ingest(const fs::path& dir) {
    const json m = read_json(dir / "manifest.json");
    Loaded out;
    for (const auto& id : m.at("slides")) {
        const std::string sid = id.get<std::string>();
        Slide s = parse_slide(read_file(dir / "slides" / (file_stem(sid) + ".json")));
        s.slide_id = sid;
        out.slides.push_back(std::move(s));
    }
    for (const auto& d : m.at("decks")) {
        DeckInfo info;
        info.deck_id = d.at("deck_id").get<std::string>();
        for (const auto& id : d.at("slides")) info.slide_ids.push_back(id.get<std::string>());
        out.decks.push_back(std::move(info));
    }
    return out;
}

}  // namespace

StageResult Pipeline::render() {
    const Loaded in = load_ingest(stage_dir(Stage::ingest));
    RenderOptions opts;
    opts.scale = config_.render_scale;
    opts.mode = config_.render_mode;
    opts.load_image = media_loader(stage_dir(Stage::ingest));
    const RasterManifest m = rasterize_deck(in.slides, stage_dir(Stage::render) / "images", opts, config_.workers);
    mark_complete(Stage::render, {{"images", m.entries.size()}, {"failures", m.failures}});
    return {Stage::render, m.failures == 0 ? StageStatus::done : StageStatus::partial,
            std::to_string(m.entries.size()) + " images"};
}

StageResult Pipeline::perturb_stage() {
    Loaded in = load_ingest(stage_dir(Stage::ingest));
    if (config_.max_seed_slides && in.slides.size() > *config_.max_seed_slides) {
        in.slides.resize(*config_.max_seed_slides);
    }
    RenderOptions ropts;
    ropts.scale = config_.render_scale;
    ropts.mode = config_.render_mode;
    ropts.load_image = media_loader(stage_dir(Stage::ingest));
    SuiteOptions opts;
    opts.out_dir = stage_dir(Stage::perturb);
    opts.cap_per_cell = config_.cap_per_cell;
    opts.workers = config_.workers;
    opts.write_image = [ropts](const Slide& s, const fs::path& target) -> std::optional<fs::path> {
        const fs::path path = target.string() + ".png";
        try {
            write_file_atomic(path, encode_png(render_slide(s, ropts)));
        } catch (const std::exception&) {
            return std::nullopt;
        }
        return path;
    };
    const auto m = synthesize_suite(in.slides, config_.severity_grid, config_.axes, config_.perturbation, opts);
    mark_complete(Stage::perturb, {{"variants", m.rows.size()}, {"failures", m.failures}});
    return {Stage::perturb, m.failures ? StageStatus::partial : StageStatus::done,
            std::to_string(m.rows.size()) + " variants"};
}

namespace {

struct Subject {
    std::string id;
    Slide truth;
    fs::path image;
};

std::vector<Subject> extraction_subjects(const fs::path& ingest_dir, const fs::path& render_dir,
                                         const fs::path& perturb_dir, const RunConfig& cfg) {
    const bool variants = cfg.extract_variants;
    std::vector<Subject> out;
    for (auto& s : load_ingest(ingest_dir).slides) {
        Subject sub;
        sub.id = s.slide_id;
        sub.image = render_dir / "images" / image_file_name(s.slide_id);
        sub.truth = std::move(s);
        out.push_back(std::move(sub));
    }
    if (variants) {
        const auto m = PerturbationManifest::from_tsv(read_file(perturb_dir / "manifest.tsv"));
        for (const auto& row : m.rows) {
            if (row.status != "ok" || row.image_path.empty()) continue;
            Subject sub;
            sub.id = row.variant_id;
            sub.truth = parse_slide(read_file(perturb_dir / row.slide_path));
            sub.truth.slide_id = row.variant_id;
            sub.image = perturb_dir / row.image_path;
            out.push_back(std::move(sub));
        }
    }
    if (cfg.extract_max_subjects && out.size() > *cfg.extract_max_subjects) out.resize(*cfg.extract_max_subjects);
    return out;
}

JudgeDimension dimension_for(Axis a) {
    switch (a) {
        case Axis::geometry: return JudgeDimension::geometry;
        case Axis::text: return JudgeDimension::text;
        case Axis::style: return JudgeDimension::style;
    }
    return JudgeDimension::text;
}

std::string scale_name(Scale s) { return std::to_string(s.min) + "-" + std::to_string(s.max); }

/// shuffle[i] is the 0-based original position of the slide shown as label i+1.
std::vector<int> deck_shuffle(const std::string& deck_id, std::size_t n, std::uint64_t seed) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng rng(splitmix64(seed ^ fnv1a64(deck_id)));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    return perm;
}

std::vector<int> truth_labels(const std::vector<int>& shuffle) {
    std::vector<int> labels(shuffle.size());
    for (std::size_t i = 0; i < shuffle.size(); ++i) labels[static_cast<std::size_t>(shuffle[i])] = static_cast<int>(i) + 1;
    return labels;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

}  // namespace

StageResult Pipeline::extract() {
    const auto subjects = extraction_subjects(stage_dir(Stage::ingest), stage_dir(Stage::render),
                                              stage_dir(Stage::perturb), config_);
    auto world = std::make_shared<SyntheticWorld>();
    for (const auto& s : subjects) world->slides.emplace(s.id, s.truth);
    bool partial = false;
    json summary = json::object();
    for (const auto& name : config_.extract_endpoints) {
        const ModelEndpoint& ep = config_.endpoint(name);
        if (ep.kind == "synthetic" && !options_.clients.contains(name)) {
            options_.clients[name] = make_synthetic_client(ep.model, world);
        }
        Gateway gw(ep, client_for(ep));
        std::vector<GatewayRequest> reqs;
        for (const auto& s : subjects) {
            const std::string png = read_file(s.image);
            for (int run = 0; run < config_.extract_runs; ++run) {
                GatewayRequest g;
                g.chat = build_extraction_request(png, s.id, run, ep.temperature);
                g.subject = s.id;
                g.run = run;
                g.accepts = [id = s.id](std::string_view c) { return parse_extraction_reply(c, id).has_value(); };
                reqs.push_back(std::move(g));
            }
        }
        const auto records = gw.execute_all(reqs);
        if (!gw.client().offline()) network_requests_ += records.size();
        const fs::path out = stage_dir(Stage::extract) / name;
        write_records(out, records);
        const json acc = accounting_json(records);
        write_json(out / "manifest.json", {{"version", kRunSchemaVersion},
                                           {"endpoint", ep.to_json()},
                                           {"subjects", subjects.size()},
                                           {"runs", config_.extract_runs},
                                           {"accounting", acc}});
        summary[name] = acc;
        if (acc.contains("extract") && acc["extract"]["transport_failure"].get<std::size_t>() > 0) partial = true;
        options_.clients.erase(name);
    }
    mark_complete(Stage::extract, summary);
    return {Stage::extract, partial ? StageStatus::partial : StageStatus::done,
            std::to_string(subjects.size()) + " subjects"};
}

StageResult Pipeline::judge() {
    const fs::path pdir = stage_dir(Stage::perturb);
    const auto m = PerturbationManifest::from_tsv(read_file(pdir / "manifest.tsv"));
    auto world = std::make_shared<SyntheticWorld>();
    for (const auto& row : m.rows) world->severities[row.variant_id] = row.severity;
    bool partial = false;
    json summary = json::object();
    for (const auto& name : config_.judge_endpoints) {
        const ModelEndpoint& ep = config_.endpoint(name);
        if (ep.kind == "synthetic" && !options_.clients.contains(name)) {
            options_.clients[name] = make_synthetic_client(ep.model, world);
        }
        Gateway gw(ep, client_for(ep));
        std::vector<GatewayRequest> reqs;
        struct Meta {
            const VariantRow* row;
            JudgeDimension dim;
            Scale scale;
            int run;
        };
        std::vector<Meta> meta;
        for (const auto& row : m.rows) {
            if (row.status != "ok" || row.image_path.empty()) continue;
            const std::string png = read_file(pdir / row.image_path);
            std::vector<JudgeDimension> dims = {dimension_for(row.axis)};
            if (config_.judge_all_dimensions) dims = {JudgeDimension::text, JudgeDimension::geometry, JudgeDimension::style};
            for (JudgeDimension d : dims) {
                for (Scale sc : config_.judge_scales) {
                    for (int run = 0; run < config_.judge_runs; ++run) {
                        GatewayRequest g;
                        g.chat = build_judge_request(png, row.variant_id, d, sc, run, ep.temperature);
                        g.subject = row.variant_id;
                        g.run = run;
                        g.accepts = [sc](std::string_view c) { return parse_judge_reply(c, sc).has_value(); };
                        reqs.push_back(std::move(g));
                        meta.push_back({&row, d, sc, run});
                    }
                }
            }
        }
        const auto records = gw.execute_all(reqs);
        if (!gw.client().offline()) network_requests_ += records.size();
        const fs::path out = stage_dir(Stage::judge) / name;
        write_records(out, records);
        std::vector<std::vector<std::string>> rows = {
            {"variant_id", "slide_id", "axis", "severity", "dimension", "scale", "run", "status", "score"}};
        for (std::size_t i = 0; i < records.size(); ++i) {
            const Meta& mt = meta[i];
            std::optional<int> score;
            if (records[i].status == RunStatus::ok) score = parse_judge_reply(records[i].raw_response, mt.scale);
            rows.push_back({mt.row->variant_id, mt.row->slide_id, std::string(to_string(mt.row->axis)),
                            num(mt.row->severity), std::string(to_string(mt.dim)), scale_name(mt.scale),
                            std::to_string(mt.run), std::string(to_string(records[i].status)),
                            score ? std::to_string(*score) : "NA"});
        }
        write_file_atomic(out / "scores.tsv", tsv(rows));
        const json acc = accounting_json(records);
        write_json(out / "manifest.json",
                   {{"version", kRunSchemaVersion}, {"endpoint", ep.to_json()}, {"accounting", acc}});
        summary[name] = acc;
        if (acc.contains("judge") && acc["judge"]["transport_failure"].get<std::size_t>() > 0) partial = true;
        options_.clients.erase(name);
    }
    mark_complete(Stage::judge, summary);
    return {Stage::judge, partial ? StageStatus::partial : StageStatus::done, ""};
}

StageResult Pipeline::order() {
    const Loaded in = load_ingest(stage_dir(Stage::ingest));
    auto world = std::make_shared<SyntheticWorld>();
    std::map<std::string, std::vector<int>> shuffles;
    for (const auto& d : in.decks) {
        if (d.slide_ids.size() < 2) continue;
        shuffles[d.deck_id] = deck_shuffle(d.deck_id, d.slide_ids.size(), config_.order_seed);
        world->truth_labels[d.deck_id] = truth_labels(shuffles[d.deck_id]);
    }
    bool partial = false;
    json summary = json::object();
    for (const auto& name : config_.order_endpoints) {
        const ModelEndpoint& ep = config_.endpoint(name);
        if (ep.kind == "synthetic" && !options_.clients.contains(name)) {
            options_.clients[name] = make_synthetic_client(ep.model, world);
        }
        Gateway gw(ep, client_for(ep));
        std::vector<GatewayRequest> reqs;
        std::vector<std::string> deck_of;
        for (const auto& d : in.decks) {
            auto it = shuffles.find(d.deck_id);
            if (it == shuffles.end()) continue;
            std::vector<std::string> pngs;
            for (int orig : it->second) {
                pngs.push_back(read_file(stage_dir(Stage::render) / "images" /
                                         image_file_name(d.slide_ids[static_cast<std::size_t>(orig)])));
            }
            for (int run = 0; run < config_.order_runs; ++run) {
                GatewayRequest g;
                g.chat = build_ordering_request(pngs, d.deck_id, run, ep.temperature);
                g.subject = d.deck_id;
                g.run = run;
                g.accepts = [](std::string_view c) { return parse_ordering_reply(c).has_value(); };
                reqs.push_back(std::move(g));
                deck_of.push_back(d.deck_id);
            }
        }
        const auto records = gw.execute_all(reqs);
        if (!gw.client().offline()) network_requests_ += records.size();
        const fs::path out = stage_dir(Stage::order) / name;
        write_records(out, records);
        std::vector<std::vector<std::string>> rows = {{"deck_id", "run", "n", "shuffle", "status", "predicted"}};
        for (std::size_t i = 0; i < records.size(); ++i) {
            std::optional<std::vector<int>> pred;
            if (records[i].status == RunStatus::ok) pred = parse_ordering_reply(records[i].raw_response);
            const auto& sh = shuffles.at(deck_of[i]);
            rows.push_back({deck_of[i], std::to_string(records[i].run), std::to_string(sh.size()), join_ints(sh),
                            std::string(to_string(records[i].status)), pred ? join_ints(*pred) : "NA"});
        }
        write_file_atomic(out / "orderings.tsv", tsv(rows));
        const json acc = accounting_json(records);
        write_json(out / "manifest.json",
                   {{"version", kRunSchemaVersion}, {"endpoint", ep.to_json()}, {"accounting", acc}});
        summary[name] = acc;
        if (acc.contains("order") && acc["order"]["transport_failure"].get<std::size_t>() > 0) partial = true;
        options_.clients.erase(name);
    }
    mark_complete(Stage::order, summary);
    return {Stage::order, partial ? StageStatus::partial : StageStatus::done, ""};
}

namespace {

struct ScoredEndpoint {
    ExtractionScorer scorer;
    std::vector<std::vector<std::string>> pair_rows;
    std::vector<std::vector<std::string>> slide_rows;
    std::vector<ParseObservation> parse_obs;
};

ScoredEndpoint score_endpoint(const RunConfig& cfg, const std::map<std::string, const Slide*>& truth,
                              const std::vector<RunRecord>& records) {
    ScoredEndpoint out{ExtractionScorer(cfg.match, cfg.metric), {}, {}, {}};
    out.pair_rows.push_back({"slide_id", "run", "kind", "gt", "pred", "cost", "one_minus_iou", "d_center", "r_size",
                             "r_ar", "r_rx", "r_len", "r_ang", "content_sim", "font_family_hit", "font_group_hit",
                             "font_size_abs_err", "bold_mismatch", "italic_mismatch", "underline_mismatch",
                             "text_color_de", "contrast_shift", "fill_de", "stroke_de", "stroke_width_abs_err"});
    out.slide_rows.push_back({"slide_id", "run", "status", "gt", "pred", "tp", "fp", "fn"});
    auto flag = [](const std::optional<bool>& b) { return b ? std::string(*b ? "1" : "0") : std::string("NA"); };
    for (const auto& rec : records) {
        if (rec.task != Task::extract) continue;
        auto it = truth.find(rec.slide_id);
        if (it == truth.end()) throw std::runtime_error("record for unknown slide " + rec.slide_id);
        const Slide& gt = *it->second;
        if (rec.status == RunStatus::transport_failure && cfg.exclude_transport_failures) continue;
        std::optional<Slide> pred;
        if (rec.status == RunStatus::ok) pred = parse_extraction_reply(rec.raw_response, rec.slide_id);
        out.parse_obs.push_back({complexity(gt), pred.has_value()});
        const auto pairs = out.scorer.add_run(gt, pred ? &*pred : nullptr, rec.run);
        const std::size_t n_gt = complexity(gt), n_pred = pred ? complexity(*pred) : 0;
        out.slide_rows.push_back({rec.slide_id, std::to_string(rec.run), std::string(to_string(rec.status)),
                                  std::to_string(n_gt), std::to_string(n_pred), std::to_string(pairs.size()),
                                  std::to_string(n_pred - pairs.size()), std::to_string(n_gt - pairs.size())});
        for (const auto& p : pairs) {
            out.pair_rows.push_back(
                {p.slide_id, std::to_string(p.run), std::string(to_string(p.kind)), std::to_string(p.gt),
                 std::to_string(p.pred), num(p.cost), num(p.geometry.one_minus_iou), num(p.geometry.d_center),
                 num(p.geometry.r_size), num(p.geometry.r_ar), num(p.geometry.r_rx), num(p.geometry.r_len),
                 num(p.geometry.r_ang), num(p.content_sim), flag(p.style.font_family_hit), flag(p.style.font_group_hit),
                 num(p.style.font_size_abs_err), flag(p.style.bold_mismatch), flag(p.style.italic_mismatch),
                 flag(p.style.underline_mismatch), num(p.style.text_color_de), num(p.style.contrast_shift),
                 num(p.style.fill_de), num(p.style.stroke_de), num(p.style.stroke_width_abs_err)});
        }
    }
    return out;
}

json prf_json(const PRF1& p) { return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}}; }

json mode_json(const ModeSummary& m) {
    json kinds = json::object();
    for (ElementKind k : kAllKinds) kinds[std::string(to_string(k))] = prf_json(m.by_kind[static_cast<std::size_t>(k)]);
    const auto& c = m.counts;
    return {{"matching", prf_json(m.matching)},
            {"by_kind", kinds},
            {"coverage", m.coverage},
            {"text_content", prf_json(m.text_content)},
            {"any_style", prf_json(m.any_style)},
            {"any_style_defined", m.any_style_defined},
            {"font_family_acc", m.font_family_acc},
            {"font_group_acc", m.font_group_acc},
            {"counts",
             {{"tp", c.overall.tp},
              {"fp", c.overall.fp},
              {"fn", c.overall.fn},
              {"gt_total", c.gt_total},
              {"gt_matched", c.gt_matched},
              {"gt_texts", c.gt_texts},
              {"pred_texts", c.pred_texts},
              {"text_pairs", c.text_pairs},
              {"style_denominator", c.style_denominator}}}};
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

}  // namespace

json to_json(const ExtractionSummary& s) {
    json scalars = json::object();
    for (const auto& [name, st] : s.scalars) {
        scalars[name] = {{"mean", st.mean}, {"sd", st.sd}, {"n", st.n}, {"ci", interval_json(st.ci)}};
    }
    return {{"runs", s.runs},
            {"parsed_runs", s.parsed_runs},
            {"parse_rate", s.runs ? static_cast<double>(s.parsed_runs) / static_cast<double>(s.runs) : 0.0},
            {"e2e", mode_json(s.e2e)},
            {"parsed_only", mode_json(s.parsed_only)},
            {"scalars", scalars}};
}

json io::summary_json(const ExtractionSummary& s) { return to_json(s); }

StageResult Pipeline::match() {
    const auto subjects = extraction_subjects(stage_dir(Stage::ingest), stage_dir(Stage::render),
                                              stage_dir(Stage::perturb), config_);
    std::map<std::string, const Slide*> truth;
    for (const auto& s : subjects) truth[s.id] = &s.truth;
    for (const auto& name : config_.extract_endpoints) {
        const auto records = read_records(stage_dir(Stage::extract) / name / "records.jsonl");
        const auto scored = score_endpoint(config_, truth, records);
        const fs::path out = stage_dir(Stage::match) / name;
        write_file_atomic(out / "pairs.tsv", tsv(scored.pair_rows));
        write_file_atomic(out / "slides.tsv", tsv(scored.slide_rows));
    }
    mark_complete(Stage::match);
    return {Stage::match, StageStatus::done, ""};
}

StageResult Pipeline::score() {
    const auto subjects = extraction_subjects(stage_dir(Stage::ingest), stage_dir(Stage::render),
                                              stage_dir(Stage::perturb), config_);
    std::map<std::string, const Slide*> truth;
    for (const auto& s : subjects) truth[s.id] = &s.truth;
    const auto bins = default_complexity_bins();
    for (const auto& name : config_.extract_endpoints) {
        const auto records = read_records(stage_dir(Stage::extract) / name / "records.jsonl");
        const auto scored = score_endpoint(config_, truth, records);
        const fs::path out = stage_dir(Stage::score) / name;
        write_json(out / "summary.json", summary_json(scored.scorer.summary(config_.bootstrap)));
        std::vector<std::vector<std::string>> rows = {{"bin_lo", "bin_hi", "n", "parsed", "rate", "ci_lo", "ci_hi"}};
        for (const auto& b : parseability_curve(scored.parse_obs, bins, config_.bootstrap)) {
            rows.push_back({num(b.bin.lo), std::isinf(b.bin.hi) ? "inf" : num(b.bin.hi), std::to_string(b.n),
                            std::to_string(b.parsed), num(b.rate), num(b.ci.lo), num(b.ci.hi)});
        }
        write_file_atomic(out / "parseability.tsv", tsv(rows));
    }
    mark_complete(Stage::score);
    return {Stage::score, StageStatus::done, ""};
}

// analyze() and report() live in report.cpp.

}  // namespace slideeval
