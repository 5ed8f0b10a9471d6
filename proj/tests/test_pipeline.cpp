#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "slideeval/pipeline.hpp"
#include "slideeval/slide_io.hpp"

using namespace slideeval;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("slideeval_pipeline_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

/// Two decks built from the fixture: "alpha" and "beta", three slides each.
fs::path corpus_dir(const fs::path& root) {
    const fs::path c = root / "corpus";
    fs::create_directories(c);
    fs::copy_file(fs::path(SLIDEEVAL_TEST_DATA) / "fixture.pptx", c / "alpha.pptx", fs::copy_options::overwrite_existing);
    fs::copy_file(fs::path(SLIDEEVAL_TEST_DATA) / "fixture.pptx", c / "beta.pptx", fs::copy_options::overwrite_existing);
    return c;
}

ModelEndpoint synthetic(const std::string& name, const std::string& model) {
    ModelEndpoint e;
    e.name = name;
    e.kind = "synthetic";
    e.model = model;
    return e;
}

RunConfig small_config(const fs::path& root) {
    RunConfig c;
    c.corpus = {corpus_dir(root)};
    c.output_root = root / "runs";
    c.run_id = "r1";
    c.workers = 2;
    c.render_scale = 0.25;
    c.render_mode = RenderMode::test;
    c.bootstrap.n_resamples = 50;
    c.severity_grid = {0.0, 0.5, 1.0};
    c.max_seed_slides = 1;
    c.extract_runs = 2;
    c.endpoints = {synthetic("oracle", "oracle"), synthetic("blank", "empty"), synthetic("flat", "constant"),
                   synthetic("ordered", "oracle"), synthetic("naive", "identity")};
    c.extract_endpoints = {"oracle", "blank"};
    c.judge_endpoints = {"oracle", "flat"};
    c.order_endpoints = {"ordered", "naive"};
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json summary_of(const Pipeline& p, const std::string& ep) {
    return json::parse(slurp(p.stage_dir(Stage::score) / ep / "summary.json"));
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    }
    return out;
}

}  // namespace

TEST_CASE("full hermetic run over two decks") {
    const fs::path root = fresh_dir("full");
    Pipeline p(small_config(root));
    const auto r = p.run(all_stages());
    for (const auto& s : r.stages) CHECK_MESSAGE(s.status == StageStatus::done, to_string(s.stage), ": ", s.message);
    CHECK(r.exit_code() == 0);
    CHECK(r.network_requests == 0);

    const json m = json::parse(slurp(p.stage_dir(Stage::ingest) / "manifest.json"));
    CHECK(m["decks"].size() == 2);
    CHECK(m["slides"].size() == 6);
    CHECK(fs::exists(p.stage_dir(Stage::render) / "images" / image_file_name("alpha#1")));

    const auto variants = PerturbationManifest::from_tsv(slurp(p.stage_dir(Stage::perturb) / "manifest.tsv"));
    CHECK(variants.rows.size() == 9);  // 1 seed x 3 axes x 3 severities

    const json oracle = summary_of(p, "oracle");
    CHECK(oracle["runs"] == 12);
    CHECK(oracle["e2e"]["matching"]["f1"].get<double>() == doctest::Approx(1.0));
    CHECK(oracle["e2e"]["text_content"]["f1"].get<double>() == doctest::Approx(1.0));
    CHECK(oracle["e2e"]["font_family_acc"].get<double>() == doctest::Approx(1.0));
    const json blank = summary_of(p, "blank");
    CHECK(blank["e2e"]["matching"]["f1"].get<double>() == 0.0);
    CHECK(blank["parse_rate"].get<double>() == 1.0);

    const std::string report = slurp(p.stage_dir(Stage::report) / "report.md");
    CHECK(report.find("| Matching F1 | 1.00 (1.00) | 0.00 (0.00) |") != std::string::npos);
    CHECK(fs::exists(p.stage_dir(Stage::report) / "sensitivity.svg"));
    CHECK(fs::exists(p.stage_dir(Stage::report) / "ordering.svg"));

    // oracle judge: y* equals severity exactly, so the curve is perfect
    const std::string sens = slurp(p.stage_dir(Stage::analyze) / "sensitivity.tsv");
    CHECK(sens.find("oracle\ttext\t1-5\ttext\t1\t3\t0\t1.000000\t1.000000\t0.000000\t1.000000") != std::string::npos);

    // oracle ordering recovers the deck order; identity shows the shuffle
    const std::string ord = slurp(p.stage_dir(Stage::analyze) / "ordering.tsv");
    CHECK(ord.find("ordered\t2\t2\t0\t1.000000\t1.000000") != std::string::npos);
}

TEST_CASE("rerun is a no-op and --force reproduces identical bytes") {
    const fs::path root = fresh_dir("idempotent");
    const RunConfig cfg = small_config(root);
    Pipeline(cfg).run(all_stages());
    const auto before = tree(root / "runs" / "r1");

    const auto again = Pipeline(cfg).run(all_stages());
    for (const auto& s : again.stages) CHECK(s.status == StageStatus::up_to_date);
    CHECK(again.exit_code() == 0);

    PipelineOptions force;
    force.force = true;
    const auto forced = Pipeline(cfg, force).run(all_stages());
    for (const auto& s : forced.stages) CHECK(s.status == StageStatus::done);
    auto after = tree(root / "runs" / "r1");
    for (auto* t : {&after}) {
        for (auto it = t->begin(); it != t->end();) it = it->first.ends_with("latency.tsv") ? t->erase(it) : std::next(it);
    }
    auto b = before;
    for (auto it = b.begin(); it != b.end();) it = it->first.ends_with("latency.tsv") ? b.erase(it) : std::next(it);
    CHECK(b == after);
}

TEST_CASE("deleting a downstream stage reproduces it exactly") {
    const fs::path root = fresh_dir("isolation");
    const RunConfig cfg = small_config(root);
    Pipeline p(cfg);
    p.run(all_stages());
    const auto score_before = tree(p.stage_dir(Stage::score));
    fs::remove_all(p.stage_dir(Stage::score));
    CHECK_FALSE(p.complete(Stage::score));
    const auto r = Pipeline(cfg).run({Stage::score});
    REQUIRE(r.stages.size() == 1);
    CHECK(r.stages[0].status == StageStatus::done);
    CHECK(tree(p.stage_dir(Stage::score)) == score_before);
}

TEST_CASE("a config change invalidates completed stages") {
    const fs::path root = fresh_dir("config_change");
    RunConfig cfg = small_config(root);
    Pipeline(cfg).run({Stage::ingest});
    cfg.strict_ingest = true;
    const auto r = Pipeline(cfg).run({Stage::ingest});
    CHECK(r.stages[0].status == StageStatus::done);
    RunConfig moved = cfg;
    moved.workers = 7;  // not part of the content hash
    CHECK(Pipeline(moved).run({Stage::ingest}).stages[0].status == StageStatus::up_to_date);
}

TEST_CASE("a failed stage blocks only its dependents") {
    const fs::path root = fresh_dir("failure");
    RunConfig cfg = small_config(root);
    Pipeline(cfg).run({Stage::ingest, Stage::render, Stage::perturb});

    // a replay file with no matching keys: every extraction is a transport failure
    ModelEndpoint replay;
    replay.name = "canned";
    replay.kind = "replay";
    replay.base_url = (root / "empty.jsonl").string();
    std::ofstream(root / "empty.jsonl") << "";
    cfg.endpoints.push_back(replay);
    cfg.extract_endpoints = {"canned"};
    const auto r = Pipeline(cfg).run({Stage::extract, Stage::judge, Stage::match});
    REQUIRE(r.stages.size() == 3);
    CHECK(r.stages[0].status == StageStatus::partial);
    CHECK(r.stages[1].status == StageStatus::done);
    CHECK(r.stages[2].status == StageStatus::done);
    CHECK(r.exit_code() == 1);

    RunConfig broken = small_config(root);
    broken.run_id = "r2";
    broken.corpus = {root / "missing"};
    const auto b = Pipeline(broken).run(all_stages());
    CHECK(b.stages[0].status == StageStatus::failed);
    for (std::size_t i = 1; i < b.stages.size(); ++i) CHECK(b.stages[i].status == StageStatus::blocked);
    CHECK(b.exit_code() == 3);
}

TEST_CASE("report without upstream outputs is blocked") {
    const fs::path root = fresh_dir("missing_stage");
    const auto r = Pipeline(small_config(root)).run({Stage::report});
    REQUIRE(r.stages.size() == 1);
    CHECK(r.stages[0].status == StageStatus::blocked);
    CHECK(r.exit_code() == 2);
}

TEST_CASE("parse failures separate end-to-end from parsed-only") {
    const fs::path root = fresh_dir("parse_failures");
    RunConfig cfg = small_config(root);
    cfg.judge_endpoints.clear();
    cfg.order_endpoints.clear();
    Pipeline(cfg).run({Stage::ingest, Stage::render});

    // canned responses: the oracle for run 0, garbage for run 1
    std::string lines;
    for (const auto& e : fs::directory_iterator(root / "runs" / "r1" / "ingest" / "slides")) {
        Slide s = parse_slide(slurp(e.path()));
        const json m = json::parse(slurp(root / "runs" / "r1" / "ingest" / "manifest.json"));
        for (const auto& id : m["slides"]) {
            if (image_file_name(id.get<std::string>()) == e.path().stem().string() + ".png") s.slide_id = id;
        }
        Completion good{true, 200, to_json(s).dump(), ""};
        Completion bad{true, 200, "I cannot read this slide.", ""};
        lines += to_replay_line(extraction_key(s.slide_id, 0), good) + "\n";
        lines += to_replay_line(extraction_key(s.slide_id, 1), bad) + "\n";
    }
    std::ofstream(root / "canned.jsonl") << lines;
    ModelEndpoint replay;
    replay.name = "canned";
    replay.kind = "replay";
    replay.base_url = (root / "canned.jsonl").string();
    cfg.endpoints.push_back(replay);
    cfg.extract_endpoints = {"canned"};
    const auto r = Pipeline(cfg).run({Stage::extract, Stage::match, Stage::score});
    CHECK(r.exit_code() == 0);
    const json s = json::parse(slurp(root / "runs" / "r1" / "score" / "canned" / "summary.json"));
    CHECK(s["parse_rate"].get<double>() == doctest::Approx(0.5));
    CHECK(s["parsed_only"]["matching"]["f1"].get<double>() == doctest::Approx(1.0));
    CHECK(s["e2e"]["matching"]["recall"].get<double>() == doctest::Approx(0.5));
    CHECK(s["e2e"]["matching"]["f1"].get<double>() < s["parsed_only"]["matching"]["f1"].get<double>());
}

TEST_CASE("offline runs refuse network endpoints") {
    const fs::path root = fresh_dir("offline");
    RunConfig cfg = small_config(root);
    ModelEndpoint net;
    net.name = "remote";
    net.kind = "openai";
    net.base_url = "https://api.invalid/v1";
    net.model = "m";
    net.api_key_env = "SLIDEEVAL_TEST_KEY";
    cfg.endpoints.push_back(net);
    cfg.extract_endpoints = {"remote"};
    cfg.offline = true;
    const auto r = Pipeline(cfg).run({Stage::ingest, Stage::render, Stage::extract});
    CHECK(r.stages[2].status == StageStatus::failed);
    CHECK(r.network_requests == 0);
}

TEST_CASE("config round-trips and never stores credentials") {
    const fs::path root = fresh_dir("config");
    RunConfig cfg = small_config(root);
    ModelEndpoint net;
    net.name = "remote";
    net.kind = "openai";
    net.base_url = "https://api.invalid/v1";
    net.model = "m";
    net.api_key_env = "SLIDEEVAL_TEST_KEY";
    cfg.endpoints.push_back(net);
    ::setenv("SLIDEEVAL_TEST_KEY", "sk-secret-value", 1);
    const std::string text = cfg.to_json().dump();
    CHECK(text.find("sk-secret-value") == std::string::npos);
    CHECK(text.find("SLIDEEVAL_TEST_KEY") != std::string::npos);
    const RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.content_hash() == cfg.content_hash());

    RunConfig other = cfg;
    other.run_id = "elsewhere";
    CHECK(other.content_hash() == cfg.content_hash());
    other.extract_runs = 5;
    CHECK(other.content_hash() != cfg.content_hash());

    json bad = cfg.to_json();
    bad["typo"] = 1;
    CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
    RunConfig dangling = cfg;
    dangling.judge_endpoints = {"nobody"};
    CHECK_THROWS_AS(dangling.validate(), ConfigError);
}
