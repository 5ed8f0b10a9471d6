#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "slideeval/ingest.hpp"
#include "slideeval/pipeline.hpp"
#include "slideeval/renderer.hpp"
#include "slideeval/slide_io.hpp"

using namespace slideeval;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigErrorExit = 4;

struct Globals {
    std::string config;
    std::optional<std::string> run_id;
    std::optional<std::string> output_root;
    std::optional<unsigned> workers;
    bool force = false;
    bool offline = false;
    std::optional<std::string> record;
    bool quiet = false;
};

int run_stages(const Globals& g, const std::vector<Stage>& stages) {
    if (g.config.empty()) {
        std::cerr << "error: --config is required\n";
        return kConfigErrorExit;
    }
    RunConfig cfg;
    try {
        cfg = RunConfig::load(g.config);
        if (g.run_id) cfg.run_id = *g.run_id;
        if (g.output_root) cfg.output_root = *g.output_root;
        if (g.offline) cfg.offline = true;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigErrorExit;
    }
    PipelineOptions opts;
    opts.force = g.force;
    opts.workers = g.workers;
    if (g.record) opts.record_dir = fs::path(*g.record);
    if (!g.quiet) opts.log = [](const std::string& line) { std::cerr << line << "\n"; };
    try {
        Pipeline p(std::move(cfg), std::move(opts));
        const auto result = p.run(stages);
        std::cout << result.run_dir.string() << "\n";
        return result.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigErrorExit;
    }
}

int show_status(const Globals& g) {
    if (g.config.empty()) {
        std::cerr << "error: --config is required\n";
        return kConfigErrorExit;
    }
    try {
        RunConfig cfg = RunConfig::load(g.config);
        if (g.run_id) cfg.run_id = *g.run_id;
        if (g.output_root) cfg.output_root = *g.output_root;
        Pipeline p(cfg);
        for (Stage s : all_stages()) {
            std::cout << to_string(s) << "\t" << (p.complete(s) ? "complete" : "pending") << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigErrorExit;
    }
}

int validate_files(const std::vector<std::string>& files, bool lenient) {
    int bad = 0;
    ValidationOptions opts;
    opts.strict = !lenient;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
            parse_slide(ss.str(), opts);
            std::cout << f << "\tok\n";
        } catch (const ValidationError& e) {
            std::cout << f << "\t" << to_string(e.kind()) << "\t" << e.path() << "\t" << e.what() << "\n";
            ++bad;
        }
    }
    return bad ? 1 : 0;
}

int render_file(const std::string& in_path, const std::string& out_path, double scale, bool test_mode) {
    try {
        std::ifstream in(in_path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        RenderOptions opts;
        opts.scale = scale;
        opts.mode = test_mode ? RenderMode::test : RenderMode::presentation;
        write_file_atomic(out_path, encode_png(render_slide(parse_slide(ss.str()), opts)));
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int extract_file(const std::string& deck, const std::string& out_dir, bool strict) {
    try {
        IngestOptions opts;
        opts.strict = strict;
        const auto r = ingest_deck(deck, opts);
        for (const auto& s : r.slides) {
            std::string name = image_file_name(s.slide_id);
            name.replace(name.size() - 4, 4, ".json");
            write_file_atomic(fs::path(out_dir) / name, serialize(s));
        }
        std::cout << r.manifest.to_json().dump(2) << "\n";
        for (const auto& e : r.manifest.slides) {
            if (e.status != "ok") return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slide extraction and judge evaluation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Run configuration (JSON)");
    app.add_option("--run-id", g.run_id, "Override the configured run id");
    app.add_option("--output-root", g.output_root, "Override the configured output root");
    app.add_option("--workers", g.workers, "Worker cap within a stage")->check(CLI::PositiveNumber);
    app.add_flag("--force", g.force, "Rerun stages that are already complete");
    app.add_flag("--offline", g.offline, "Refuse any endpoint that needs the network");
    app.add_option("--record", g.record, "Append every completion to <dir>/<endpoint>.jsonl");
    app.add_flag("-q,--quiet", g.quiet, "Only print the run directory");

    int code = 0;
    for (Stage s : all_stages()) {
        auto* sub = app.add_subcommand(std::string(to_string(s)), "Run the " + std::string(to_string(s)) + " stage");
        sub->callback([&, s] { code = run_stages(g, {s}); });
    }

    std::vector<std::string> stage_names;
    auto* run = app.add_subcommand("run", "Run several stages in order (all by default)");
    run->add_option("--stages", stage_names, "Stage names")->delimiter(',');
    run->callback([&] {
        std::vector<Stage> stages;
        for (const auto& n : stage_names) {
            auto s = parse_stage(n);
            if (!s) throw CLI::ValidationError("--stages", "unknown stage '" + n + "'");
            stages.push_back(*s);
        }
        code = run_stages(g, stages.empty() ? all_stages() : stages);
    });

    app.add_subcommand("status", "Show which stages are complete")->callback([&] { code = show_status(g); });

    std::vector<std::string> files;
    bool lenient = false;
    auto* validate = app.add_subcommand("validate", "Validate slide documents");
    validate->add_option("files", files, "Slide JSON files")->required()->check(CLI::ExistingFile);
    validate->add_flag("--lenient", lenient, "Ignore unknown fields");
    validate->callback([&] { code = validate_files(files, lenient); });

    std::string in_path, out_path;
    double scale = 1.0;
    bool test_mode = false;
    auto* rs = app.add_subcommand("render-slide", "Render one slide document to PNG");
    rs->add_option("input", in_path, "Slide JSON")->required()->check(CLI::ExistingFile);
    rs->add_option("output", out_path, "PNG path")->required();
    rs->add_option("--scale", scale, "Output scale")->check(CLI::PositiveNumber);
    rs->add_flag("--test-mode", test_mode, "Single-sample rasterization");
    rs->callback([&] { code = render_file(in_path, out_path, scale, test_mode); });

    std::string deck, out_dir;
    bool strict = false;
    auto* ex = app.add_subcommand("extract-deck", "Convert one .pptx into slide documents");
    ex->add_option("deck", deck, "Presentation file")->required()->check(CLI::ExistingFile);
    ex->add_option("out_dir", out_dir, "Output directory")->required();
    ex->add_flag("--strict", strict, "Skip shapes that cannot be represented");
    ex->callback([&] { code = extract_file(deck, out_dir, strict); });

    CLI11_PARSE(app, argc, argv);
    return code;
}
