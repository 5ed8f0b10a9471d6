#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slideeval/gateway.hpp"
#include "slideeval/matcher.hpp"
#include "slideeval/metrics.hpp"
#include "slideeval/perturb.hpp"
#include "slideeval/renderer.hpp"

namespace slideeval {

inline constexpr int kRunSchemaVersion = 1;

enum class Stage { ingest, render, perturb, extract, judge, order, match, score, analyze, report };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view text);
const std::vector<Stage>& all_stages();
/// Stages whose outputs this stage reads.
std::vector<Stage> dependencies(Stage s);

class MissingStage : public std::runtime_error {
public:
    MissingStage(Stage needed, Stage by)
        : std::runtime_error(std::string(to_string(by)) + " needs the " + std::string(to_string(needed)) +
                             " stage") {}
};

/// Everything a run depends on besides the corpus and canned responses.
struct RunConfig {
    std::vector<std::filesystem::path> corpus;  // .pptx files or directories of them
    std::filesystem::path output_root = "runs";
    std::string run_id = "run";
    unsigned workers = 4;
    bool offline = false;
    bool strict_ingest = false;

    double render_scale = 1.0;
    RenderMode render_mode = RenderMode::presentation;

    MatchConfig match;
    MetricConfig metric;
    BootstrapOptions bootstrap;

    PerturbationConfig perturbation;
    std::vector<double> severity_grid = default_severity_grid();
    std::vector<Axis> axes = {Axis::geometry, Axis::text, Axis::style};
    std::optional<std::size_t> max_seed_slides;  // first N ingested slides seed the suite
    std::optional<std::size_t> cap_per_cell;

    std::vector<ModelEndpoint> endpoints;
    std::vector<std::string> extract_endpoints;
    int extract_runs = 3;
    bool extract_variants = false;
    bool exclude_transport_failures = false;
    std::optional<std::size_t> extract_max_subjects;  // first N subjects only

    std::vector<std::string> judge_endpoints;
    std::vector<Scale> judge_scales = {kFivePoint, kHundredPoint};
    int judge_runs = 1;
    bool judge_all_dimensions = false;  // otherwise each variant is judged on its own axis

    std::vector<std::string> order_endpoints;
    std::uint64_t order_seed = 7;
    int order_runs = 1;

    nlohmann::json to_json() const;
    /// Relative corpus and output paths resolve against base_dir.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);
    void validate() const;

    const ModelEndpoint& endpoint(const std::string& name) const;
    /// Hash over the fields that determine stage outputs.
    std::string content_hash() const;
    /// Hash over the fields one stage reads; upstream changes reach it
    /// through the dependency digests recorded in stage.json.
    std::string stage_hash(Stage s) const;
};

enum class StageStatus { done, up_to_date, partial, blocked, failed };
std::string_view to_string(StageStatus s);

struct StageResult {
    Stage stage = Stage::ingest;
    StageStatus status = StageStatus::done;
    std::string message;
};

struct PipelineOptions {
    bool force = false;
    std::optional<unsigned> workers;
    /// Per-endpoint clients that replace the configured transport.
    std::map<std::string, std::shared_ptr<ChatClient>> clients;
    /// When set, every completion is appended to <dir>/<endpoint>.jsonl.
    std::optional<std::filesystem::path> record_dir;
    std::function<void(const std::string&)> log;
};

struct PipelineResult {
    std::vector<StageResult> stages;
    std::filesystem::path run_dir;
    std::size_t network_requests = 0;

    /// 0 all done or up to date, 1 partial, 2 blocked, 3 failed.
    int exit_code() const;
};

class Pipeline {
public:
    Pipeline(RunConfig config, PipelineOptions options = {});

    const RunConfig& config() const { return config_; }
    std::filesystem::path run_dir() const;
    std::filesystem::path stage_dir(Stage s) const;

    /// Runs the requested stages in pipeline order. A failed stage blocks
    /// the stages that depend on it; independent stages still run.
    PipelineResult run(const std::vector<Stage>& stages);
    StageResult run_stage(Stage s);

    bool complete(Stage s) const;

private:
    struct State;

    StageResult ingest();
    StageResult render();
    StageResult perturb_stage();
    StageResult extract();
    StageResult judge();
    StageResult order();
    StageResult match();
    StageResult score();
    StageResult analyze();
    StageResult report();

    std::shared_ptr<ChatClient> client_for(const ModelEndpoint& ep);
    void mark_complete(Stage s, const nlohmann::json& extra = {}) const;
    void log(const std::string& msg) const;

    RunConfig config_;
    PipelineOptions options_;
    std::shared_ptr<State> state_;
    std::size_t network_requests_ = 0;
};

/// Synthetic predictors for hermetic runs. Extraction: "oracle", "empty",
/// "jittered-oracle" (optionally "jittered-oracle:<severity>"). Judging:
/// "oracle" (y* = s), "constant" (mid-scale). Ordering: "oracle",
/// "identity" (the shuffled order), "empty".
struct SyntheticWorld {
    std::map<std::string, Slide> slides;          // extraction subjects by id
    std::map<std::string, double> severities;     // judge subjects by id
    std::map<std::string, std::vector<int>> truth_labels;  // deck id -> labels in original order
};

std::shared_ptr<ChatClient> make_synthetic_client(const std::string& model, std::shared_ptr<const SyntheticWorld> world);

/// Prediction from the jittered-oracle predictor: geometry, text and style
/// perturbations applied to the ground truth at severity s.
Slide jittered_oracle(const Slide& truth, double s, std::uint64_t seed);

nlohmann::json to_json(const MatchConfig& c);
MatchConfig match_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PerturbationConfig& c);
PerturbationConfig perturbation_config_from_json(const nlohmann::json& j);

/// Both evaluation modes and the scalar statistics, as written to summary.json.
nlohmann::json to_json(const ExtractionSummary& s);

/// Writes a file only through a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace slideeval
