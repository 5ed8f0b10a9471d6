#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slideeval/rng.hpp"
#include "slideeval/slide.hpp"

namespace slideeval {

enum class Axis { geometry, text, style };

inline constexpr Axis kAllAxes[] = {Axis::geometry, Axis::text, Axis::style};

std::string_view to_string(Axis a);
std::optional<Axis> parse_axis(std::string_view text);

struct PerturbationConfig {
    std::uint64_t base_seed = 0;
    bool allow_clipping = false;
    bool preserve_numbers = true;
    int max_inserts = 3;
    double pi_geo = 1.0;
    double pi_txt = 1.0;
    double pi_sty = 1.0;
    std::vector<std::string> font_pool = {"Calibri",     "Arial",   "Times New Roman", "Georgia", "Courier New",
                                          "Verdana",     "Comic Sans MS", "Impact",    "Garamond", "Tahoma"};
    std::vector<std::string> palette = {"#FF0000", "#FFFF00", "#00FFFF", "#FF00FF", "#00FF00"};
    std::vector<std::string> filler = {"lorem ipsum", "TODO: revise", "Click to add text", "placeholder",
                                       "insert caption here"};

    void validate() const;
};

/// FNV-1a over (base_seed LE, slide_id, 0, axis, 0, round(severity * 1e6) LE),
/// finished with splitmix64.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view slide_id, Axis axis, double severity);

/// Closed-form schedules, each non-decreasing in s.
namespace schedule {
double sigma_translate(double s);  // fraction of W (x) and H (y)
double sigma_log_scale(double s);
double p_extreme(double s);
double p_reposition(double s);
double p_collapse(double s);
double p_char(double s);
double p_drop(double s);
double p_insert(double s);
int max_insert_count(double s, int max_inserts);
double insert_w_hi(double s);      // upper bound of w/W
double insert_h_hi(double s);      // upper bound of h/H
double insert_font_size(double s);
double p_insert_emphasis(double s);
double p_family(double s);
double sigma_size(double s);
double p_size_extreme(double s);
double p_toggle(double s);
double p_inject(double s);
double hue_jitter(double s);       // degrees, half width
double lightness_jitter(double s);
double saturation_jitter(double s);
double p_low_contrast(double s);
double alpha_low_contrast(double s);
double p_background(double s);

struct Entry {
    const char* name;
    double (*fn)(double);
};
/// Every scalar schedule above, for monotonicity checks.
std::vector<Entry> all();
}  // namespace schedule

inline constexpr double kNoOpSeverity = 1e-12;

struct TextEdit {
    enum class Op { substitute, remove, insert, swap };
    std::size_t pos = 0;  // code point index in the original string
    Op op = Op::substitute;
    char32_t ch = 0;      // replacement or inserted character

    friend bool operator==(const TextEdit&, const TextEdit&) = default;
};

/// One applied operation with every value it drew.
struct PerturbationEvent {
    std::string op;
    ElementKind kind = ElementKind::text;
    std::size_t index = 0;               // element index within its family in the input slide
    std::map<std::string, double> params;
    std::string value;                   // font name, color, or inserted text
    std::vector<TextEdit> edits;         // char_noise only

    friend bool operator==(const PerturbationEvent&, const PerturbationEvent&) = default;
};

struct PerturbationRecord {
    std::string slide_id;
    Axis axis = Axis::geometry;
    double severity = 0.0;
    std::uint64_t seed = 0;
    bool allow_clipping = false;
    bool preserve_numbers = true;
    std::vector<PerturbationEvent> events;

    friend bool operator==(const PerturbationRecord&, const PerturbationRecord&) = default;
};

nlohmann::json to_json(const PerturbationRecord& record);
PerturbationRecord record_from_json(const nlohmann::json& doc);

struct Perturbed {
    Slide slide;
    PerturbationRecord record;
};

Perturbed perturb_geometry(const Slide& slide, double s, CounterRng& rng, const PerturbationConfig& cfg = {});
Perturbed perturb_text(const Slide& slide, double s, CounterRng& rng, const PerturbationConfig& cfg = {});
Perturbed perturb_style(const Slide& slide, double s, CounterRng& rng, const PerturbationConfig& cfg = {});

/// Seeds an RNG with derive_seed and dispatches on the axis.
Perturbed perturb(const Slide& slide, Axis axis, double s, const PerturbationConfig& cfg = {});

/// Applies a record's events to the clean slide.
Slide replay(const Slide& clean, const PerturbationRecord& record);

/// Applies per-character edits over code points.
std::string apply_edits(std::string_view text, std::span<const TextEdit> edits);
/// Replaces the numeric runs of `noised` with those of `original`, in
/// order; runs the noise destroyed are appended.
std::string restore_numbers(std::string_view original, std::string_view noised);
std::vector<std::string> numeric_runs(std::string_view text);

/// QWERTY neighbors of a lowercase letter or digit; empty if none.
std::u32string_view keyboard_neighbors(char32_t c);

// ---- suite synthesis ----------------------------------------------------

struct SuiteOptions {
    std::filesystem::path out_dir;
    std::optional<std::size_t> cap_per_cell;  // seed slides per (axis, severity)
    unsigned workers = 1;
    /// Optional image writer, called with the variant and target path (without
    /// extension). Returns the written path, or nullopt on failure.
    std::function<std::optional<std::filesystem::path>(const Slide&, const std::filesystem::path&)> write_image;
};

struct VariantRow {
    std::string variant_id;
    std::string slide_id;
    Axis axis = Axis::geometry;
    double severity = 0.0;
    std::uint64_t seed = 0;
    std::string slide_path;   // relative to out_dir
    std::string image_path;   // empty when not rendered
    std::string record_path;
    std::string status = "ok";
};

struct PerturbationManifest {
    std::vector<VariantRow> rows;
    std::size_t failures = 0;

    std::string to_tsv() const;
    static PerturbationManifest from_tsv(std::string_view text);
};

std::vector<double> default_severity_grid();  // 0, 0.1, ..., 1.0

std::string variant_id(std::string_view slide_id, Axis axis, double severity);

/// One variant per (seed slide, axis, severity), written under out_dir as
/// slides/<variant>.json and records/<variant>.json, plus manifest.tsv.
/// With an empty out_dir nothing is written and only the manifest is built.
PerturbationManifest synthesize_suite(std::span<const Slide> seeds, std::span<const double> severities,
                                      std::span<const Axis> axes, const PerturbationConfig& cfg,
                                      const SuiteOptions& options);

}  // namespace slideeval
