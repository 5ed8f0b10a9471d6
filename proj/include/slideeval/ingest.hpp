#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slideeval/slide.hpp"

namespace slideeval {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotAZip : IngestError {
    using IngestError::IngestError;
};
struct MissingPresentationPart : IngestError {
    using IngestError::IngestError;
};
struct UnsupportedLegacyFormat : IngestError {
    using IngestError::IngestError;
};
struct IndexOutOfRange : IngestError {
    using IngestError::IngestError;
};
struct MalformedXml : IngestError {
    using IngestError::IngestError;
};
struct ZeroExtent : IngestError {
    using IngestError::IngestError;
};

inline constexpr std::int64_t kEmuPerInch = 914400;

/// value * target_extent / native_extent.
double emu_to_px(double value, double native_extent, double target_extent);

/// Resolved theme for one slide: scheme slots after the colour map, and the
/// major/minor Latin typefaces.
struct ThemeContext {
    std::map<std::string, ColorHex> colors;         // dk1, lt1, accent1, ...
    std::map<std::string, std::string> color_map;  // tx1 -> dk1, bg1 -> lt1, ...
    std::string major_font = "Calibri Light";
    std::string minor_font = "Calibri";
    std::vector<std::string> chain;  // slide, layout, master, theme part names

    /// Resolves a scheme slot name, following the colour map; nullopt if unknown.
    std::optional<ColorHex> scheme(std::string_view slot) const;
};

struct IngestOptions {
    /// Skip charts, SmartArt and groups instead of flattening them to rects.
    bool strict = false;
};

struct ExtractedSlide {
    Slide slide;
    std::vector<std::string> warnings;
};

class Deck {
public:
    static Deck open(const std::filesystem::path& path);
    static Deck from_bytes(std::string bytes, std::string deck_id);

    Deck(Deck&&) noexcept;
    Deck& operator=(Deck&&) noexcept;
    ~Deck();

    const std::string& deck_id() const;
    const std::filesystem::path& path() const;
    std::size_t slide_count() const;
    std::int64_t emu_width() const;
    std::int64_t emu_height() const;
    std::string slide_part(std::size_t index) const;

    ThemeContext theme_for(std::size_t index) const;
    /// 1-based index.
    ExtractedSlide extract_slide(std::size_t index, const IngestOptions& options = {}) const;
    /// Raw bytes of a package part such as "ppt/media/image1.png".
    std::optional<std::string> read_part(std::string_view name) const;

private:
    struct Impl;
    explicit Deck(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

struct DeckManifestEntry {
    std::size_t index = 0;
    std::string slide_id;
    std::string status = "ok";  // ok | malformed_xml
    std::vector<std::string> warnings;
};

struct DeckManifest {
    std::string deck_id;
    std::string path;
    std::int64_t emu_width = 0;
    std::int64_t emu_height = 0;
    std::vector<DeckManifestEntry> slides;

    nlohmann::json to_json() const;
};

struct IngestResult {
    std::vector<Slide> slides;  // successfully extracted slides, in deck order
    DeckManifest manifest;
};

/// Opens a deck and extracts every slide; malformed slides are recorded in
/// the manifest and skipped.
IngestResult ingest_deck(const std::filesystem::path& path, const IngestOptions& options = {});

}  // namespace slideeval
