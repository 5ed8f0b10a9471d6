#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "slideeval/slide.hpp"

namespace slideeval {

enum class ViolationKind { syntax, missing, type, enum_value, format, range, shape, unknown_field };

std::string_view to_string(ViolationKind k);

/// A slide document failed schema validation. `path` locates the offending
/// field, e.g. "texts[0].align".
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, ViolationKind kind, const std::string& detail);

    const std::string& path() const { return path_; }
    ViolationKind kind() const { return kind_; }

private:
    std::string path_;
    ViolationKind kind_;
};

struct ValidationOptions {
    /// Reject fields the schema does not name.
    bool strict = true;
    /// Model outputs are asked for integer pixels; fractional values are
    /// rounded to the nearest integer instead of rejected.
    bool round_geometry = false;
};

/// Validates a parsed slide document. All-or-nothing: the first violation
/// fails the whole slide.
Slide validate_slide(const nlohmann::json& doc, const ValidationOptions& options = {});

/// Parses and validates. JSON syntax errors surface as ViolationKind::syntax.
Slide parse_slide(std::string_view text, const ValidationOptions& options = {});

nlohmann::json to_json(const Slide& slide);
/// Canonical interchange text: stable key order, two-space indent, trailing newline.
std::string serialize(const Slide& slide);

Slide roundtrip(const Slide& slide);

}  // namespace slideeval
