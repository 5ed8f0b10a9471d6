#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slideeval/gateway.hpp"
#include "slideeval/metrics.hpp"

namespace slideeval::io {

std::string file_stem(std::string_view id);
std::string num(double v);
std::string num(const std::optional<double>& v);
std::string tsv(const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
std::vector<RunRecord> read_records(const std::filesystem::path& path);
/// records.jsonl without timings, plus latency.tsv.
void write_records(const std::filesystem::path& dir, const std::vector<RunRecord>& records);
nlohmann::json accounting_json(const std::vector<RunRecord>& records);
nlohmann::json summary_json(const ExtractionSummary& s);

}  // namespace slideeval::io
