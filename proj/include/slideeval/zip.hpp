#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slideeval {

struct ZipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Read-only ZIP archive held in memory. Supports stored and deflated
/// entries; CRCs are verified on read.
class ZipArchive {
public:
    static ZipArchive from_bytes(std::string bytes);
    static ZipArchive open(const std::filesystem::path& path);

    bool contains(std::string_view name) const;
    std::string read(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    struct Entry {
        std::uint16_t method = 0;
        std::uint32_t crc = 0;
        std::size_t compressed = 0;
        std::size_t size = 0;
        std::size_t local_offset = 0;
    };
    std::string data_;
    std::map<std::string, Entry, std::less<>> entries_;
};

/// Writes an archive of stored (uncompressed) entries in the given order.
std::string write_stored_zip(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace slideeval
