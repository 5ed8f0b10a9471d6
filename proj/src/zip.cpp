#include "slideeval/zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <iterator>

namespace slideeval {

namespace {

constexpr std::uint32_t kEocd = 0x06054b50;
constexpr std::uint32_t kCentral = 0x02014b50;
constexpr std::uint32_t kLocal = 0x04034b50;
constexpr std::size_t kMaxEntrySize = std::size_t{1} << 30;

std::uint16_t le16(const std::string& d, std::size_t off) {
    if (off + 2 > d.size()) throw ZipError("truncated archive");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(d[off]) |
                                      static_cast<unsigned char>(d[off + 1]) << 8);
}

std::uint32_t le32(const std::string& d, std::size_t off) {
    return static_cast<std::uint32_t>(le16(d, off)) | static_cast<std::uint32_t>(le16(d, off + 2)) << 16;
}

void put16(std::string& out, std::uint16_t v) {
    out += static_cast<char>(v & 0xFF);
    out += static_cast<char>(v >> 8);
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), n);
        pos += n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::string inflate_raw(std::string_view in, std::size_t expected) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError("inflateInit failed");
    std::string out(expected, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected) throw ZipError("corrupt deflate stream");
    return out;
}

}  // namespace

ZipArchive ZipArchive::from_bytes(std::string bytes) {
    ZipArchive z;
    z.data_ = std::move(bytes);
    const std::string& d = z.data_;
    if (d.size() < 22) throw ZipError("too small to be a ZIP archive");
    std::size_t eocd = std::string::npos;
    const std::size_t floor = d.size() > 22 + 0xFFFF ? d.size() - 22 - 0xFFFF : 0;
    for (std::size_t i = d.size() - 22 + 1; i-- > floor;) {
        if (le32(d, i) == kEocd) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw ZipError("end of central directory not found");
    const std::uint16_t count = le16(d, eocd + 10);
    const std::uint32_t cd_offset = le32(d, eocd + 16);
    if (cd_offset == 0xFFFFFFFF || count == 0xFFFF) throw ZipError("ZIP64 archives are not supported");

    std::size_t p = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (le32(d, p) != kCentral) throw ZipError("bad central directory entry");
        Entry e;
        const std::uint16_t flags = le16(d, p + 8);
        e.method = le16(d, p + 10);
        e.crc = le32(d, p + 16);
        e.compressed = le32(d, p + 20);
        e.size = le32(d, p + 24);
        const std::uint16_t name_len = le16(d, p + 28), extra = le16(d, p + 30), comment = le16(d, p + 32);
        e.local_offset = le32(d, p + 42);
        if (p + 46 + name_len > d.size()) throw ZipError("truncated central directory");
        std::string name = d.substr(p + 46, name_len);
        if (flags & 1) throw ZipError("encrypted entry " + name);
        if (e.size > kMaxEntrySize) throw ZipError("entry too large: " + name);
        z.entries_.emplace(std::move(name), e);
        p += 46u + name_len + extra + comment;
    }
    return z;
}

ZipArchive ZipArchive::open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ZipError("cannot open " + path.string());
    return from_bytes(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

bool ZipArchive::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

std::vector<std::string> ZipArchive::names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : entries_) out.push_back(n);
    return out;
}

std::string ZipArchive::read(std::string_view name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ZipError("no such entry: " + std::string(name));
    const Entry& e = it->second;
    const std::size_t p = e.local_offset;
    if (le32(data_, p) != kLocal) throw ZipError("bad local header for " + std::string(name));
    const std::size_t start = p + 30u + le16(data_, p + 26) + le16(data_, p + 28);
    if (start > data_.size() || e.compressed > data_.size() - start) throw ZipError("entry data out of range");
    const std::string_view raw(data_.data() + start, e.compressed);
    std::string out;
    if (e.method == 0) {
        if (e.compressed != e.size) throw ZipError("stored entry size mismatch");
        out.assign(raw);
    } else if (e.method == 8) {
        out = inflate_raw(raw, e.size);
    } else {
        throw ZipError("unsupported compression method " + std::to_string(e.method));
    }
    if (crc_of(out) != e.crc) throw ZipError("CRC mismatch in " + std::string(name));
    return out;
}

std::string write_stored_zip(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out, central;
    for (const auto& [name, body] : entries) {
        const std::uint32_t crc = crc_of(body);
        const auto offset = static_cast<std::uint32_t>(out.size());
        put32(out, kLocal);
        put16(out, 20);
        put16(out, 0);
        put16(out, 0);
        put32(out, 0);  // fixed DOS time and date
        put32(out, crc);
        put32(out, static_cast<std::uint32_t>(body.size()));
        put32(out, static_cast<std::uint32_t>(body.size()));
        put16(out, static_cast<std::uint16_t>(name.size()));
        put16(out, 0);
        out += name;
        out += body;

        put32(central, kCentral);
        put16(central, 20);
        put16(central, 20);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, crc);
        put32(central, static_cast<std::uint32_t>(body.size()));
        put32(central, static_cast<std::uint32_t>(body.size()));
        put16(central, static_cast<std::uint16_t>(name.size()));
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, offset);
        central += name;
    }
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out += central;
    put32(out, kEocd);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

}  // namespace slideeval
