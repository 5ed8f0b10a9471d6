#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace slideeval {

std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::span<const unsigned char> bytes);
inline std::string base64_encode(std::string_view bytes) {
    return base64_encode({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

/// Whitespace is ignored; nullopt on malformed input.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace slideeval
