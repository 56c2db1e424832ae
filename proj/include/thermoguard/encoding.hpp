#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thermoguard {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView data);
std::optional<Bytes> from_hex(std::string_view hex);

std::string base64_encode(ByteView data);
// Strict: rejects non-alphabet characters and bad padding.
std::optional<Bytes> base64_decode(std::string_view text);

void put_u16_be(Bytes& out, std::uint16_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
std::uint16_t get_u16_be(const std::uint8_t* p) noexcept;
std::uint32_t get_u32_be(const std::uint8_t* p) noexcept;
std::uint64_t get_u64_be(const std::uint8_t* p) noexcept;

} // namespace thermoguard
