#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace etguard {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);

/// Accepts upper/lower case, optionally separated by ':' or whitespace.
Bytes from_hex(std::string_view text);

Bytes to_bytes(std::string_view text);

class MacAddress {
public:
    constexpr MacAddress() = default;
    constexpr explicit MacAddress(const std::array<std::uint8_t, 6>& octets) : octets_(octets) {}

    static MacAddress parse(std::string_view text);
    static MacAddress from_bytes(ByteView bytes);
    static constexpr MacAddress broadcast()
    {
        return MacAddress({0xff, 0xff, 0xff, 0xff, 0xff, 0xff});
    }

    const std::array<std::uint8_t, 6>& octets() const noexcept { return octets_; }
    std::string to_string() const;
    bool is_broadcast() const noexcept { return *this == broadcast(); }

    friend constexpr auto operator<=>(const MacAddress&, const MacAddress&) = default;

private:
    std::array<std::uint8_t, 6> octets_{};
};

// Little-endian helpers. Callers check bounds.
inline std::uint16_t load_le16(ByteView b, std::size_t off)
{
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline std::uint32_t load_le32(ByteView b, std::size_t off)
{
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint64_t load_le64(ByteView b, std::size_t off)
{
    return static_cast<std::uint64_t>(load_le32(b, off)) |
           (static_cast<std::uint64_t>(load_le32(b, off + 4)) << 32);
}

inline void append_le16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void append_le32(Bytes& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }
}

inline void append_le64(Bytes& out, std::uint64_t v)
{
    append_le32(out, static_cast<std::uint32_t>(v));
    append_le32(out, static_cast<std::uint32_t>(v >> 32));
}

} // namespace etguard
