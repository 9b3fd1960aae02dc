#pragma once

#include "etguard/bytes.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace etguard {

/// Present-flag bits understood by the codec. Fields are laid out in bit
/// order, each aligned to its natural size relative to the header start.
enum class RadiotapBit : unsigned {
    Tsft = 0,
    Flags = 1,
    Rate = 2,
    Channel = 3,
    Fhss = 4,
    DbmAntennaSignal = 5,
    Extension = 31,
};

inline constexpr std::size_t kRadiotapPreamble = 8;
inline constexpr std::uint8_t kRadiotapFlagFcs = 0x10;

struct RadiotapChannel {
    std::uint16_t frequency_mhz = 0;
    std::uint16_t flags = 0;
    friend bool operator==(const RadiotapChannel&, const RadiotapChannel&) = default;
};

struct RadiotapFhss {
    std::uint8_t hop_set = 0;
    std::uint8_t hop_pattern = 0;
    friend bool operator==(const RadiotapFhss&, const RadiotapFhss&) = default;
};

struct RadiotapInfo {
    std::uint16_t header_length = kRadiotapPreamble;
    std::vector<std::uint32_t> present_words{0};
    std::optional<std::uint64_t> tsft;
    std::optional<std::uint8_t> flags;
    std::optional<std::uint8_t> rate;
    std::optional<RadiotapChannel> channel;
    std::optional<RadiotapFhss> fhss;
    std::optional<std::int8_t> signal_dbm;

    bool has_fcs() const noexcept { return flags && (*flags & kRadiotapFlagFcs); }

    friend bool operator==(const RadiotapInfo&, const RadiotapInfo&) = default;
};

/// Builds a header whose present word and length agree with the optional
/// fields that are set. This is the form `encode_radiotap` emits.
RadiotapInfo make_radiotap(std::optional<std::int8_t> signal_dbm,
                           std::optional<RadiotapChannel> channel = std::nullopt,
                           std::optional<std::uint8_t> rate = std::nullopt,
                           std::optional<std::uint64_t> tsft = std::nullopt,
                           std::optional<std::uint8_t> flags = std::nullopt,
                           std::optional<RadiotapFhss> fhss = std::nullopt);

/// Offset of the field for `bit` given the first present word, or nullopt if
/// the bit is not set or a lower set bit has a size the codec does not know.
/// `fields_start` is where the field area begins (after all present words;
/// the 8-byte preamble already holds the first one).
std::optional<std::size_t> radiotap_field_offset(std::uint32_t present, unsigned bit,
                                                 std::size_t fields_start = kRadiotapPreamble);

/// Returns the parsed header and the offset of the 802.11 frame behind it.
std::pair<RadiotapInfo, std::size_t> decode_radiotap(ByteView bytes);

Bytes encode_radiotap(const RadiotapInfo& info);

} // namespace etguard
