#pragma once

#include "etguard/bytes.hpp"
#include "etguard/radiotap.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace etguard {

/// Information element identifiers used for fingerprinting.
namespace ie {
inline constexpr std::uint8_t kSsid = 0;
inline constexpr std::uint8_t kSupportedRates = 1;
inline constexpr std::uint8_t kTim = 5;
inline constexpr std::uint8_t kCountry = 7;
inline constexpr std::uint8_t kRsn = 48;
inline constexpr std::uint8_t kExtendedRates = 50;
inline constexpr std::uint8_t kVendorSpecific = 221;
} // namespace ie

inline constexpr std::uint16_t kFrameControlBeacon = 0x0080;
inline constexpr std::uint16_t kFrameControlDeauth = 0x00c0;
inline constexpr std::size_t kMacHeaderLength = 24;
inline constexpr std::size_t kBeaconFixedLength = 12;
inline constexpr std::size_t kDeauthFrameLength = 26;
inline constexpr std::size_t kMaxSsidLength = 32;
inline constexpr std::uint16_t kSequenceModulus = 4096;

/// One time unit is 1024 microseconds.
inline constexpr double kMicrosecondsPerTu = 1024.0;

struct MacHeader {
    std::uint16_t frame_control = kFrameControlBeacon;
    std::uint16_t duration = 0;
    MacAddress addr1 = MacAddress::broadcast();
    MacAddress addr2;
    MacAddress addr3;
    std::uint16_t sequence_number = 0; // 12 bits
    std::uint8_t fragment_number = 0;  // 4 bits

    friend bool operator==(const MacHeader&, const MacHeader&) = default;
};

struct InformationElement {
    std::uint8_t element_id = 0;
    Bytes payload;

    friend bool operator==(const InformationElement&, const InformationElement&) = default;
};

struct BeaconFrame {
    RadiotapInfo radiotap;
    MacHeader mac;
    std::uint64_t timestamp = 0;       // TSF, microseconds
    std::uint16_t beacon_interval = 100; // TU
    std::uint16_t capability_info = 0;
    std::vector<InformationElement> elements; // wire order, duplicates kept

    const MacAddress& bssid() const noexcept { return mac.addr3; }
    double beacon_interval_ms() const noexcept { return beacon_interval * kMicrosecondsPerTu / 1000.0; }

    /// First element with the given id, if any.
    const InformationElement* find(std::uint8_t element_id) const noexcept;

    friend bool operator==(const BeaconFrame&, const BeaconFrame&) = default;
};

struct DeauthFrame {
    MacHeader mac{kFrameControlDeauth};
    std::uint16_t reason_code = 1;

    static DeauthFrame broadcast_for(const MacAddress& bssid, std::uint16_t reason_code, std::uint16_t sequence = 0);

    friend bool operator==(const DeauthFrame&, const DeauthFrame&) = default;
};

/// Decodes radiotap + 802.11 beacon. A trailing FCS announced by the radiotap
/// flags is verified and stripped.
BeaconFrame decode_beacon(ByteView bytes);

/// As above for a bare 802.11 frame with its radiotap header already parsed.
BeaconFrame decode_beacon_body(ByteView dot11, RadiotapInfo radiotap);

Bytes encode_beacon(const BeaconFrame& frame);

MacHeader decode_mac_header(ByteView dot11);
void encode_mac_header(const MacHeader& mac, Bytes& out);

Bytes encode_information_element(const InformationElement& element);

/// Parses a tagged-parameter area; throws MalformedIE on overrun.
std::vector<InformationElement> decode_information_elements(ByteView body);

/// Bare 26-byte management frame (no radiotap).
Bytes encode_deauth(const DeauthFrame& frame);
DeauthFrame decode_deauth(ByteView dot11);

std::uint32_t crc32_ieee(ByteView bytes);

} // namespace etguard
