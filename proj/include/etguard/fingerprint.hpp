#pragma once

#include "etguard/bytes.hpp"
#include "etguard/frames.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace etguard {

/// The eleven fingerprinted beacon fields, in canonical concatenation order.
enum class FingerprintField : std::uint8_t {
    Ssid = 0,
    Bssid,
    BeaconInterval,
    CapabilityInfo,
    SupportedRates,
    DtimPeriod,
    TimLength,
    Country,
    ExtendedRates,
    Rsn,
    VendorSpecific,
};

inline constexpr std::size_t kFingerprintFieldCount = 11;

inline constexpr std::array<FingerprintField, kFingerprintFieldCount> kAllFingerprintFields{
    FingerprintField::Ssid,          FingerprintField::Bssid,         FingerprintField::BeaconInterval,
    FingerprintField::CapabilityInfo, FingerprintField::SupportedRates, FingerprintField::DtimPeriod,
    FingerprintField::TimLength,     FingerprintField::Country,       FingerprintField::ExtendedRates,
    FingerprintField::Rsn,           FingerprintField::VendorSpecific,
};

std::string_view to_string(FingerprintField field) noexcept;
std::optional<FingerprintField> parse_fingerprint_field(std::string_view name) noexcept;

/// Identity of an access point as advertised in its beacons. Optional fields
/// hold std::nullopt when the element is absent (the NULL sentinel); a present
/// but empty element is an empty byte string.
struct Fingerprint {
    std::optional<Bytes> ssid;
    MacAddress bssid;
    std::uint16_t beacon_interval = 0;
    std::uint16_t capability_info = 0;
    std::optional<Bytes> supported_rates;
    std::optional<std::uint8_t> dtim_period;
    std::optional<std::uint8_t> tim_length;
    std::optional<Bytes> country;
    std::optional<Bytes> extended_rates;
    std::optional<Bytes> rsn;
    std::optional<Bytes> vendor_specific; // every vendor element, encoded, in wire order

    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// Value bytes of one field as they appear on the wire (fixed 16-bit fields
/// little-endian), or nullopt for NULL.
std::optional<Bytes> field_value(const Fingerprint& fp, FingerprintField field);

/// Inverse of field_value. Throws MalformedRecord on a width mismatch.
void set_field_value(Fingerprint& fp, FingerprintField field, const std::optional<Bytes>& value);

/// Per-field equality mask in canonical order.
std::array<bool, kFingerprintFieldCount> field_equality(const Fingerprint& a, const Fingerprint& b);
std::size_t equal_field_count(const Fingerprint& a, const Fingerprint& b);

/// Extracts the fingerprint of a decoded beacon. Throws MalformedTIM when a
/// TIM element is present but shorter than 3 bytes.
Fingerprint build_fingerprint(const BeaconFrame& frame);

/// Canonical byte form: per field, tag (field index, 0x80 when NULL),
/// 2-byte big-endian length, value bytes. Injective.
Bytes serialize(const Fingerprint& fp);
Fingerprint parse_fingerprint(ByteView bytes);

/// Short stable identifier (FNV-1a 64 of the serialization, 16 hex digits).
std::string fingerprint_id(const Fingerprint& fp);

/// Printable SSID: ASCII kept, other bytes as \xNN; "<null>" for NULL.
std::string display_ssid(const std::optional<Bytes>& ssid);

} // namespace etguard
