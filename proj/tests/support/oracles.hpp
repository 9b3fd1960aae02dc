#pragma once

#include "etguard/detector.hpp"
#include "etguard/fingerprint.hpp"
#include "etguard/simulator.hpp"
#include "etguard/store.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace etguard::testing {

// ---- radiotap -------------------------------------------------------------

/// Field offsets for bits 0..5 found by walking the header byte by byte with
/// an independent size/alignment table; nullopt for bits not present.
std::array<std::optional<std::size_t>, 6> radiotap_walk_offsets(std::uint32_t present);

/// Header bytes assembled by the walk, each field filled with a distinct
/// marker pattern so a mis-aligned read is detectable.
Bytes radiotap_walk_build(std::uint32_t present);

// ---- detection ------------------------------------------------------------

struct OracleVerdict {
    VerdictKind kind = VerdictKind::Unregistered;
    VerdictReason reason = VerdictReason::NoSsidMatch;
    std::optional<MacAddress> matched;
};

/// Direct walk of the per-record detection loop: every stored fingerprint
/// yields an outcome, then outcomes combine as exact match first, same SSID
/// second, unregistered last. Fingerprints compare by canonical bytes.
OracleVerdict detection_loop_walk(const Observation& obs, const std::vector<FingerprintRecord>& records, int margin_db);

// ---- device table ---------------------------------------------------------

/// One row of the device comparison table as printed: "Y" similar, "Y*" similar
/// (red), "N" not similar, "N*" not similar (red), "NA".
struct DeviceTableRow {
    std::string profile;
    std::array<const char*, 12> cells; // length, SSID, BSSID, BI, CI, rates, TIM len, DTIM, country, RSN, ESR, vendor
};

const std::vector<DeviceTableRow>& device_table();

/// Relation a printed cell demands.
sim::CellRelation expected_relation(std::string_view cell);

struct CellCheck {
    std::string profile;
    std::string column;
    std::string expected;
    std::string observed;
    bool ok = false;
};

/// Measures every cell from generated beacons of the profile's colocation
/// scenario: relation of the decoded twin beacon to the decoded genuine one,
/// and whether the attacker had to configure the field.
std::vector<CellCheck> check_device_table(std::uint64_t seed = 1);

} // namespace etguard::testing
