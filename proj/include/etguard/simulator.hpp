#pragma once

#include "etguard/detector.hpp"
#include "etguard/fingerprint.hpp"
#include "etguard/pcap.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace etguard::sim {

enum class DeviceCategory { Hardware, Software, MobileHotspot };

enum class Placement { Colocation, Substitution, RemoteLocation };

std::string_view to_string(DeviceCategory category) noexcept;
std::string_view to_string(Placement placement) noexcept;
std::optional<Placement> parse_placement(std::string_view text) noexcept;

/// Beacon template of one AP model/software. `defaults` holds what the device
/// advertises out of the box (its own SSID and MAC included); only the fields
/// in `forgeable` can be changed by whoever configures it.
struct DeviceProfile {
    std::string name;
    std::string display_name;
    DeviceCategory category = DeviceCategory::Hardware;
    Fingerprint defaults;
    std::set<FingerprintField> forgeable;
};

/// The genuine "CSE" access point and the twelve evil-twin sources.
const std::vector<DeviceProfile>& builtin_profiles();
const DeviceProfile& find_profile(std::string_view name);
inline constexpr std::string_view kGenuineProfile = "cse-ap";

/// Relation of one beacon field between a twin and the genuine AP, as
/// observed on the test bench for each twin source.
enum class CellRelation {
    Same,            // equal without configuration
    ForgedSame,      // configured by the attacker to be equal
    Differs,         // present in both, different
    PresenceDiffers, // present on one side only
    BothAbsent,
};

enum class MatrixColumn {
    BeaconLength,
    Ssid,
    Bssid,
    BeaconInterval,
    CapabilityInfo,
    SupportedRates,
    TimLength,
    DtimPeriod,
    Country,
    Rsn,
    ExtendedRates,
    VendorSpecific,
};

inline constexpr std::size_t kMatrixColumns = 12;

std::string_view to_string(CellRelation relation) noexcept;
std::string_view to_string(MatrixColumn column) noexcept;
/// Fingerprint field behind a column; nullopt for BeaconLength.
std::optional<FingerprintField> column_field(MatrixColumn column) noexcept;

struct DeviceMatrixRow {
    std::string profile;
    std::array<CellRelation, kMatrixColumns> cells;
};

/// Field relations for each of the twelve twin sources against "CSE".
const std::vector<DeviceMatrixRow>& device_matrix();

enum class BssidPolicy { ProfileDefault, SameAsGenuine, LastDigitChanged };

struct EmitterSpec {
    std::string profile;
    int peak_ssi_dbm = -50;
    std::uint16_t channel_mhz = 2437;
    /// Copied from the genuine AP's resolved value (twin only).
    std::set<FingerprintField> forge_from_genuine;
    BssidPolicy bssid_policy = BssidPolicy::ProfileDefault;
    /// Explicit values in wire form (see field_value); nullopt removes the field.
    std::map<FingerprintField, std::optional<Bytes>> overrides;
};

struct Scenario {
    std::string name;
    std::string description;
    EmitterSpec genuine;
    std::optional<EmitterSpec> twin;
    Placement placement = Placement::Colocation;
    int jitter_db = 3;
    std::uint32_t duration_ms = 10'000;
    std::string genuine_label = "CSE";
};

/// Expected outcome for one (BSSID, fingerprint) identity in a capture.
struct GroundTruthLabel {
    MacAddress bssid;
    std::string fingerprint_id;
    VerdictKind expected = VerdictKind::Legitimate;
    std::string role; // "genuine", "twin" or "genuine+twin"
    bool documented_false_positive = false;

    friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

struct GeneratedCapture {
    std::vector<CapturedBeacon> frames; // capture-time order
    std::vector<GroundTruthLabel> labels;
    Fingerprint genuine;
    std::optional<Fingerprint> twin;
};

/// Throws InvalidScenario.
void validate(const Scenario& scenario);

Fingerprint resolve_genuine(const Scenario& scenario);
std::optional<Fingerprint> resolve_twin(const Scenario& scenario);

/// Capture seen by the sensor during the attack window. Deterministic in
/// `seed`; seeds change only signal jitter, phases, TSF and sequence starts.
GeneratedCapture generate(const Scenario& scenario, std::uint64_t seed);

/// Genuine-only capture for trusted enrollment. Its strongest frame carries
/// exactly the genuine peak signal.
GeneratedCapture generate_baseline(const Scenario& scenario, std::uint64_t seed);

/// 12 Colocation scenarios (one per twin source), the same-OEM cases, the
/// documented false positive, and a few extra placements.
const std::vector<Scenario>& scenario_matrix();
std::optional<Scenario> builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

Scenario load_scenario_file(const std::filesystem::path& path);
Scenario parse_scenario_json(std::string_view text);

std::string format_labels(const std::vector<GroundTruthLabel>& labels);
std::vector<GroundTruthLabel> parse_labels(std::string_view text);

/// Builds one beacon of an emitter; exposed for fixtures.
struct BeaconDynamics {
    std::uint64_t tsf_us = 0;
    std::uint16_t sequence_number = 0;
    std::uint8_t dtim_count = 0;
    std::uint8_t bitmap_seed = 0;
    std::optional<std::int8_t> signal_dbm;
    std::uint16_t channel_mhz = 2437;
};
BeaconFrame beacon_from_fingerprint(const Fingerprint& fp, const BeaconDynamics& dynamics);

} // namespace etguard::sim
