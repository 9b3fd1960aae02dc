#pragma once

#include "etguard/fingerprint.hpp"
#include "etguard/pcap.hpp"
#include "etguard/store.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace etguard {

/// One observed AP identity: a (BSSID, fingerprint) pair aggregated over the
/// frames that carried it.
struct Observation {
    Fingerprint fingerprint;
    std::optional<int> ssi_dbm; // maximum over aggregated frames with a signal field
    std::uint64_t first_seen_us = 0;
    std::uint64_t last_seen_us = 0;
    std::size_t frame_count = 0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

enum class VerdictKind { Legitimate, EvilTwin, Unregistered };

enum class VerdictReason {
    ExactMatch,
    SsiExceeded,
    FingerprintMismatchSameSsid,
    BssidForged,
    NoSsidMatch,
};

std::string_view to_string(VerdictKind kind) noexcept;
std::string_view to_string(VerdictReason reason) noexcept;
std::optional<VerdictKind> parse_verdict_kind(std::string_view text) noexcept;

/// Lower is more severe: EvilTwin, Unregistered, Legitimate.
int severity_rank(VerdictKind kind) noexcept;

struct Verdict {
    VerdictKind kind = VerdictKind::Unregistered;
    std::optional<FingerprintRecord> matched_record;
    VerdictReason reason = VerdictReason::NoSsidMatch;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct DetectorOptions {
    /// An exact fingerprint match is an evil twin when its signal exceeds the
    /// stored maximum by more than this.
    int ssi_margin_db = 0;
};

/// Classifies one observation. Precedence: an exact fingerprint match anywhere
/// in the store decides first (signal rule applies); otherwise any record with
/// the same SSID makes it an evil twin; otherwise it is unregistered.
Verdict classify(const Observation& obs, const StoreSnapshot& store, const DetectorOptions& options = {});

/// Groups frames by (BSSID, fingerprint). Frames whose fingerprint cannot be
/// built are skipped and reported in `diagnostics`. Order of the result is by
/// BSSID then canonical fingerprint bytes, independent of frame order.
std::vector<Observation> aggregate_observations(std::span<const CapturedBeacon> frames,
                                                std::vector<std::string>& diagnostics);

struct ClassifiedObservation {
    Observation observation;
    Verdict verdict;
};

struct CaptureAnalysis {
    std::vector<ClassifiedObservation> results;
    std::size_t frames_in = 0;
    std::size_t frames_analysed = 0; // after sequence dedup
    std::size_t fingerprint_computations = 0;
    std::vector<std::string> diagnostics;
};

/// dedup -> fingerprint -> aggregate -> classify.
CaptureAnalysis classify_capture(std::span<const CapturedBeacon> frames, const StoreSnapshot& store,
                                 const DetectorOptions& options = {});

/// Feeds the stored signal maximum from Legitimate verdicts only. Returns true
/// when an update was applied.
bool apply_observation_update(FingerprintStore& store, const Observation& obs, const Verdict& verdict);

} // namespace etguard
