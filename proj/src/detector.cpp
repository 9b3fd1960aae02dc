#include "etguard/detector.hpp"

#include "etguard/dedup.hpp"
#include "etguard/error.hpp"

#include <algorithm>
#include <map>

namespace etguard {

std::string_view to_string(VerdictKind kind) noexcept
{
    switch (kind) {
    case VerdictKind::Legitimate: return "Legitimate";
    case VerdictKind::EvilTwin: return "EvilTwin";
    case VerdictKind::Unregistered: return "Unregistered";
    }
    return "Unknown";
}

std::string_view to_string(VerdictReason reason) noexcept
{
    switch (reason) {
    case VerdictReason::ExactMatch: return "ExactMatch";
    case VerdictReason::SsiExceeded: return "SsiExceeded";
    case VerdictReason::FingerprintMismatchSameSsid: return "FingerprintMismatchSameSsid";
    case VerdictReason::BssidForged: return "BssidForged";
    case VerdictReason::NoSsidMatch: return "NoSsidMatch";
    }
    return "Unknown";
}

std::optional<VerdictKind> parse_verdict_kind(std::string_view text) noexcept
{
    for (auto k : {VerdictKind::Legitimate, VerdictKind::EvilTwin, VerdictKind::Unregistered}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    return std::nullopt;
}

int severity_rank(VerdictKind kind) noexcept
{
    switch (kind) {
    case VerdictKind::EvilTwin: return 0;
    case VerdictKind::Unregistered: return 1;
    case VerdictKind::Legitimate: return 2;
    }
    return 3;
}

Verdict classify(const Observation& obs, const StoreSnapshot& store, const DetectorOptions& options)
{
    if (const auto* record = store.lookup_exact(obs.fingerprint)) {
        if (obs.ssi_dbm && *obs.ssi_dbm > record->max_ssi_dbm + options.ssi_margin_db) {
            return {VerdictKind::EvilTwin, *record, VerdictReason::SsiExceeded};
        }
        return {VerdictKind::Legitimate, *record, VerdictReason::ExactMatch};
    }

    const auto candidates = store.lookup_by_ssid(obs.fingerprint.ssid);
    if (candidates.empty()) {
        return {VerdictKind::Unregistered, std::nullopt, VerdictReason::NoSsidMatch};
    }

    // Attribute to the closest genuine record; candidates arrive in BSSID
    // order so the strict comparison keeps the lowest BSSID on ties.
    const FingerprintRecord* best = nullptr;
    std::size_t best_equal = 0;
    for (const auto* candidate : candidates) {
        const std::size_t equal = equal_field_count(candidate->fingerprint, obs.fingerprint);
        if (!best || equal > best_equal) {
            best = candidate;
            best_equal = equal;
        }
    }
    const auto eq = field_equality(best->fingerprint, obs.fingerprint);
    const bool only_bssid_differs =
        !eq[static_cast<std::size_t>(FingerprintField::Bssid)] && best_equal == kFingerprintFieldCount - 1;
    return {VerdictKind::EvilTwin, *best,
            only_bssid_differs ? VerdictReason::BssidForged : VerdictReason::FingerprintMismatchSameSsid};
}

std::vector<Observation> aggregate_observations(std::span<const CapturedBeacon> frames,
                                                std::vector<std::string>& diagnostics)
{
    std::map<std::pair<MacAddress, Bytes>, Observation> groups;
    for (const auto& captured : frames) {
        Fingerprint fp;
        try {
            fp = build_fingerprint(captured.frame);
        } catch (const Error& e) {
            diagnostics.push_back("beacon from " + captured.frame.bssid().to_string() + " at " +
                                  std::to_string(captured.capture_time_us) + "us skipped: " + e.what());
            continue;
        }
        auto key = std::make_pair(fp.bssid, serialize(fp));
        auto [it, inserted] = groups.try_emplace(std::move(key));
        Observation& obs = it->second;
        const auto signal = captured.frame.radiotap.signal_dbm;
        if (inserted) {
            obs.fingerprint = std::move(fp);
            obs.first_seen_us = captured.capture_time_us;
            obs.last_seen_us = captured.capture_time_us;
        }
        obs.first_seen_us = std::min(obs.first_seen_us, captured.capture_time_us);
        obs.last_seen_us = std::max(obs.last_seen_us, captured.capture_time_us);
        ++obs.frame_count;
        if (signal) {
            obs.ssi_dbm = obs.ssi_dbm ? std::max(*obs.ssi_dbm, static_cast<int>(*signal)) : *signal;
        }
    }
    std::vector<Observation> out;
    out.reserve(groups.size());
    for (auto& [_, obs] : groups) {
        out.push_back(std::move(obs));
    }
    return out;
}

CaptureAnalysis classify_capture(std::span<const CapturedBeacon> frames, const StoreSnapshot& store,
                                 const DetectorOptions& options)
{
    CaptureAnalysis analysis;
    analysis.frames_in = frames.size();
    const auto kept = dedup_stream(frames);
    analysis.frames_analysed = kept.size();
    analysis.fingerprint_computations = kept.size();
    for (auto& obs : aggregate_observations(kept, analysis.diagnostics)) {
        Verdict verdict = classify(obs, store, options);
        analysis.results.push_back({std::move(obs), std::move(verdict)});
    }
    return analysis;
}

bool apply_observation_update(FingerprintStore& store, const Observation& obs, const Verdict& verdict)
{
    if (verdict.kind != VerdictKind::Legitimate || !obs.ssi_dbm || !verdict.matched_record) {
        return false;
    }
    if (*obs.ssi_dbm <= verdict.matched_record->max_ssi_dbm) {
        return false;
    }
    try {
        store.update_observation(obs.fingerprint.bssid, *obs.ssi_dbm);
    } catch (const Error& e) {
        if (e.code() == Errc::UnknownBssid) {
            return false; // removed since the snapshot was taken
        }
        throw;
    }
    return true;
}

} // namespace etguard
