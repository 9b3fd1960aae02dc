#pragma once

#include "etguard/fingerprint.hpp"
#include "etguard/frames.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace etguard {

struct FingerprintRecord {
    Fingerprint fingerprint;
    int max_ssi_dbm = 0; // running maximum of observed signal
    std::string label;
    std::int64_t enrolled_at_ms = 0;
    std::int64_t updated_at_ms = 0;

    const MacAddress& bssid() const noexcept { return fingerprint.bssid; }

    friend bool operator==(const FingerprintRecord&, const FingerprintRecord&) = default;
};

/// Immutable view of the database taken at one instant. Records are sorted by
/// BSSID.
class StoreSnapshot {
public:
    StoreSnapshot() = default;
    explicit StoreSnapshot(std::vector<FingerprintRecord> records);

    const std::vector<FingerprintRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    const FingerprintRecord* find(const MacAddress& bssid) const;
    /// Field-wise equality over all eleven fields.
    const FingerprintRecord* lookup_exact(const Fingerprint& fp) const;
    /// Byte-exact, case-sensitive SSID match (NULL matches NULL).
    std::vector<const FingerprintRecord*> lookup_by_ssid(const std::optional<Bytes>& ssid) const;

    friend bool operator==(const StoreSnapshot&, const StoreSnapshot&) = default;

private:
    std::vector<FingerprintRecord> records_;
};

using ClockMs = std::function<std::int64_t()>;

std::int64_t system_clock_ms();

/// The database of genuine access points, keyed by BSSID with a secondary SSID
/// index. Readers take snapshots under a shared lock; enroll / update / reset
/// take the exclusive lock.
class FingerprintStore {
public:
    explicit FingerprintStore(ClockMs clock = system_clock_ms);

    FingerprintStore(const FingerprintStore&) = delete;
    FingerprintStore& operator=(const FingerprintStore&) = delete;

    /// Inserts or replaces the record for the BSSID. Re-enrolling an identical
    /// record leaves it (and its timestamps) untouched.
    FingerprintRecord enroll(const BeaconFrame& frame, int observed_ssi_dbm, std::string label);
    FingerprintRecord enroll(const Fingerprint& fp, int observed_ssi_dbm, std::string label);

    /// Raises the stored maximum when `observed_ssi_dbm` exceeds it. Callers
    /// only feed observations from frames classified Legitimate.
    void update_observation(const MacAddress& bssid, int observed_ssi_dbm);

    /// Administrative override of the stored maximum, e.g. after an AP moves.
    FingerprintRecord reset_ssi(const MacAddress& bssid, int new_max_ssi_dbm);

    bool remove(const MacAddress& bssid);

    std::optional<FingerprintRecord> find(const MacAddress& bssid) const;
    std::optional<FingerprintRecord> lookup_exact(const Fingerprint& fp) const;
    std::vector<FingerprintRecord> lookup_by_ssid(const std::optional<Bytes>& ssid) const;

    StoreSnapshot snapshot() const;
    std::size_t size() const;

    /// One record per line: label, BSSID, max SSI, enrolled/updated times and
    /// the hex of the canonical fingerprint, tab separated. '#' lines and
    /// blank lines are ignored on load.
    void persist(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);
    void save_to(std::ostream& out) const;
    void load_from(std::istream& in, const std::string& source_name = "<stream>");

private:
    void index_ssid_locked(const FingerprintRecord& record);
    void unindex_ssid_locked(const FingerprintRecord& record);

    ClockMs clock_;
    mutable std::shared_mutex mutex_;
    std::map<MacAddress, FingerprintRecord> records_;
    std::multimap<std::optional<Bytes>, MacAddress> by_ssid_;
};

} // namespace etguard
