#pragma once

#include "etguard/deauth.hpp"
#include "etguard/detector.hpp"
#include "etguard/store.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace etguard {

/// Sources naming an in-memory capture start with this prefix; anything else
/// is a pcap path.
inline constexpr std::string_view kLiveSourcePrefix = "live:";

struct ScanOptions {
    int ssi_margin_db = 0;
    bool auto_deauth = false;
    /// Longest wait for a live source that is still open.
    std::chrono::milliseconds live_window{1000};
};

struct ScanRequest {
    std::string request_id;
    std::vector<std::string> sources;
    ScanOptions options;
};

struct ApReport {
    std::optional<Bytes> ssid;
    MacAddress bssid;
    std::optional<int> ssi_dbm;
    VerdictKind verdict = VerdictKind::Unregistered;
    VerdictReason reason = VerdictReason::NoSsidMatch;
    std::optional<std::string> matched_label;
    std::string fingerprint_id;
    std::size_t frames = 0;

    friend bool operator==(const ApReport&, const ApReport&) = default;
};

struct ScanResponse {
    std::string request_id;
    std::vector<ApReport> aps; // severity, then SSID, BSSID, fingerprint id
    std::vector<std::string> diagnostics;
    std::vector<MacAddress> deauth_started;
    std::int64_t elapsed_ms = 0;

    bool evil_twin_found() const;

    friend bool operator==(const ScanResponse&, const ScanResponse&) = default;
};

/// Builds the sorted report list from a pipeline result.
std::vector<ApReport> build_reports(const CaptureAnalysis& analysis);

std::string to_json(const ScanResponse& response, int indent = -1);
ScanResponse scan_response_from_json(std::string_view text);
ScanRequest scan_request_from_json(std::string_view text);
std::string to_json(const ScanRequest& request);
std::string record_to_json(const FingerprintRecord& record, int indent = -1);
std::string campaign_to_json(const DeauthCampaign& campaign, int indent = -1);

/// Named capture fed in memory, e.g. by a sensor bridge or a test. A scan
/// reads everything published until the source closes or its window ends.
class LiveSource {
public:
    void publish(CapturedBeacon frame);
    void publish(std::vector<CapturedBeacon> frames);
    void close();
    bool closed() const;
    /// Frames published so far, after waiting up to `window` for close.
    std::vector<CapturedBeacon> collect(std::chrono::milliseconds window) const;

private:
    mutable std::mutex mutex_;
    mutable std::condition_variable closed_cv_;
    std::vector<CapturedBeacon> frames_;
    bool closed_ = false;
};

class LiveSourceRegistry {
public:
    std::shared_ptr<LiveSource> open(const std::string& name);
    std::shared_ptr<LiveSource> find(const std::string& name) const;
    void remove(const std::string& name);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<LiveSource>> sources_;
};

struct ScanServiceConfig {
    /// Feed max-SSI of Legitimate observations back into the store.
    bool update_store = true;
    std::uint16_t deauth_reason = DeauthScheduler::kDefaultReason;
    std::chrono::milliseconds deauth_interval = DeauthScheduler::kDefaultInterval;
    /// Persist the store here after every write; empty keeps it in memory.
    std::filesystem::path store_path;
};

/// Scan orchestration shared by the HTTP server and the command line.
class ScanService {
public:
    using AuditLog = std::function<void(const std::string&)>;

    ScanService(FingerprintStore& store, ScanServiceConfig config, std::shared_ptr<DeauthScheduler> scheduler = nullptr,
                std::shared_ptr<DeauthSink> sink = nullptr, AuditLog audit = nullptr);

    /// read -> merge by time -> classify -> update -> deauth -> report.
    /// Throws Error(Io) when every source failed to read.
    ScanResponse handle_scan(const ScanRequest& request);

    struct EnrollResult {
        std::vector<FingerprintRecord> records;
        std::vector<std::string> diagnostics;
    };
    /// Enrolls every identity seen in a trusted capture at its strongest signal.
    EnrollResult enroll_capture(const CaptureReadResult& capture, const std::string& label);
    FingerprintRecord reset_ssi(const MacAddress& bssid, int max_ssi_dbm);
    std::optional<DeauthCampaign> stop_deauth(const MacAddress& bssid);

    std::vector<FingerprintRecord> fingerprints() const;
    std::vector<DeauthCampaign> campaigns() const;

    LiveSourceRegistry& live_sources() noexcept { return live_; }
    FingerprintStore& store() noexcept { return store_; }
    const std::shared_ptr<DeauthScheduler>& scheduler() const noexcept { return scheduler_; }

private:
    void persist_locked();
    void audit(const std::string& line) const;

    FingerprintStore& store_;
    ScanServiceConfig config_;
    std::shared_ptr<DeauthScheduler> scheduler_;
    std::shared_ptr<DeauthSink> sink_;
    AuditLog audit_;
    LiveSourceRegistry live_;
    std::mutex writer_; // serializes store writes and persistence
    std::atomic<std::uint64_t> next_request_{1};
};

} // namespace etguard
