#pragma once

#include "etguard/bytes.hpp"
#include "etguard/frames.hpp"
#include "etguard/pcap.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace etguard {

/// Destination for countermeasure frames. Implementations must be thread-safe.
class DeauthSink {
public:
    virtual ~DeauthSink() = default;
    virtual void emit(const DeauthFrame& frame, std::uint64_t time_us) = 0;
};

/// Bounded in-memory queue; the oldest frame is dropped when full.
class MemoryDeauthSink final : public DeauthSink {
public:
    explicit MemoryDeauthSink(std::size_t capacity = 4096) : capacity_(capacity) {}

    void emit(const DeauthFrame& frame, std::uint64_t time_us) override;

    std::vector<DeauthFrame> drain();
    std::size_t size() const;
    std::size_t dropped() const;

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::deque<DeauthFrame> frames_;
    std::size_t dropped_ = 0;
};

/// Appends frames to a pcap file, either bare 802.11 (link type 105) or behind
/// a minimal radiotap header (link type 127).
class PcapDeauthSink final : public DeauthSink {
public:
    explicit PcapDeauthSink(const std::filesystem::path& path, bool with_radiotap = false);

    void emit(const DeauthFrame& frame, std::uint64_t time_us) override;

private:
    std::mutex mutex_;
    std::ofstream out_;
    bool with_radiotap_;
};

struct DeauthCampaign {
    MacAddress target_bssid;
    std::uint16_t reason_code = 1;
    std::chrono::milliseconds interval{100};
    std::int64_t started_at_ms = 0;
    std::optional<std::int64_t> stopped_at_ms;
    std::uint64_t emitted_count = 0;
    bool active = false;
};

/// Runs every campaign on one timer thread. The first frame of a campaign is
/// emitted immediately, then one per interval until stopped.
class DeauthScheduler {
public:
    static constexpr std::uint16_t kDefaultReason = 1;
    static constexpr std::chrono::milliseconds kDefaultInterval{100};

    DeauthScheduler();
    ~DeauthScheduler();

    DeauthScheduler(const DeauthScheduler&) = delete;
    DeauthScheduler& operator=(const DeauthScheduler&) = delete;

    /// Throws DuplicateCampaign if one is already active for `bssid`.
    DeauthCampaign start_campaign(const MacAddress& bssid, std::uint16_t reason_code,
                                  std::chrono::milliseconds interval, std::shared_ptr<DeauthSink> sink);

    /// Idempotent; nullopt for a BSSID that never had a campaign.
    std::optional<DeauthCampaign> stop_campaign(const MacAddress& bssid);

    std::optional<DeauthCampaign> find(const MacAddress& bssid) const;
    bool is_active(const MacAddress& bssid) const;
    std::vector<DeauthCampaign> campaigns() const;

    void shutdown();

private:
    struct Entry {
        DeauthCampaign state;
        std::shared_ptr<DeauthSink> sink;
        std::chrono::steady_clock::time_point next_due;
        std::uint16_t next_sequence = 0;
    };

    void run();
    void emit_locked(Entry& entry);

    mutable std::mutex mutex_;
    std::condition_variable wake_;
    std::map<MacAddress, Entry> entries_;
    bool stopping_ = false;
    std::thread worker_;
};

} // namespace etguard
