#include "etguard/deauth.hpp"

#include "etguard/error.hpp"
#include "etguard/store.hpp"

namespace etguard {

namespace {

std::uint64_t now_us()
{
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                          std::chrono::system_clock::now().time_since_epoch())
                                          .count());
}

} // namespace

void MemoryDeauthSink::emit(const DeauthFrame& frame, std::uint64_t)
{
    std::lock_guard lock(mutex_);
    if (capacity_ == 0) {
        ++dropped_;
        return;
    }
    if (frames_.size() == capacity_) {
        frames_.pop_front();
        ++dropped_;
    }
    frames_.push_back(frame);
}

std::vector<DeauthFrame> MemoryDeauthSink::drain()
{
    std::lock_guard lock(mutex_);
    std::vector<DeauthFrame> out(frames_.begin(), frames_.end());
    frames_.clear();
    return out;
}

std::size_t MemoryDeauthSink::size() const
{
    std::lock_guard lock(mutex_);
    return frames_.size();
}

std::size_t MemoryDeauthSink::dropped() const
{
    std::lock_guard lock(mutex_);
    return dropped_;
}

PcapDeauthSink::PcapDeauthSink(const std::filesystem::path& path, bool with_radiotap)
    : out_(path, std::ios::binary | std::ios::trunc), with_radiotap_(with_radiotap)
{
    if (!out_) {
        throw Error(Errc::Io, "cannot create deauth sink " + path.string());
    }
    write_pcap(out_, with_radiotap_ ? kLinkTypeRadiotap : kLinkTypeIeee80211, {});
    out_.flush();
}

void PcapDeauthSink::emit(const DeauthFrame& frame, std::uint64_t time_us)
{
    Bytes packet = with_radiotap_ ? encode_radiotap(make_radiotap(std::nullopt)) : Bytes{};
    const Bytes dot11 = encode_deauth(frame);
    packet.insert(packet.end(), dot11.begin(), dot11.end());

    Bytes rec;
    append_le32(rec, static_cast<std::uint32_t>(time_us / 1'000'000));
    append_le32(rec, static_cast<std::uint32_t>(time_us % 1'000'000));
    append_le32(rec, static_cast<std::uint32_t>(packet.size()));
    append_le32(rec, static_cast<std::uint32_t>(packet.size()));

    std::lock_guard lock(mutex_);
    out_.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    out_.write(reinterpret_cast<const char*>(packet.data()), static_cast<std::streamsize>(packet.size()));
    out_.flush();
}

DeauthScheduler::DeauthScheduler() : worker_([this] { run(); }) {}

DeauthScheduler::~DeauthScheduler()
{
    shutdown();
}

void DeauthScheduler::shutdown()
{
    {
        std::lock_guard lock(mutex_);
        if (stopping_) {
            return;
        }
        stopping_ = true;
        const std::int64_t now = system_clock_ms();
        for (auto& [_, entry] : entries_) {
            if (entry.state.active) {
                entry.state.active = false;
                entry.state.stopped_at_ms = now;
            }
        }
    }
    wake_.notify_all();
    if (worker_.joinable()) {
        worker_.join();
    }
}

DeauthCampaign DeauthScheduler::start_campaign(const MacAddress& bssid, std::uint16_t reason_code,
                                               std::chrono::milliseconds interval,
                                               std::shared_ptr<DeauthSink> sink)
{
    if (!sink) {
        throw Error(Errc::BadRequest, "deauth campaign needs a sink");
    }
    if (interval.count() <= 0) {
        throw Error(Errc::BadRequest, "deauth interval must be positive");
    }
    DeauthCampaign snapshot;
    {
        std::lock_guard lock(mutex_);
        if (stopping_) {
            throw Error(Errc::BadRequest, "scheduler is shut down");
        }
        auto it = entries_.find(bssid);
        if (it != entries_.end() && it->second.state.active) {
            throw Error(Errc::DuplicateCampaign, "a campaign is already active for " + bssid.to_string());
        }
        Entry entry;
        entry.state.target_bssid = bssid;
        entry.state.reason_code = reason_code;
        entry.state.interval = interval;
        entry.state.started_at_ms = system_clock_ms();
        entry.state.active = true;
        entry.sink = std::move(sink);
        entry.next_due = std::chrono::steady_clock::now();
        // A stopped campaign for the same BSSID is replaced, not resumed.
        entries_.insert_or_assign(bssid, std::move(entry));
        snapshot = entries_.at(bssid).state;
    }
    wake_.notify_all();
    return snapshot;
}

std::optional<DeauthCampaign> DeauthScheduler::stop_campaign(const MacAddress& bssid)
{
    std::lock_guard lock(mutex_);
    auto it = entries_.find(bssid);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    if (it->second.state.active) {
        it->second.state.active = false;
        it->second.state.stopped_at_ms = system_clock_ms();
    }
    return it->second.state;
}

std::optional<DeauthCampaign> DeauthScheduler::find(const MacAddress& bssid) const
{
    std::lock_guard lock(mutex_);
    auto it = entries_.find(bssid);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.state;
}

bool DeauthScheduler::is_active(const MacAddress& bssid) const
{
    auto c = find(bssid);
    return c && c->active;
}

std::vector<DeauthCampaign> DeauthScheduler::campaigns() const
{
    std::lock_guard lock(mutex_);
    std::vector<DeauthCampaign> out;
    for (const auto& [_, entry] : entries_) {
        out.push_back(entry.state);
    }
    return out;
}

void DeauthScheduler::emit_locked(Entry& entry)
{
    const auto frame =
        DeauthFrame::broadcast_for(entry.state.target_bssid, entry.state.reason_code, entry.next_sequence);
    entry.next_sequence = static_cast<std::uint16_t>((entry.next_sequence + 1) % kSequenceModulus);
    entry.sink->emit(frame, now_us());
    ++entry.state.emitted_count;
}

void DeauthScheduler::run()
{
    std::unique_lock lock(mutex_);
    while (!stopping_) {
        const auto now = std::chrono::steady_clock::now();
        std::optional<std::chrono::steady_clock::time_point> next_wake;
        for (auto& [_, entry] : entries_) {
            if (!entry.state.active) {
                continue;
            }
            if (entry.next_due <= now) {
                emit_locked(entry);
                entry.next_due += entry.state.interval;
                if (entry.next_due <= now) {
                    // Fell behind (e.g. a slow sink); skip missed ticks rather than bursting.
                    entry.next_due = now + entry.state.interval;
                }
            }
            if (!next_wake || entry.next_due < *next_wake) {
                next_wake = entry.next_due;
            }
        }
        if (next_wake) {
            wake_.wait_until(lock, *next_wake);
        } else {
            wake_.wait(lock);
        }
    }
}

} // namespace etguard
