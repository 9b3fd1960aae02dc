#pragma once

#include "etguard/pcap.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace etguard {

/// Suppresses beacons that continue an unbroken sequence-number chain.
///
/// Keyed per BSSID: a frame whose sequence number is exactly one past the
/// last number seen for its BSSID (mod 4096) is dropped and the tracker
/// advances; any other frame is emitted and resets the tracker. The first
/// frame of a BSSID is always emitted.
class SequenceDeduplicator {
public:
    /// True when the frame should be analysed.
    bool admit(const MacAddress& bssid, std::uint16_t sequence_number);

    std::size_t suppressed() const noexcept { return suppressed_; }
    void reset() { last_.clear(); suppressed_ = 0; }

private:
    std::map<MacAddress, std::uint16_t> last_;
    std::size_t suppressed_ = 0;
};

std::vector<CapturedBeacon> dedup_stream(std::span<const CapturedBeacon> frames);
std::vector<BeaconFrame> dedup_stream(std::span<const BeaconFrame> frames);

} // namespace etguard
