#include "etguard/dedup.hpp"

namespace etguard {

bool SequenceDeduplicator::admit(const MacAddress& bssid, std::uint16_t sequence_number)
{
    const auto it = last_.find(bssid);
    if (it == last_.end()) {
        last_.emplace(bssid, sequence_number);
        return true;
    }
    const bool continues = sequence_number == (it->second + 1) % kSequenceModulus;
    it->second = sequence_number;
    if (continues) {
        ++suppressed_;
        return false;
    }
    return true;
}

std::vector<CapturedBeacon> dedup_stream(std::span<const CapturedBeacon> frames)
{
    SequenceDeduplicator dedup;
    std::vector<CapturedBeacon> out;
    for (const auto& f : frames) {
        if (dedup.admit(f.frame.bssid(), f.frame.mac.sequence_number)) {
            out.push_back(f);
        }
    }
    return out;
}

std::vector<BeaconFrame> dedup_stream(std::span<const BeaconFrame> frames)
{
    SequenceDeduplicator dedup;
    std::vector<BeaconFrame> out;
    for (const auto& f : frames) {
        if (dedup.admit(f.bssid(), f.mac.sequence_number)) {
            out.push_back(f);
        }
    }
    return out;
}

} // namespace etguard
