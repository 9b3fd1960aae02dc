#pragma once

#include "etguard/bytes.hpp"
#include "etguard/frames.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace etguard {

inline constexpr std::uint32_t kLinkTypeIeee80211 = 105;
inline constexpr std::uint32_t kLinkTypeRadiotap = 127;

/// A raw packet as stored in a classic pcap file.
struct CaptureRecord {
    std::uint64_t time_us = 0;
    Bytes data;

    friend bool operator==(const CaptureRecord&, const CaptureRecord&) = default;
};

struct PcapContents {
    std::uint32_t link_type = kLinkTypeRadiotap;
    std::vector<CaptureRecord> records;
    std::vector<std::string> diagnostics; // e.g. a truncated trailing record
};

/// Accepts both byte orders and the microsecond/nanosecond magic variants.
PcapContents read_pcap(std::istream& in);
PcapContents read_pcap(const std::filesystem::path& path);

/// Writes little-endian microsecond pcap.
void write_pcap(std::ostream& out, std::uint32_t link_type, std::span<const CaptureRecord> records);
void write_pcap(const std::filesystem::path& path, std::uint32_t link_type, std::span<const CaptureRecord> records);
Bytes pcap_bytes(std::uint32_t link_type, std::span<const CaptureRecord> records);

struct CapturedBeacon {
    std::uint64_t capture_time_us = 0;
    BeaconFrame frame;

    friend bool operator==(const CapturedBeacon&, const CapturedBeacon&) = default;
};

struct CaptureReadResult {
    std::vector<CapturedBeacon> beacons;
    std::size_t packets = 0;
    std::size_t skipped_non_beacon = 0;
    std::size_t skipped_corrupt = 0;
    std::vector<std::string> diagnostics;
};

/// Decodes every radiotap packet; non-beacons and corrupt packets are skipped
/// and reported, never fatal. Throws BadMagic / UnsupportedLinkType / Io for
/// file-level problems.
CaptureReadResult read_capture(std::istream& in, const std::string& source_name = "<stream>");
CaptureReadResult read_capture(const std::filesystem::path& path);
CaptureReadResult read_capture_bytes(ByteView bytes, const std::string& source_name = "<memory>");

/// Per-packet timestamps come from the beacon TSF.
void write_capture(std::span<const BeaconFrame> frames, const std::filesystem::path& path);
/// Per-packet timestamps come from the supplied capture times.
void write_capture(std::span<const CapturedBeacon> frames, const std::filesystem::path& path);
std::vector<CaptureRecord> to_records(std::span<const CapturedBeacon> frames);

/// Stable merge of several captures by capture time (ties keep source order).
std::vector<CapturedBeacon> merge_by_time(std::vector<std::vector<CapturedBeacon>> sources);

} // namespace etguard
