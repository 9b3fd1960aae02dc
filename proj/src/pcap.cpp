#include "etguard/pcap.hpp"

#include "etguard/error.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace etguard {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::size_t kGlobalHeaderLength = 24;
constexpr std::size_t kRecordHeaderLength = 16;
constexpr std::uint32_t kSnapLength = 65535;

std::uint32_t byteswap32(std::uint32_t v)
{
    return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

bool read_exact(std::istream& in, std::uint8_t* dst, std::size_t n, std::size_t& got)
{
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    got = static_cast<std::size_t>(in.gcount());
    return got == n;
}

} // namespace

PcapContents read_pcap(std::istream& in)
{
    std::uint8_t header[kGlobalHeaderLength];
    std::size_t got = 0;
    if (!read_exact(in, header, sizeof header, got)) {
        throw Error(Errc::BadMagic, "file shorter than the 24-byte pcap header");
    }
    const std::uint32_t raw_magic = load_le32(header, 0);
    bool swap = false;
    bool nanos = false;
    if (raw_magic == kMagicMicro || raw_magic == kMagicNano) {
        nanos = raw_magic == kMagicNano;
    } else if (byteswap32(raw_magic) == kMagicMicro || byteswap32(raw_magic) == kMagicNano) {
        swap = true;
        nanos = byteswap32(raw_magic) == kMagicNano;
    } else {
        std::ostringstream msg;
        msg << "unrecognised magic 0x" << std::hex << raw_magic;
        throw Error(Errc::BadMagic, msg.str());
    }
    auto field32 = [swap](const std::uint8_t* p) {
        const std::uint32_t v = load_le32(ByteView(p, 4), 0);
        return swap ? byteswap32(v) : v;
    };

    PcapContents contents;
    contents.link_type = field32(header + 20) & 0x0fffffff;

    std::size_t index = 0;
    while (true) {
        std::uint8_t rec[kRecordHeaderLength];
        if (!read_exact(in, rec, sizeof rec, got)) {
            if (got != 0) {
                contents.diagnostics.push_back("packet " + std::to_string(index) + ": truncated record header");
            }
            break;
        }
        const std::uint64_t seconds = field32(rec);
        const std::uint64_t fraction = field32(rec + 4);
        const std::uint32_t incl_len = field32(rec + 8);
        if (incl_len > (1u << 24)) {
            contents.diagnostics.push_back("packet " + std::to_string(index) + ": implausible length " +
                                           std::to_string(incl_len) + ", stopping");
            break;
        }
        CaptureRecord record;
        record.time_us = seconds * 1'000'000 + (nanos ? fraction / 1000 : fraction);
        record.data.resize(incl_len);
        if (!read_exact(in, record.data.data(), incl_len, got)) {
            contents.diagnostics.push_back("packet " + std::to_string(index) + ": truncated, " +
                                           std::to_string(got) + " of " + std::to_string(incl_len) + " bytes");
            break;
        }
        contents.records.push_back(std::move(record));
        ++index;
    }
    return contents;
}

PcapContents read_pcap(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path.string());
    }
    try {
        return read_pcap(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_pcap(std::ostream& out, std::uint32_t link_type, std::span<const CaptureRecord> records)
{
    Bytes header;
    append_le32(header, kMagicMicro);
    append_le16(header, 2);
    append_le16(header, 4);
    append_le32(header, 0); // thiszone
    append_le32(header, 0); // sigfigs
    append_le32(header, kSnapLength);
    append_le32(header, link_type);
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    for (const auto& record : records) {
        Bytes rec;
        append_le32(rec, static_cast<std::uint32_t>(record.time_us / 1'000'000));
        append_le32(rec, static_cast<std::uint32_t>(record.time_us % 1'000'000));
        append_le32(rec, static_cast<std::uint32_t>(record.data.size()));
        append_le32(rec, static_cast<std::uint32_t>(record.data.size()));
        out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
        out.write(reinterpret_cast<const char*>(record.data.data()), static_cast<std::streamsize>(record.data.size()));
    }
    if (!out) {
        throw Error(Errc::Io, "write failed");
    }
}

void write_pcap(const std::filesystem::path& path, std::uint32_t link_type, std::span<const CaptureRecord> records)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::Io, "cannot create " + path.string());
    }
    write_pcap(out, link_type, records);
}

Bytes pcap_bytes(std::uint32_t link_type, std::span<const CaptureRecord> records)
{
    std::ostringstream out(std::ios::binary);
    write_pcap(out, link_type, records);
    const std::string s = out.str();
    return Bytes(s.begin(), s.end());
}

namespace {

CaptureReadResult decode_contents(PcapContents contents, const std::string& source_name)
{
    if (contents.link_type != kLinkTypeRadiotap) {
        throw Error(Errc::UnsupportedLinkType,
                    source_name + ": link type " + std::to_string(contents.link_type) + " (expected 127, radiotap)");
    }
    CaptureReadResult result;
    result.packets = contents.records.size();
    for (auto& d : contents.diagnostics) {
        result.diagnostics.push_back(source_name + ": " + d);
    }
    for (std::size_t i = 0; i < contents.records.size(); ++i) {
        const auto& record = contents.records[i];
        try {
            result.beacons.push_back({record.time_us, decode_beacon(record.data)});
        } catch (const Error& e) {
            if (e.code() == Errc::NotABeacon) {
                ++result.skipped_non_beacon;
            } else {
                ++result.skipped_corrupt;
                result.diagnostics.push_back(source_name + ": packet " + std::to_string(i) + " skipped: " +
                                             e.what());
            }
        }
    }
    if (result.skipped_non_beacon > 0) {
        result.diagnostics.push_back(source_name + ": " + std::to_string(result.skipped_non_beacon) +
                                     " non-beacon packet(s) skipped");
    }
    return result;
}

} // namespace

CaptureReadResult read_capture(std::istream& in, const std::string& source_name)
{
    return decode_contents(read_pcap(in), source_name);
}

CaptureReadResult read_capture(const std::filesystem::path& path)
{
    return decode_contents(read_pcap(path), path.string());
}

CaptureReadResult read_capture_bytes(ByteView bytes, const std::string& source_name)
{
    std::istringstream in(std::string(bytes.begin(), bytes.end()), std::ios::binary);
    return read_capture(in, source_name);
}

std::vector<CaptureRecord> to_records(std::span<const CapturedBeacon> frames)
{
    std::vector<CaptureRecord> records;
    records.reserve(frames.size());
    for (const auto& f : frames) {
        records.push_back({f.capture_time_us, encode_beacon(f.frame)});
    }
    return records;
}

void write_capture(std::span<const BeaconFrame> frames, const std::filesystem::path& path)
{
    std::vector<CaptureRecord> records;
    records.reserve(frames.size());
    for (const auto& f : frames) {
        records.push_back({f.timestamp, encode_beacon(f)});
    }
    write_pcap(path, kLinkTypeRadiotap, records);
}

void write_capture(std::span<const CapturedBeacon> frames, const std::filesystem::path& path)
{
    write_pcap(path, kLinkTypeRadiotap, to_records(frames));
}

std::vector<CapturedBeacon> merge_by_time(std::vector<std::vector<CapturedBeacon>> sources)
{
    std::vector<CapturedBeacon> merged;
    for (auto& source : sources) {
        merged.insert(merged.end(), std::make_move_iterator(source.begin()), std::make_move_iterator(source.end()));
    }
    std::stable_sort(merged.begin(), merged.end(), [](const CapturedBeacon& a, const CapturedBeacon& b) {
        return a.capture_time_us < b.capture_time_us;
    });
    return merged;
}

} // namespace etguard
