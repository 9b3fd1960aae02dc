#include "etguard/radiotap.hpp"

#include "etguard/error.hpp"

#include <array>

namespace etguard {

namespace {

struct FieldLayout {
    std::size_t size;
    std::size_t align;
};

constexpr std::array<FieldLayout, 6> kLayouts{{
    {8, 8}, // TSFT
    {1, 1}, // Flags
    {1, 1}, // Rate
    {4, 2}, // Channel
    {2, 2}, // FHSS
    {1, 1}, // dBm antenna signal
}};

constexpr std::size_t align_up(std::size_t offset, std::size_t align)
{
    return (offset + align - 1) / align * align;
}

constexpr std::uint32_t bit_mask(unsigned bit)
{
    return 1u << bit;
}

} // namespace

std::optional<std::size_t> radiotap_field_offset(std::uint32_t present, unsigned bit, std::size_t fields_start)
{
    if (bit >= kLayouts.size() || !(present & bit_mask(bit))) {
        return std::nullopt;
    }
    std::size_t offset = fields_start;
    for (unsigned b = 0; b < bit; ++b) {
        if (present & bit_mask(b)) {
            offset = align_up(offset, kLayouts[b].align) + kLayouts[b].size;
        }
    }
    return align_up(offset, kLayouts[bit].align);
}

RadiotapInfo make_radiotap(std::optional<std::int8_t> signal_dbm, std::optional<RadiotapChannel> channel,
                           std::optional<std::uint8_t> rate, std::optional<std::uint64_t> tsft,
                           std::optional<std::uint8_t> flags, std::optional<RadiotapFhss> fhss)
{
    RadiotapInfo info;
    info.tsft = tsft;
    info.flags = flags;
    info.rate = rate;
    info.channel = channel;
    info.fhss = fhss;
    info.signal_dbm = signal_dbm;

    std::uint32_t present = 0;
    if (tsft) present |= bit_mask(0);
    if (flags) present |= bit_mask(1);
    if (rate) present |= bit_mask(2);
    if (channel) present |= bit_mask(3);
    if (fhss) present |= bit_mask(4);
    if (signal_dbm) present |= bit_mask(5);
    info.present_words = {present};

    std::size_t end = kRadiotapPreamble;
    for (unsigned b = 0; b < kLayouts.size(); ++b) {
        if (present & bit_mask(b)) {
            end = *radiotap_field_offset(present, b) + kLayouts[b].size;
        }
    }
    info.header_length = static_cast<std::uint16_t>(end);
    return info;
}

std::pair<RadiotapInfo, std::size_t> decode_radiotap(ByteView bytes)
{
    if (bytes.size() < kRadiotapPreamble) {
        throw Error(Errc::TruncatedHeader,
                    "radiotap preamble needs 8 bytes, got " + std::to_string(bytes.size()));
    }
    RadiotapInfo info;
    info.header_length = load_le16(bytes, 2);
    if (info.header_length < kRadiotapPreamble) {
        throw Error(Errc::TruncatedHeader,
                    "declared radiotap length " + std::to_string(info.header_length) + " is below 8");
    }
    if (info.header_length > bytes.size()) {
        throw Error(Errc::TruncatedHeader, "declared radiotap length " + std::to_string(info.header_length) +
                                               " exceeds " + std::to_string(bytes.size()) + " available bytes");
    }
    const ByteView header = bytes.first(info.header_length);

    info.present_words.clear();
    std::size_t pos = 4;
    while (true) {
        if (pos + 4 > header.size()) {
            throw Error(Errc::TruncatedHeader, "present-word chain overruns the radiotap header");
        }
        const std::uint32_t word = load_le32(header, pos);
        info.present_words.push_back(word);
        pos += 4;
        if (!(word & bit_mask(static_cast<unsigned>(RadiotapBit::Extension)))) {
            break;
        }
    }

    // Fields of the first word start after the whole chain; extra words are skipped.
    const std::uint32_t present = info.present_words.front();
    const std::size_t fields_start = pos;
    auto field = [&](unsigned bit) -> std::optional<std::size_t> {
        auto off = radiotap_field_offset(present, bit, fields_start);
        if (!off || *off + kLayouts[bit].size > header.size()) {
            return std::nullopt;
        }
        return off;
    };

    if (auto off = field(0)) info.tsft = load_le64(header, *off);
    if (auto off = field(1)) info.flags = header[*off];
    if (auto off = field(2)) info.rate = header[*off];
    if (auto off = field(3)) info.channel = RadiotapChannel{load_le16(header, *off), load_le16(header, *off + 2)};
    if (auto off = field(4)) info.fhss = RadiotapFhss{header[*off], header[*off + 1]};
    if (auto off = field(5)) info.signal_dbm = static_cast<std::int8_t>(header[*off]);

    const std::size_t payload_offset = info.header_length;
    return {std::move(info), payload_offset};
}

Bytes encode_radiotap(const RadiotapInfo& info)
{
    const std::uint32_t present = info.present_words.empty() ? 0 : info.present_words.front();
    if (info.present_words.size() > 1 || (present & ~0x3fu)) {
        throw Error(Errc::UnsupportedPresenceBit, "only present bits 0-5 in a single word can be encoded");
    }
    const RadiotapInfo canonical =
        make_radiotap(info.signal_dbm, info.channel, info.rate, info.tsft, info.flags, info.fhss);
    if (canonical.present_words.front() != present) {
        throw Error(Errc::UnsupportedPresenceBit, "present word disagrees with the populated fields");
    }

    Bytes out(canonical.header_length, 0);
    out[0] = 0; // version
    out[1] = 0; // pad
    out[2] = static_cast<std::uint8_t>(canonical.header_length & 0xff);
    out[3] = static_cast<std::uint8_t>(canonical.header_length >> 8);
    for (int i = 0; i < 4; ++i) {
        out[4 + i] = static_cast<std::uint8_t>((present >> (8 * i)) & 0xff);
    }
    auto put = [&](unsigned bit, auto&& write) {
        if (auto off = radiotap_field_offset(present, bit, kRadiotapPreamble)) {
            write(*off);
        }
    };
    put(0, [&](std::size_t off) {
        for (int i = 0; i < 8; ++i) out[off + i] = static_cast<std::uint8_t>((*info.tsft >> (8 * i)) & 0xff);
    });
    put(1, [&](std::size_t off) { out[off] = *info.flags; });
    put(2, [&](std::size_t off) { out[off] = *info.rate; });
    put(3, [&](std::size_t off) {
        out[off] = static_cast<std::uint8_t>(info.channel->frequency_mhz & 0xff);
        out[off + 1] = static_cast<std::uint8_t>(info.channel->frequency_mhz >> 8);
        out[off + 2] = static_cast<std::uint8_t>(info.channel->flags & 0xff);
        out[off + 3] = static_cast<std::uint8_t>(info.channel->flags >> 8);
    });
    put(4, [&](std::size_t off) {
        out[off] = info.fhss->hop_set;
        out[off + 1] = info.fhss->hop_pattern;
    });
    put(5, [&](std::size_t off) { out[off] = static_cast<std::uint8_t>(*info.signal_dbm); });
    return out;
}

} // namespace etguard
