#include "etguard/frames.hpp"

#include "etguard/error.hpp"

#include <zlib.h>

namespace etguard {

const InformationElement* BeaconFrame::find(std::uint8_t element_id) const noexcept
{
    for (const auto& e : elements) {
        if (e.element_id == element_id) {
            return &e;
        }
    }
    return nullptr;
}

DeauthFrame DeauthFrame::broadcast_for(const MacAddress& bssid, std::uint16_t reason_code, std::uint16_t sequence)
{
    DeauthFrame f;
    f.mac.frame_control = kFrameControlDeauth;
    f.mac.addr1 = MacAddress::broadcast();
    f.mac.addr2 = bssid;
    f.mac.addr3 = bssid;
    f.mac.sequence_number = static_cast<std::uint16_t>(sequence % kSequenceModulus);
    f.reason_code = reason_code;
    return f;
}

std::uint32_t crc32_ieee(ByteView bytes)
{
    return static_cast<std::uint32_t>(
        ::crc32(::crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

MacHeader decode_mac_header(ByteView dot11)
{
    if (dot11.size() < kMacHeaderLength) {
        throw Error(Errc::TruncatedFrame,
                    "MAC header needs 24 bytes, got " + std::to_string(dot11.size()));
    }
    MacHeader mac;
    mac.frame_control = load_le16(dot11, 0);
    mac.duration = load_le16(dot11, 2);
    mac.addr1 = MacAddress::from_bytes(dot11.subspan(4, 6));
    mac.addr2 = MacAddress::from_bytes(dot11.subspan(10, 6));
    mac.addr3 = MacAddress::from_bytes(dot11.subspan(16, 6));
    const std::uint16_t seq_ctl = load_le16(dot11, 22);
    mac.sequence_number = static_cast<std::uint16_t>(seq_ctl >> 4);
    mac.fragment_number = static_cast<std::uint8_t>(seq_ctl & 0x0f);
    return mac;
}

void encode_mac_header(const MacHeader& mac, Bytes& out)
{
    if (mac.sequence_number >= kSequenceModulus || mac.fragment_number > 0x0f) {
        throw Error(Errc::FieldOverflow, "sequence control out of range");
    }
    append_le16(out, mac.frame_control);
    append_le16(out, mac.duration);
    for (const auto* addr : {&mac.addr1, &mac.addr2, &mac.addr3}) {
        out.insert(out.end(), addr->octets().begin(), addr->octets().end());
    }
    append_le16(out, static_cast<std::uint16_t>((mac.sequence_number << 4) | mac.fragment_number));
}

std::vector<InformationElement> decode_information_elements(ByteView body)
{
    std::vector<InformationElement> elements;
    std::size_t pos = 0;
    while (pos < body.size()) {
        if (pos + 2 > body.size()) {
            throw Error(Errc::MalformedIE, "dangling element header at body offset " + std::to_string(pos));
        }
        const std::uint8_t id = body[pos];
        const std::uint8_t len = body[pos + 1];
        if (pos + 2 + len > body.size()) {
            throw Error(Errc::MalformedIE, "element " + std::to_string(id) + " declares " + std::to_string(len) +
                                               " bytes but only " + std::to_string(body.size() - pos - 2) +
                                               " remain");
        }
        elements.push_back({id, Bytes(body.begin() + pos + 2, body.begin() + pos + 2 + len)});
        pos += 2 + len;
    }
    return elements;
}

Bytes encode_information_element(const InformationElement& element)
{
    if (element.payload.size() > 255) {
        throw Error(Errc::FieldOverflow, "element " + std::to_string(element.element_id) + " payload of " +
                                             std::to_string(element.payload.size()) + " bytes exceeds 255");
    }
    if (element.element_id == ie::kSsid && element.payload.size() > kMaxSsidLength) {
        throw Error(Errc::FieldOverflow,
                    "SSID of " + std::to_string(element.payload.size()) + " bytes exceeds 32");
    }
    Bytes out;
    out.reserve(element.payload.size() + 2);
    out.push_back(element.element_id);
    out.push_back(static_cast<std::uint8_t>(element.payload.size()));
    out.insert(out.end(), element.payload.begin(), element.payload.end());
    return out;
}

BeaconFrame decode_beacon_body(ByteView dot11, RadiotapInfo radiotap)
{
    if (radiotap.has_fcs()) {
        if (dot11.size() < 4) {
            throw Error(Errc::TruncatedFrame, "frame too short to carry an FCS");
        }
        const ByteView covered = dot11.first(dot11.size() - 4);
        if (crc32_ieee(covered) != load_le32(dot11, dot11.size() - 4)) {
            throw Error(Errc::BadFcs, "frame check sequence mismatch");
        }
        dot11 = covered;
    }
    if (dot11.size() < 2) {
        throw Error(Errc::TruncatedFrame, "no frame control field");
    }
    const std::uint16_t fc = load_le16(dot11, 0);
    if ((fc & 0x00ff) != kFrameControlBeacon) {
        throw Error(Errc::NotABeacon, "frame control byte 0x" + to_hex(dot11.first(1)) + " is not a beacon");
    }
    BeaconFrame frame;
    frame.radiotap = std::move(radiotap);
    frame.mac = decode_mac_header(dot11);
    if (dot11.size() < kMacHeaderLength + kBeaconFixedLength) {
        throw Error(Errc::TruncatedFrame, "beacon fixed fields truncated");
    }
    frame.timestamp = load_le64(dot11, kMacHeaderLength);
    frame.beacon_interval = load_le16(dot11, kMacHeaderLength + 8);
    frame.capability_info = load_le16(dot11, kMacHeaderLength + 10);
    frame.elements = decode_information_elements(dot11.subspan(kMacHeaderLength + kBeaconFixedLength));
    return frame;
}

BeaconFrame decode_beacon(ByteView bytes)
{
    auto [radiotap, offset] = decode_radiotap(bytes);
    return decode_beacon_body(bytes.subspan(offset), std::move(radiotap));
}

Bytes encode_beacon(const BeaconFrame& frame)
{
    if ((frame.mac.frame_control & 0x00ff) != kFrameControlBeacon) {
        throw Error(Errc::NotABeacon, "frame control does not encode a beacon");
    }
    Bytes out = encode_radiotap(frame.radiotap);
    const std::size_t dot11_start = out.size();
    encode_mac_header(frame.mac, out);
    append_le64(out, frame.timestamp);
    append_le16(out, frame.beacon_interval);
    append_le16(out, frame.capability_info);
    for (const auto& element : frame.elements) {
        const Bytes encoded = encode_information_element(element);
        out.insert(out.end(), encoded.begin(), encoded.end());
    }
    if (frame.radiotap.has_fcs()) {
        append_le32(out, crc32_ieee(ByteView(out).subspan(dot11_start)));
    }
    return out;
}

Bytes encode_deauth(const DeauthFrame& frame)
{
    Bytes out;
    out.reserve(kDeauthFrameLength);
    encode_mac_header(frame.mac, out);
    append_le16(out, frame.reason_code);
    return out;
}

DeauthFrame decode_deauth(ByteView dot11)
{
    if (dot11.size() < kDeauthFrameLength) {
        throw Error(Errc::TruncatedFrame,
                    "deauthentication frame needs 26 bytes, got " + std::to_string(dot11.size()));
    }
    DeauthFrame frame;
    frame.mac = decode_mac_header(dot11);
    if ((frame.mac.frame_control & 0x00ff) != kFrameControlDeauth) {
        throw Error(Errc::NotADeauth, "frame control does not encode a deauthentication");
    }
    frame.reason_code = load_le16(dot11, kMacHeaderLength);
    return frame;
}

} // namespace etguard
