#include "etguard/fingerprint.hpp"

#include "etguard/error.hpp"

namespace etguard {

namespace {

constexpr std::uint8_t kNullTag = 0x80;

constexpr std::array<std::string_view, kFingerprintFieldCount> kFieldNames{
    "ssid",        "bssid",   "beacon_interval", "capability_info", "supported_rates", "dtim_period",
    "tim_length",  "country", "extended_rates",  "rsn",             "vendor_specific",
};

Bytes le16_bytes(std::uint16_t v)
{
    Bytes b;
    append_le16(b, v);
    return b;
}

std::uint16_t expect_le16(const std::optional<Bytes>& v, FingerprintField field)
{
    if (!v || v->size() != 2) {
        throw Error(Errc::MalformedRecord, std::string(to_string(field)) + " needs exactly 2 bytes");
    }
    return load_le16(*v, 0);
}

std::optional<std::uint8_t> optional_byte(const std::optional<Bytes>& v, FingerprintField field)
{
    if (!v) {
        return std::nullopt;
    }
    if (v->size() != 1) {
        throw Error(Errc::MalformedRecord, std::string(to_string(field)) + " needs exactly 1 byte");
    }
    return v->front();
}

} // namespace

std::string_view to_string(FingerprintField field) noexcept
{
    return kFieldNames[static_cast<std::size_t>(field)];
}

std::optional<FingerprintField> parse_fingerprint_field(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
        if (kFieldNames[i] == name) {
            return static_cast<FingerprintField>(i);
        }
    }
    return std::nullopt;
}

std::optional<Bytes> field_value(const Fingerprint& fp, FingerprintField field)
{
    switch (field) {
    case FingerprintField::Ssid: return fp.ssid;
    case FingerprintField::Bssid: return Bytes(fp.bssid.octets().begin(), fp.bssid.octets().end());
    case FingerprintField::BeaconInterval: return le16_bytes(fp.beacon_interval);
    case FingerprintField::CapabilityInfo: return le16_bytes(fp.capability_info);
    case FingerprintField::SupportedRates: return fp.supported_rates;
    case FingerprintField::DtimPeriod:
        return fp.dtim_period ? std::optional<Bytes>(Bytes{*fp.dtim_period}) : std::nullopt;
    case FingerprintField::TimLength:
        return fp.tim_length ? std::optional<Bytes>(Bytes{*fp.tim_length}) : std::nullopt;
    case FingerprintField::Country: return fp.country;
    case FingerprintField::ExtendedRates: return fp.extended_rates;
    case FingerprintField::Rsn: return fp.rsn;
    case FingerprintField::VendorSpecific: return fp.vendor_specific;
    }
    return std::nullopt;
}

void set_field_value(Fingerprint& fp, FingerprintField field, const std::optional<Bytes>& value)
{
    switch (field) {
    case FingerprintField::Ssid: fp.ssid = value; break;
    case FingerprintField::Bssid:
        if (!value) {
            throw Error(Errc::MalformedRecord, "bssid cannot be NULL");
        }
        fp.bssid = MacAddress::from_bytes(*value);
        break;
    case FingerprintField::BeaconInterval: fp.beacon_interval = expect_le16(value, field); break;
    case FingerprintField::CapabilityInfo: fp.capability_info = expect_le16(value, field); break;
    case FingerprintField::SupportedRates: fp.supported_rates = value; break;
    case FingerprintField::DtimPeriod: fp.dtim_period = optional_byte(value, field); break;
    case FingerprintField::TimLength: fp.tim_length = optional_byte(value, field); break;
    case FingerprintField::Country: fp.country = value; break;
    case FingerprintField::ExtendedRates: fp.extended_rates = value; break;
    case FingerprintField::Rsn: fp.rsn = value; break;
    case FingerprintField::VendorSpecific: fp.vendor_specific = value; break;
    }
}

std::array<bool, kFingerprintFieldCount> field_equality(const Fingerprint& a, const Fingerprint& b)
{
    std::array<bool, kFingerprintFieldCount> eq{};
    for (auto field : kAllFingerprintFields) {
        eq[static_cast<std::size_t>(field)] = field_value(a, field) == field_value(b, field);
    }
    return eq;
}

std::size_t equal_field_count(const Fingerprint& a, const Fingerprint& b)
{
    std::size_t n = 0;
    for (bool e : field_equality(a, b)) {
        n += e ? 1 : 0;
    }
    return n;
}

Fingerprint build_fingerprint(const BeaconFrame& frame)
{
    Fingerprint fp;
    fp.bssid = frame.bssid();
    fp.beacon_interval = frame.beacon_interval;
    fp.capability_info = frame.capability_info;

    auto payload_of = [&](std::uint8_t id) -> std::optional<Bytes> {
        if (const auto* e = frame.find(id)) {
            return e->payload;
        }
        return std::nullopt;
    };
    fp.ssid = payload_of(ie::kSsid);
    fp.supported_rates = payload_of(ie::kSupportedRates);
    fp.country = payload_of(ie::kCountry);
    fp.rsn = payload_of(ie::kRsn);
    fp.extended_rates = payload_of(ie::kExtendedRates);

    if (const auto* tim = frame.find(ie::kTim)) {
        // DTIM count, DTIM period, bitmap control, partial virtual bitmap.
        if (tim->payload.size() < 3) {
            throw Error(Errc::MalformedTIM,
                        "TIM element of " + std::to_string(tim->payload.size()) + " bytes is shorter than 3");
        }
        fp.tim_length = static_cast<std::uint8_t>(tim->payload.size());
        fp.dtim_period = tim->payload[1];
    }

    for (const auto& e : frame.elements) {
        if (e.element_id == ie::kVendorSpecific) {
            if (!fp.vendor_specific) {
                fp.vendor_specific.emplace();
            }
            const Bytes encoded = encode_information_element(e);
            fp.vendor_specific->insert(fp.vendor_specific->end(), encoded.begin(), encoded.end());
        }
    }
    return fp;
}

Bytes serialize(const Fingerprint& fp)
{
    Bytes out;
    for (auto field : kAllFingerprintFields) {
        const auto value = field_value(fp, field);
        const auto index = static_cast<std::uint8_t>(field);
        if (!value) {
            out.push_back(static_cast<std::uint8_t>(index | kNullTag));
            out.push_back(0);
            out.push_back(0);
            continue;
        }
        if (value->size() > 0xffff) {
            throw Error(Errc::FieldOverflow, std::string(to_string(field)) + " too long to serialize");
        }
        out.push_back(index);
        out.push_back(static_cast<std::uint8_t>(value->size() >> 8));
        out.push_back(static_cast<std::uint8_t>(value->size() & 0xff));
        out.insert(out.end(), value->begin(), value->end());
    }
    return out;
}

Fingerprint parse_fingerprint(ByteView bytes)
{
    Fingerprint fp;
    std::size_t pos = 0;
    for (auto field : kAllFingerprintFields) {
        if (pos + 3 > bytes.size()) {
            throw Error(Errc::MalformedRecord, "fingerprint truncated before field " + std::string(to_string(field)));
        }
        const std::uint8_t tag = bytes[pos];
        const std::size_t len = (static_cast<std::size_t>(bytes[pos + 1]) << 8) | bytes[pos + 2];
        pos += 3;
        if ((tag & ~kNullTag) != static_cast<std::uint8_t>(field)) {
            throw Error(Errc::MalformedRecord, "expected tag for " + std::string(to_string(field)) + ", found 0x" +
                                                   to_hex(bytes.subspan(pos - 3, 1)));
        }
        if (tag & kNullTag) {
            if (len != 0) {
                throw Error(Errc::MalformedRecord, "NULL field " + std::string(to_string(field)) + " has a length");
            }
            set_field_value(fp, field, std::nullopt);
            continue;
        }
        if (pos + len > bytes.size()) {
            throw Error(Errc::MalformedRecord, "field " + std::string(to_string(field)) + " overruns the record");
        }
        set_field_value(fp, field, Bytes(bytes.begin() + pos, bytes.begin() + pos + len));
        pos += len;
    }
    if (pos != bytes.size()) {
        throw Error(Errc::MalformedRecord, std::to_string(bytes.size() - pos) + " trailing bytes after fingerprint");
    }
    return fp;
}

std::string fingerprint_id(const Fingerprint& fp)
{
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (auto b : serialize(fp)) {
        hash ^= b;
        hash *= 0x100000001b3ull;
    }
    Bytes be(8);
    for (int i = 0; i < 8; ++i) {
        be[i] = static_cast<std::uint8_t>(hash >> (56 - 8 * i));
    }
    return to_hex(be);
}

std::string display_ssid(const std::optional<Bytes>& ssid)
{
    if (!ssid) {
        return "<null>";
    }
    std::string out;
    for (auto b : *ssid) {
        if (b >= 0x20 && b < 0x7f && b != '\\') {
            out.push_back(static_cast<char>(b));
        } else {
            out += "\\x" + to_hex(ByteView(&b, 1));
        }
    }
    return out;
}

} // namespace etguard
