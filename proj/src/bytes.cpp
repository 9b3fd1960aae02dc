#include "etguard/bytes.hpp"

#include "etguard/error.hpp"

#include <cctype>

namespace etguard {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::TruncatedHeader: return "TruncatedHeader";
    case Errc::UnsupportedPresenceBit: return "UnsupportedPresenceBit";
    case Errc::TruncatedFrame: return "TruncatedFrame";
    case Errc::NotABeacon: return "NotABeacon";
    case Errc::NotADeauth: return "NotADeauth";
    case Errc::MalformedIE: return "MalformedIE";
    case Errc::BadFcs: return "BadFcs";
    case Errc::FieldOverflow: return "FieldOverflow";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedLinkType: return "UnsupportedLinkType";
    case Errc::Io: return "Io";
    case Errc::MalformedTIM: return "MalformedTIM";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::UnknownBssid: return "UnknownBssid";
    case Errc::CorruptStore: return "CorruptStore";
    case Errc::DuplicateCampaign: return "DuplicateCampaign";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::UnknownScenario: return "UnknownScenario";
    case Errc::BadRequest: return "BadRequest";
    }
    return "Unknown";
}

std::string to_hex(ByteView bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {

int nibble(char c)
{
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    return -1;
}

} // namespace

Bytes from_hex(std::string_view text)
{
    Bytes out;
    int high = -1;
    for (char c : text) {
        if (c == ':' || std::isspace(static_cast<unsigned char>(c))) {
            continue;
        }
        const int v = nibble(c);
        if (v < 0) {
            throw Error(Errc::MalformedRecord, "invalid hex digit '" + std::string(1, c) + "'");
        }
        if (high < 0) {
            high = v;
        } else {
            out.push_back(static_cast<std::uint8_t>((high << 4) | v));
            high = -1;
        }
    }
    if (high >= 0) {
        throw Error(Errc::MalformedRecord, "odd number of hex digits");
    }
    return out;
}

Bytes to_bytes(std::string_view text)
{
    return Bytes(text.begin(), text.end());
}

MacAddress MacAddress::parse(std::string_view text)
{
    std::array<std::uint8_t, 6> octets{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        if (pos + 2 > text.size()) {
            throw Error(Errc::BadRequest, "malformed MAC address '" + std::string(text) + "'");
        }
        const int hi = nibble(text[pos]);
        const int lo = nibble(text[pos + 1]);
        if (hi < 0 || lo < 0) {
            throw Error(Errc::BadRequest, "malformed MAC address '" + std::string(text) + "'");
        }
        octets[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        pos += 2;
        if (i < 5) {
            if (pos >= text.size() || (text[pos] != ':' && text[pos] != '-')) {
                throw Error(Errc::BadRequest, "malformed MAC address '" + std::string(text) + "'");
            }
            ++pos;
        }
    }
    if (pos != text.size()) {
        throw Error(Errc::BadRequest, "malformed MAC address '" + std::string(text) + "'");
    }
    return MacAddress(octets);
}

MacAddress MacAddress::from_bytes(ByteView bytes)
{
    if (bytes.size() != 6) {
        throw Error(Errc::MalformedRecord, "MAC address needs 6 bytes, got " + std::to_string(bytes.size()));
    }
    std::array<std::uint8_t, 6> octets{};
    std::copy(bytes.begin(), bytes.end(), octets.begin());
    return MacAddress(octets);
}

std::string MacAddress::to_string() const
{
    std::string hex = to_hex(octets_);
    std::string out;
    for (std::size_t i = 0; i < 6; ++i) {
        if (i) {
            out.push_back(':');
        }
        out.append(hex, i * 2, 2);
    }
    return out;
}

} // namespace etguard
