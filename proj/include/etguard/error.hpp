#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace etguard {

enum class Errc {
    TruncatedHeader,
    UnsupportedPresenceBit,
    TruncatedFrame,
    NotABeacon,
    NotADeauth,
    MalformedIE,
    BadFcs,
    FieldOverflow,
    BadMagic,
    UnsupportedLinkType,
    Io,
    MalformedTIM,
    MalformedRecord,
    UnknownBssid,
    CorruptStore,
    DuplicateCampaign,
    InvalidScenario,
    UnknownScenario,
    BadRequest,
};

std::string_view to_string(Errc code) noexcept;

/// All library failures are reported as this exception; `code()` carries the
/// machine-readable category and `what()` the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace etguard
