#include "oracles.hpp"

#include <algorithm>
#include <map>

namespace etguard::testing {

namespace {

struct WalkField {
    std::size_t size;
    std::size_t align;
};

// TSFT u64; Flags u8; Rate u8; Channel u16+u16; FHSS u8+u8 (2-aligned); signal s8.
const WalkField kWalk[6] = {{8, 8}, {1, 1}, {1, 1}, {4, 2}, {2, 2}, {1, 1}};

} // namespace

std::array<std::optional<std::size_t>, 6> radiotap_walk_offsets(std::uint32_t present)
{
    std::array<std::optional<std::size_t>, 6> out{};
    std::size_t pos = 8; // version, pad, length, one present word
    for (unsigned bit = 0; bit < 6; ++bit) {
        if (!(present >> bit & 1u)) {
            continue;
        }
        while (pos % kWalk[bit].align != 0) {
            ++pos;
        }
        out[bit] = pos;
        pos += kWalk[bit].size;
    }
    return out;
}

Bytes radiotap_walk_build(std::uint32_t present)
{
    const auto offsets = radiotap_walk_offsets(present);
    std::size_t end = 8;
    for (unsigned bit = 0; bit < 6; ++bit) {
        if (offsets[bit]) {
            end = *offsets[bit] + kWalk[bit].size;
        }
    }
    Bytes h(end, 0);
    h[2] = static_cast<std::uint8_t>(end & 0xff);
    h[3] = static_cast<std::uint8_t>(end >> 8);
    h[4] = static_cast<std::uint8_t>(present);
    for (unsigned bit = 0; bit < 6; ++bit) {
        if (!offsets[bit]) {
            continue;
        }
        for (std::size_t i = 0; i < kWalk[bit].size; ++i) {
            h[*offsets[bit] + i] = static_cast<std::uint8_t>(0x10 * (bit + 1) + i);
        }
    }
    if (offsets[1]) {
        h[*offsets[1]] &= static_cast<std::uint8_t>(~0x10); // no trailing FCS
    }
    return h;
}

OracleVerdict detection_loop_walk(const Observation& obs, const std::vector<FingerprintRecord>& records, int margin_db)
{
    enum class Outcome { Unregistered, EvilTwinOf, EvilTwinBySignal, Equivalent };
    struct Step {
        Outcome outcome;
        const FingerprintRecord* record;
    };
    const Bytes mine = serialize(obs.fingerprint);
    std::vector<Step> steps;
    for (const auto& p : records) {
        if (serialize(p.fingerprint) != mine) {
            if (obs.fingerprint.ssid != p.fingerprint.ssid) {
                steps.push_back({Outcome::Unregistered, &p});
            } else {
                steps.push_back({Outcome::EvilTwinOf, &p});
            }
        } else {
            const bool louder = obs.ssi_dbm.has_value() && *obs.ssi_dbm > p.max_ssi_dbm + margin_db;
            steps.push_back({louder ? Outcome::EvilTwinBySignal : Outcome::Equivalent, &p});
        }
    }

    for (const auto& s : steps) {
        if (s.outcome == Outcome::Equivalent) {
            return {VerdictKind::Legitimate, VerdictReason::ExactMatch, s.record->bssid()};
        }
        if (s.outcome == Outcome::EvilTwinBySignal) {
            return {VerdictKind::EvilTwin, VerdictReason::SsiExceeded, s.record->bssid()};
        }
    }

    const FingerprintRecord* best = nullptr;
    int best_score = -1;
    for (const auto& s : steps) {
        if (s.outcome != Outcome::EvilTwinOf) {
            continue;
        }
        int score = 0;
        for (auto f : kAllFingerprintFields) {
            score += field_value(s.record->fingerprint, f) == field_value(obs.fingerprint, f) ? 1 : 0;
        }
        if (score > best_score || (score == best_score && s.record->bssid() < best->bssid())) {
            best = s.record;
            best_score = score;
        }
    }
    if (!best) {
        return {};
    }
    Fingerprint moved = obs.fingerprint;
    moved.bssid = best->bssid();
    const bool bssid_only = serialize(moved) == serialize(best->fingerprint);
    return {VerdictKind::EvilTwin, bssid_only ? VerdictReason::BssidForged : VerdictReason::FingerprintMismatchSameSsid,
            best->bssid()};
}

const std::vector<DeviceTableRow>& device_table()
{
    //                                   len   SSID  BSSID BI    CI    rates TIM   DTIM  ctry  RSN   ESR   vendor
    static const std::vector<DeviceTableRow> rows{
        {"dlink-dir615",          {"N", "Y*", "Y*", "Y",  "N", "N",  "Y",  "Y",  "NA", "NA", "N",  "N"}},
        {"digisol-dg-hr1400",     {"N", "Y*", "Y*", "Y*", "N", "N",  "Y",  "Y",  "NA", "NA", "N",  "N"}},
        {"tplink-tl-wr841n",      {"N", "Y*", "Y*", "Y",  "Y", "N",  "Y",  "Y",  "NA", "NA", "N",  "N"}},
        {"mi-3c",                 {"N", "Y*", "Y*", "Y",  "N", "N",  "Y",  "N",  "N*", "NA", "N",  "N"}},
        {"hostapd",               {"N", "Y*", "Y*", "Y*", "N", "Y*", "Y",  "Y*", "NA", "NA", "N*", "N*"}},
        {"unity-network-manager", {"N", "Y*", "Y*", "Y",  "N", "N",  "Y",  "N",  "NA", "NA", "N",  "N"}},
        {"ap-hotspot",            {"N", "Y*", "Y*", "N",  "N", "N",  "Y",  "N",  "NA", "NA", "N",  "N"}},
        {"aircrack-ng",           {"N", "Y*", "Y*", "Y",  "N", "N",  "N*", "N*", "N*", "NA", "N*", "N*"}},
        {"sony-xperia-z",         {"N", "Y*", "Y*", "Y",  "N", "N",  "N",  "N",  "NA", "NA", "N",  "N"}},
        {"redmi-note-4",          {"N", "Y*", "Y*", "Y",  "Y", "N",  "N",  "N",  "NA", "NA", "N",  "N"}},
        {"moto-g5-plus",          {"N", "Y*", "Y*", "Y",  "N", "N",  "N",  "N",  "NA", "NA", "N",  "N"}},
        {"lenovo-tab-a7",         {"N", "Y*", "Y*", "Y",  "N", "N",  "N",  "N",  "NA", "NA", "N",  "N"}},
    };
    return rows;
}

sim::CellRelation expected_relation(std::string_view cell)
{
    if (cell == "Y") return sim::CellRelation::Same;
    if (cell == "Y*") return sim::CellRelation::ForgedSame;
    if (cell == "N") return sim::CellRelation::Differs;
    if (cell == "N*") return sim::CellRelation::PresenceDiffers;
    return sim::CellRelation::BothAbsent;
}

namespace {

const char* kColumnNames[12] = {"beacon_length", "ssid",    "bssid",       "beacon_interval",
                                "capability",    "rates",   "tim_length",  "dtim_period",
                                "country",       "rsn",     "ext_rates",   "vendor"};

/// Raw value of a column read straight from a decoded beacon.
std::optional<Bytes> raw_column(const BeaconFrame& f, std::size_t column)
{
    auto element = [&](std::uint8_t id) -> std::optional<Bytes> {
        if (const auto* e = f.find(id)) {
            return e->payload;
        }
        return std::nullopt;
    };
    auto le16 = [](std::uint16_t v) { return Bytes{static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)}; };
    switch (column) {
    case 1: return element(0);
    case 2: return Bytes(f.bssid().octets().begin(), f.bssid().octets().end());
    case 3: return le16(f.beacon_interval);
    case 4: return le16(f.capability_info);
    case 5: return element(1);
    case 6: {
        auto tim = element(5);
        if (!tim) return std::nullopt;
        return Bytes{static_cast<std::uint8_t>(tim->size())};
    }
    case 7: {
        auto tim = element(5);
        if (!tim) return std::nullopt;
        return Bytes{(*tim)[1]};
    }
    case 8: return element(7);
    case 9: return element(48);
    case 10: return element(50);
    case 11: {
        Bytes all;
        bool any = false;
        for (const auto& e : f.elements) {
            if (e.element_id == 221) {
                any = true;
                all.push_back(e.element_id);
                all.push_back(static_cast<std::uint8_t>(e.payload.size()));
                all.insert(all.end(), e.payload.begin(), e.payload.end());
            }
        }
        if (!any) return std::nullopt;
        return all;
    }
    default: return std::nullopt;
    }
}

sim::CellRelation observed_relation(const std::optional<Bytes>& genuine, const std::optional<Bytes>& twin,
                                    const std::optional<Bytes>& twin_default)
{
    if (!genuine && !twin) return sim::CellRelation::BothAbsent;
    if (genuine.has_value() != twin.has_value()) return sim::CellRelation::PresenceDiffers;
    if (*genuine != *twin) return sim::CellRelation::Differs;
    return twin_default == genuine ? sim::CellRelation::Same : sim::CellRelation::ForgedSame;
}

const BeaconFrame& first_from(const std::vector<CapturedBeacon>& frames, const Fingerprint& who)
{
    for (const auto& f : frames) {
        if (build_fingerprint(f.frame) == who) {
            return f.frame;
        }
    }
    throw std::runtime_error("emitter not found in generated capture");
}

} // namespace

std::vector<CellCheck> check_device_table(std::uint64_t seed)
{
    std::vector<CellCheck> checks;
    for (const auto& row : device_table()) {
        const auto scenario = sim::builtin_scenario("colocation-" + row.profile);
        if (!scenario) {
            checks.push_back({row.profile, "scenario", "present", "missing", false});
            continue;
        }
        const auto capture = sim::generate(*scenario, seed);
        const auto& genuine = first_from(capture.frames, capture.genuine);
        const auto& twin = first_from(capture.frames, *capture.twin);

        // The same profile left unconfigured: what the device sends out of the box.
        sim::Scenario plain;
        plain.name = "plain-" + row.profile;
        plain.genuine = {row.profile, -50};
        const auto untouched = sim::generate(plain, seed);
        const auto& twin_default = untouched.frames.front().frame;

        for (std::size_t c = 0; c < 12; ++c) {
            const auto want = expected_relation(row.cells[c]);
            sim::CellRelation got;
            if (c == 0) {
                const auto gl = encode_beacon(genuine).size();
                const auto tl = encode_beacon(twin).size();
                got = gl == tl ? sim::CellRelation::Same : sim::CellRelation::Differs;
            } else {
                got = observed_relation(raw_column(genuine, c), raw_column(twin, c), raw_column(twin_default, c));
            }
            checks.push_back({row.profile, kColumnNames[c], std::string(sim::to_string(want)),
                              std::string(sim::to_string(got)), want == got});
        }
    }
    return checks;
}

} // namespace etguard::testing
