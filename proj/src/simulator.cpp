#include "etguard/simulator.hpp"

#include "etguard/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace etguard::sim {

namespace {

using F = FingerprintField;

constexpr std::uint64_t kCaptureEpochUs = 1'600'000'000ull * 1'000'000ull;
constexpr std::uint8_t kRadiotapRate1Mbps = 0x02;
constexpr std::uint16_t kChannelFlags2GhzCck = 0x00a0;

[[noreturn]] void invalid(const Scenario& s, const std::string& why)
{
    throw Error(Errc::InvalidScenario, (s.name.empty() ? std::string("scenario") : s.name) + ": " + why);
}

MacAddress change_last_digit(const MacAddress& mac)
{
    auto octets = mac.octets();
    octets[5] = static_cast<std::uint8_t>((octets[5] & 0xf0) | ((octets[5] + 1) & 0x0f));
    return MacAddress(octets);
}

void check_emitter(const Scenario& s, const EmitterSpec& spec, bool is_twin)
{
    const auto& profile = find_profile(spec.profile);
    if (spec.peak_ssi_dbm < -128 || spec.peak_ssi_dbm > 0) {
        invalid(s, "peak signal " + std::to_string(spec.peak_ssi_dbm) + " dBm outside [-128, 0]");
    }
    auto require_forgeable = [&](F field, const char* what) {
        if (!profile.forgeable.count(field)) {
            invalid(s, std::string(what) + " " + std::string(to_string(field)) + " is not configurable on " +
                           profile.name);
        }
    };
    for (const auto& [field, _] : spec.overrides) {
        require_forgeable(field, "override of");
    }
    if (!is_twin && (!spec.forge_from_genuine.empty() || spec.bssid_policy != BssidPolicy::ProfileDefault)) {
        invalid(s, "the genuine AP cannot forge fields");
    }
    for (auto field : spec.forge_from_genuine) {
        require_forgeable(field, "forging");
    }
    if (spec.bssid_policy != BssidPolicy::ProfileDefault) {
        require_forgeable(F::Bssid, "forging");
    }
}

Fingerprint apply_overrides(Fingerprint fp, const EmitterSpec& spec)
{
    for (const auto& [field, value] : spec.overrides) {
        set_field_value(fp, field, value);
    }
    return fp;
}

void check_resolved(const Scenario& s, const Fingerprint& fp, const char* who)
{
    if (fp.ssid && fp.ssid->size() > kMaxSsidLength) {
        invalid(s, std::string(who) + " SSID longer than 32 bytes");
    }
    if (fp.tim_length.has_value() != fp.dtim_period.has_value()) {
        invalid(s, std::string(who) + " TIM length and DTIM period must be present together");
    }
    if (fp.tim_length && *fp.tim_length < 3) {
        invalid(s, std::string(who) + " TIM length below 3");
    }
    if (fp.dtim_period && *fp.dtim_period == 0) {
        invalid(s, std::string(who) + " DTIM period of 0");
    }
    if (fp.vendor_specific) {
        try {
            decode_information_elements(*fp.vendor_specific);
        } catch (const Error&) {
            invalid(s, std::string(who) + " vendor_specific is not a list of encoded elements");
        }
    }
}

bool genuine_on_air(const Scenario& s)
{
    return !s.twin || s.placement == Placement::Colocation;
}

struct EmitterPlan {
    Fingerprint fp;
    int peak_ssi_dbm;
    std::uint16_t channel_mhz;
    std::uint16_t first_sequence;
};

/// Raw engine output keeps the byte stream identical across standard libraries.
class Jitter {
public:
    explicit Jitter(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : engine_() % bound; }

private:
    std::mt19937_64 engine_;
};

void emit_frames(const EmitterPlan& plan, std::uint32_t duration_ms, int jitter_db, Jitter& rng,
                 std::vector<CapturedBeacon>& out)
{
    const std::uint64_t period_us = static_cast<std::uint64_t>(plan.fp.beacon_interval) * 1024;
    if (period_us == 0) {
        return;
    }
    const std::uint64_t phase_us = rng.below(period_us);
    const std::uint64_t tsf_start = rng.below(1ull << 40);
    const std::uint64_t window_us = static_cast<std::uint64_t>(duration_ms) * 1000;
    const std::uint64_t count = std::max<std::uint64_t>(1, window_us / period_us);
    const std::uint8_t dtim_period = plan.fp.dtim_period.value_or(1);
    for (std::uint64_t k = 0; k < count; ++k) {
        BeaconDynamics d;
        d.tsf_us = tsf_start + k * period_us;
        d.sequence_number = static_cast<std::uint16_t>((plan.first_sequence + k) % kSequenceModulus);
        d.dtim_count = static_cast<std::uint8_t>((dtim_period - 1) - (k % dtim_period));
        d.bitmap_seed = static_cast<std::uint8_t>(rng.next());
        const int drop = k == 0 ? 0 : static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * jitter_db + 1)));
        d.signal_dbm = static_cast<std::int8_t>(std::max(-128, plan.peak_ssi_dbm - drop));
        d.channel_mhz = plan.channel_mhz;
        out.push_back({kCaptureEpochUs + phase_us + k * period_us, beacon_from_fingerprint(plan.fp, d)});
    }
}

GroundTruthLabel label_for(const Fingerprint& fp, VerdictKind expected, std::string role, bool documented_fp = false)
{
    return {fp.bssid, fingerprint_id(fp), expected, std::move(role), documented_fp};
}

} // namespace

std::string_view to_string(Placement placement) noexcept
{
    switch (placement) {
    case Placement::Colocation: return "colocation";
    case Placement::Substitution: return "substitution";
    case Placement::RemoteLocation: return "remote-location";
    }
    return "unknown";
}

std::optional<Placement> parse_placement(std::string_view text) noexcept
{
    for (auto p : {Placement::Colocation, Placement::Substitution, Placement::RemoteLocation}) {
        if (to_string(p) == text) {
            return p;
        }
    }
    return std::nullopt;
}

BeaconFrame beacon_from_fingerprint(const Fingerprint& fp, const BeaconDynamics& d)
{
    BeaconFrame frame;
    frame.radiotap = make_radiotap(d.signal_dbm, RadiotapChannel{d.channel_mhz, kChannelFlags2GhzCck},
                                   kRadiotapRate1Mbps, std::nullopt, std::uint8_t{0});
    frame.mac.frame_control = kFrameControlBeacon;
    frame.mac.addr1 = MacAddress::broadcast();
    frame.mac.addr2 = fp.bssid;
    frame.mac.addr3 = fp.bssid;
    frame.mac.sequence_number = static_cast<std::uint16_t>(d.sequence_number % kSequenceModulus);
    frame.timestamp = d.tsf_us;
    frame.beacon_interval = fp.beacon_interval;
    frame.capability_info = fp.capability_info;

    auto& el = frame.elements;
    if (fp.ssid) {
        el.push_back({ie::kSsid, *fp.ssid});
    }
    if (fp.supported_rates) {
        el.push_back({ie::kSupportedRates, *fp.supported_rates});
    }
    const int channel = d.channel_mhz >= 2412 && d.channel_mhz <= 2472 ? (d.channel_mhz - 2407) / 5 : 1;
    el.push_back({3, Bytes{static_cast<std::uint8_t>(channel)}}); // DS parameter set
    if (fp.tim_length) {
        Bytes tim(*fp.tim_length, 0);
        tim[0] = d.dtim_count;
        tim[1] = fp.dtim_period.value_or(1);
        tim[2] = 0;
        for (std::size_t i = 3; i < tim.size(); ++i) {
            tim[i] = static_cast<std::uint8_t>((d.bitmap_seed * (i + 1)) & 0xfe);
        }
        el.push_back({ie::kTim, std::move(tim)});
    }
    if (fp.country) {
        el.push_back({ie::kCountry, *fp.country});
    }
    if (fp.rsn) {
        el.push_back({ie::kRsn, *fp.rsn});
    }
    if (fp.extended_rates) {
        el.push_back({ie::kExtendedRates, *fp.extended_rates});
    }
    if (fp.vendor_specific) {
        for (auto& v : decode_information_elements(*fp.vendor_specific)) {
            el.push_back(std::move(v));
        }
    }
    return frame;
}

Fingerprint resolve_genuine(const Scenario& scenario)
{
    return apply_overrides(find_profile(scenario.genuine.profile).defaults, scenario.genuine);
}

std::optional<Fingerprint> resolve_twin(const Scenario& scenario)
{
    if (!scenario.twin) {
        return std::nullopt;
    }
    const auto& spec = *scenario.twin;
    const Fingerprint genuine = resolve_genuine(scenario);
    Fingerprint fp = find_profile(spec.profile).defaults;
    for (auto field : spec.forge_from_genuine) {
        set_field_value(fp, field, field_value(genuine, field));
    }
    switch (spec.bssid_policy) {
    case BssidPolicy::ProfileDefault: break;
    case BssidPolicy::SameAsGenuine: fp.bssid = genuine.bssid; break;
    case BssidPolicy::LastDigitChanged: fp.bssid = change_last_digit(genuine.bssid); break;
    }
    return apply_overrides(std::move(fp), spec);
}

void validate(const Scenario& scenario)
{
    if (scenario.duration_ms == 0) {
        invalid(scenario, "duration must be positive");
    }
    if (scenario.jitter_db < 0 || scenario.jitter_db > 40) {
        invalid(scenario, "jitter must lie in [0, 40] dB");
    }
    check_emitter(scenario, scenario.genuine, false);
    check_resolved(scenario, resolve_genuine(scenario), "genuine");
    if (!scenario.twin) {
        return;
    }
    check_emitter(scenario, *scenario.twin, true);
    check_resolved(scenario, *resolve_twin(scenario), "twin");
    if (scenario.placement == Placement::Colocation &&
        scenario.twin->peak_ssi_dbm <= scenario.genuine.peak_ssi_dbm) {
        invalid(scenario, "colocation needs the twin's signal (" + std::to_string(scenario.twin->peak_ssi_dbm) +
                              " dBm) above the genuine maximum (" + std::to_string(scenario.genuine.peak_ssi_dbm) +
                              " dBm)");
    }
}

GeneratedCapture generate(const Scenario& scenario, std::uint64_t seed)
{
    validate(scenario);
    GeneratedCapture out;
    out.genuine = resolve_genuine(scenario);
    out.twin = resolve_twin(scenario);

    Jitter rng(seed);
    const auto genuine_first_seq = static_cast<std::uint16_t>(rng.below(kSequenceModulus));
    // Twin sequence space sits half a wrap away so per-BSSID dedup never
    // chains frames of two emitters that share a BSSID.
    const auto twin_first_seq = static_cast<std::uint16_t>((genuine_first_seq + kSequenceModulus / 2) % kSequenceModulus);

    const bool genuine_present = genuine_on_air(scenario);
    if (genuine_present) {
        emit_frames({out.genuine, scenario.genuine.peak_ssi_dbm, scenario.genuine.channel_mhz, genuine_first_seq},
                    scenario.duration_ms, scenario.jitter_db, rng, out.frames);
    }
    if (out.twin) {
        emit_frames({*out.twin, scenario.twin->peak_ssi_dbm, scenario.twin->channel_mhz, twin_first_seq},
                    scenario.duration_ms, scenario.jitter_db, rng, out.frames);
    }
    std::stable_sort(out.frames.begin(), out.frames.end(), [](const CapturedBeacon& a, const CapturedBeacon& b) {
        return a.capture_time_us < b.capture_time_us;
    });

    // Ground truth follows from how the twin was built, relative to the
    // genuine AP as enrolled from its baseline capture.
    const bool twin_identical = out.twin && *out.twin == out.genuine;
    if (genuine_present && !twin_identical) {
        out.labels.push_back(label_for(out.genuine, VerdictKind::Legitimate, "genuine"));
    }
    if (out.twin) {
        VerdictKind expected = VerdictKind::EvilTwin;
        bool documented_fp = false;
        if (twin_identical) {
            if (scenario.twin->peak_ssi_dbm <= scenario.genuine.peak_ssi_dbm) {
                expected = VerdictKind::Legitimate;
                documented_fp = true;
            }
        } else if (out.twin->ssid != out.genuine.ssid) {
            expected = VerdictKind::Unregistered;
        }
        out.labels.push_back(
            label_for(*out.twin, expected, twin_identical && genuine_present ? "genuine+twin" : "twin", documented_fp));
    }
    std::sort(out.labels.begin(), out.labels.end(), [](const GroundTruthLabel& a, const GroundTruthLabel& b) {
        return std::tie(a.bssid, a.fingerprint_id) < std::tie(b.bssid, b.fingerprint_id);
    });
    return out;
}

GeneratedCapture generate_baseline(const Scenario& scenario, std::uint64_t seed)
{
    Scenario baseline = scenario;
    baseline.twin.reset();
    baseline.name = scenario.name + "/baseline";
    return generate(baseline, seed ^ 0x9e3779b97f4a7c15ull);
}

namespace {

Scenario colocation(const DeviceProfile& twin_profile)
{
    Scenario s;
    s.name = "colocation-" + twin_profile.name;
    s.description = "Genuine CSE plus a " + twin_profile.display_name + " twin placed nearby with a stronger signal";
    s.genuine = {std::string(kGenuineProfile), -50};
    EmitterSpec twin{twin_profile.name, -40};
    // The attacker sets every field the device lets them configure.
    for (auto field : twin_profile.forgeable) {
        if (field == F::Bssid) {
            twin.bssid_policy = BssidPolicy::SameAsGenuine;
        } else {
            twin.forge_from_genuine.insert(field);
        }
    }
    s.twin = twin;
    s.placement = Placement::Colocation;
    return s;
}

const Bytes& wpa2_psk_rsn()
{
    static const Bytes rsn = from_hex("0100000fac040100000fac040100000fac020c00");
    return rsn;
}

Scenario same_oem(std::string name, std::string description, Placement placement, int twin_peak,
                  std::set<F> forge, BssidPolicy bssid)
{
    Scenario s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.genuine = {std::string(kGenuineProfile), -50};
    s.genuine.overrides[F::Rsn] = wpa2_psk_rsn();
    EmitterSpec twin{std::string(kGenuineProfile), twin_peak};
    twin.forge_from_genuine = std::move(forge);
    twin.bssid_policy = bssid;
    s.twin = twin;
    s.placement = placement;
    return s;
}

std::vector<Scenario> make_matrix()
{
    std::vector<Scenario> m;
    {
        Scenario s;
        s.name = "genuine-only";
        s.description = "Normal operation: only the genuine CSE access point is on the air";
        s.genuine = {std::string(kGenuineProfile), -50};
        m.push_back(s);
    }
    for (const auto& row : device_matrix()) {
        m.push_back(colocation(find_profile(row.profile)));
    }
    m.push_back(same_oem("same-oem-bssid-forged-no-rsn",
                         "Same model as the WPA2 genuine AP; BSSID forged, security left off, stronger signal",
                         Placement::Colocation, -40, {F::Ssid}, BssidPolicy::SameAsGenuine));
    m.push_back(same_oem("same-oem-bssid-last-digit",
                         "Same model with matching RSN; last BSSID digit changed to allow same-channel operation",
                         Placement::Colocation, -40, {F::Ssid, F::Rsn}, BssidPolicy::LastDigitChanged));
    m.push_back(same_oem("same-oem-ssi-exceeded",
                         "Same model with matching RSN and BSSID substituted for the genuine AP at -40 dBm",
                         Placement::Substitution, -40, {F::Ssid, F::Rsn}, BssidPolicy::SameAsGenuine));
    m.push_back(same_oem("same-oem-substitution-identical-ssi",
                         "Same model, identical fields and identical signal strength: the known false positive",
                         Placement::Substitution, -50, {F::Ssid, F::Rsn}, BssidPolicy::SameAsGenuine));
    {
        Scenario s = colocation(find_profile("dlink-dir615"));
        s.name = "substitution-dlink-dir615";
        s.description = "Genuine CSE replaced by a D-Link twin at the same location";
        s.placement = Placement::Substitution;
        s.twin->peak_ssi_dbm = -50;
        m.push_back(s);
    }
    {
        Scenario s = colocation(find_profile("redmi-note-4"));
        s.name = "remote-location-redmi-note-4";
        s.description = "Genuine CSE gone; a Redmi hotspot twin appears elsewhere with a weak signal";
        s.placement = Placement::RemoteLocation;
        s.twin->peak_ssi_dbm = -72;
        m.push_back(s);
    }
    {
        Scenario s = colocation(find_profile("sony-xperia-z"));
        s.name = "unregistered-sony-xperia-z";
        s.description = "A hotspot with its own SSID next to the genuine AP";
        s.twin->forge_from_genuine.clear();
        s.twin->bssid_policy = BssidPolicy::ProfileDefault;
        m.push_back(s);
    }
    return m;
}

} // namespace

const std::vector<Scenario>& scenario_matrix()
{
    static const std::vector<Scenario> matrix = make_matrix();
    return matrix;
}

std::optional<Scenario> builtin_scenario(std::string_view name)
{
    for (const auto& s : scenario_matrix()) {
        if (s.name == name) {
            return s;
        }
    }
    return std::nullopt;
}

std::vector<std::string> builtin_scenario_names()
{
    std::vector<std::string> names;
    for (const auto& s : scenario_matrix()) {
        names.push_back(s.name);
    }
    return names;
}

namespace {

using nlohmann::json;

std::optional<Bytes> override_value(F field, const json& v)
{
    if (v.is_null()) {
        return std::nullopt;
    }
    if (v.is_number_integer()) {
        const auto n = v.get<std::int64_t>();
        Bytes out;
        switch (field) {
        case F::BeaconInterval:
        case F::CapabilityInfo:
            if (n < 0 || n > 0xffff) {
                throw Error(Errc::InvalidScenario, std::string(to_string(field)) + " out of 16-bit range");
            }
            append_le16(out, static_cast<std::uint16_t>(n));
            return out;
        case F::DtimPeriod:
        case F::TimLength:
            if (n < 0 || n > 0xff) {
                throw Error(Errc::InvalidScenario, std::string(to_string(field)) + " out of 8-bit range");
            }
            return Bytes{static_cast<std::uint8_t>(n)};
        default:
            throw Error(Errc::InvalidScenario, std::string(to_string(field)) + " takes a hex string");
        }
    }
    if (!v.is_string()) {
        throw Error(Errc::InvalidScenario, std::string(to_string(field)) + " must be hex, integer or null");
    }
    const auto text = v.get<std::string>();
    if (field == F::Ssid) {
        return to_bytes(text);
    }
    if (field == F::Bssid) {
        const auto mac = MacAddress::parse(text);
        return Bytes(mac.octets().begin(), mac.octets().end());
    }
    return from_hex(text);
}

EmitterSpec parse_emitter(const json& j, bool is_twin)
{
    EmitterSpec spec;
    spec.profile = j.at("profile").get<std::string>();
    spec.peak_ssi_dbm = j.value("peak_ssi_dbm", is_twin ? -40 : -50);
    spec.channel_mhz = j.value("channel_mhz", std::uint16_t{2437});
    if (j.contains("overrides")) {
        for (const auto& [key, value] : j.at("overrides").items()) {
            const auto field = parse_fingerprint_field(key);
            if (!field) {
                throw Error(Errc::InvalidScenario, "unknown field '" + key + "' in overrides");
            }
            spec.overrides[*field] = override_value(*field, value);
        }
    }
    if (!is_twin) {
        return spec;
    }
    const auto& profile = find_profile(spec.profile);
    if (j.contains("forge")) {
        const auto& forge = j.at("forge");
        if (forge.is_string() && forge.get<std::string>() == "all") {
            for (auto f : profile.forgeable) {
                if (f == F::Bssid) {
                    spec.bssid_policy = BssidPolicy::SameAsGenuine;
                } else {
                    spec.forge_from_genuine.insert(f);
                }
            }
        } else {
            for (const auto& name : forge) {
                const auto field = parse_fingerprint_field(name.get<std::string>());
                if (!field) {
                    throw Error(Errc::InvalidScenario, "unknown field '" + name.get<std::string>() + "' in forge");
                }
                if (*field == F::Bssid) {
                    spec.bssid_policy = BssidPolicy::SameAsGenuine;
                } else {
                    spec.forge_from_genuine.insert(*field);
                }
            }
        }
    }
    if (j.contains("bssid")) {
        const auto mode = j.at("bssid").get<std::string>();
        if (mode == "same") {
            spec.bssid_policy = BssidPolicy::SameAsGenuine;
        } else if (mode == "last-digit") {
            spec.bssid_policy = BssidPolicy::LastDigitChanged;
        } else if (mode == "default") {
            spec.bssid_policy = BssidPolicy::ProfileDefault;
        } else {
            spec.overrides[F::Bssid] = override_value(F::Bssid, mode);
        }
    }
    return spec;
}

} // namespace

Scenario parse_scenario_json(std::string_view text)
{
    try {
        const json j = json::parse(text);
        Scenario s;
        s.name = j.value("name", std::string("custom"));
        s.description = j.value("description", std::string());
        s.genuine = parse_emitter(j.at("genuine"), false);
        if (j.contains("twin") && !j.at("twin").is_null()) {
            s.twin = parse_emitter(j.at("twin"), true);
        }
        const auto placement = j.value("placement", std::string("colocation"));
        const auto parsed = parse_placement(placement);
        if (!parsed) {
            throw Error(Errc::InvalidScenario, "unknown placement '" + placement + "'");
        }
        s.placement = *parsed;
        s.jitter_db = j.value("jitter_db", 3);
        s.duration_ms = j.value("duration_ms", std::uint32_t{10'000});
        s.genuine_label = j.value("genuine_label", std::string("CSE"));
        validate(s);
        return s;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidScenario, std::string("scenario JSON: ") + e.what());
    }
}

Scenario load_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open scenario file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_json(buffer.str());
}

std::string format_labels(const std::vector<GroundTruthLabel>& labels)
{
    std::ostringstream out;
    out << "# bssid fingerprint_id expected role [documented-fp]\n";
    for (const auto& l : labels) {
        out << l.bssid.to_string() << ' ' << l.fingerprint_id << ' ' << to_string(l.expected) << ' ' << l.role;
        if (l.documented_false_positive) {
            out << " documented-fp";
        }
        out << '\n';
    }
    return out.str();
}

std::vector<GroundTruthLabel> parse_labels(std::string_view text)
{
    std::vector<GroundTruthLabel> labels;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::string bssid, id, expected, role, flag;
        fields >> bssid >> id >> expected >> role >> flag;
        const auto kind = parse_verdict_kind(expected);
        if (bssid.empty() || id.size() != 16 || !kind || role.empty()) {
            throw Error(Errc::MalformedRecord, "labels line " + std::to_string(line_no) + ": '" + line + "'");
        }
        labels.push_back({MacAddress::parse(bssid), id, *kind, role, flag == "documented-fp"});
    }
    return labels;
}

} // namespace etguard::sim
