// Built-in device profiles and the field-relation matrix for the twelve
// evil-twin sources. Byte values are representative of each device class;
// what matters is how each field relates to the genuine "CSE" AP.

#include "etguard/error.hpp"
#include "etguard/simulator.hpp"

#include <initializer_list>

namespace etguard::sim {

namespace {

using F = FingerprintField;

Bytes vendor_elements(std::initializer_list<std::string_view> payloads_hex)
{
    Bytes out;
    for (auto hex : payloads_hex) {
        const Bytes encoded = encode_information_element({ie::kVendorSpecific, from_hex(hex)});
        out.insert(out.end(), encoded.begin(), encoded.end());
    }
    return out;
}

Fingerprint make_defaults(std::string_view ssid, std::string_view bssid, std::uint16_t beacon_interval,
                          std::uint16_t capability_info, std::string_view rates,
                          std::optional<std::pair<std::uint8_t, std::uint8_t>> tim_and_dtim,
                          std::optional<std::string_view> country, std::optional<std::string_view> extended_rates,
                          std::optional<Bytes> vendor)
{
    Fingerprint fp;
    fp.ssid = to_bytes(ssid);
    fp.bssid = MacAddress::parse(bssid);
    fp.beacon_interval = beacon_interval;
    fp.capability_info = capability_info;
    fp.supported_rates = from_hex(rates);
    if (tim_and_dtim) {
        fp.tim_length = tim_and_dtim->first;
        fp.dtim_period = tim_and_dtim->second;
    }
    if (country) {
        fp.country = from_hex(*country);
    }
    if (extended_rates) {
        fp.extended_rates = from_hex(*extended_rates);
    }
    fp.vendor_specific = std::move(vendor);
    return fp;
}

constexpr std::string_view kWmmParameterA = "0050f2020101800003a4000027a4000042435e0062322f00";
constexpr std::string_view kWmmParameterB = "0050f2020101000003a4000027a4000042435e0062322f00";
constexpr std::string_view kWmmInfo = "0050f2020001"; // short WMM information element
constexpr std::pair<std::uint8_t, std::uint8_t> kHardwareTim{4, 1};
constexpr std::pair<std::uint8_t, std::uint8_t> kSoftwareTim{4, 2};
constexpr std::pair<std::uint8_t, std::uint8_t> kHotspotTim{9, 2};

std::vector<DeviceProfile> make_profiles()
{
    const std::set<F> hardware_forgeable{F::Ssid, F::Bssid, F::BeaconInterval, F::Rsn};
    const std::set<F> locked_down{F::Ssid, F::Bssid};
    std::vector<DeviceProfile> p;

    p.push_back({"cse-ap", "CSE (genuine AP)", DeviceCategory::Hardware,
                 make_defaults("CSE", "00:1e:58:4c:a1:30", 100, 0x0421, "82848b960c121824", kHardwareTim,
                               std::nullopt, "3048606c",
                               vendor_elements({kWmmParameterA, "00101802000010000000"})),
                 hardware_forgeable});

    p.push_back({"dlink-dir615", "D-Link DIR-615 Wireless-N300 Router", DeviceCategory::Hardware,
                 make_defaults("dlink", "1c:7e:e5:11:22:01", 100, 0x0431, "82848b962430486c", kHardwareTim,
                               std::nullopt, "0c121860", vendor_elements({"00037f01010000ff7f", kWmmParameterB})),
                 hardware_forgeable});

    p.push_back({"digisol-dg-hr1400", "Digisol DG-HR1400 Wireless Broadband Router", DeviceCategory::Hardware,
                 make_defaults("DIGISOL", "00:17:7c:aa:bb:02", 200, 0x0401, "82848b961224486c", kHardwareTim,
                               std::nullopt, "0c183060", vendor_elements({"000c4304000000", kWmmParameterB})),
                 hardware_forgeable});

    p.push_back({"tplink-tl-wr841n", "TP-Link TL-WR841N 300Mbps Wireless-N Router", DeviceCategory::Hardware,
                 make_defaults("TP-LINK_2C10", "50:c7:bf:2c:10:03", 100, 0x0421, "82848b96", kHardwareTim,
                               std::nullopt, "0c12182430486c60",
                               vendor_elements({"00037f0101000aff7f", "001d0f020010", kWmmParameterA})),
                 hardware_forgeable});

    p.push_back({"mi-3c", "Mi 3C Router", DeviceCategory::Hardware,
                 make_defaults("Xiaomi_3C", "28:6c:07:33:44:04", 100, 0x0c21, "82848b968c129824", std::pair<std::uint8_t, std::uint8_t>{4, 2},
                               "434e20010d14", "b048606c", vendor_elements({"000ce7080000", kWmmParameterB})),
                 hardware_forgeable});

    p.push_back({"hostapd", "hostapd", DeviceCategory::Software,
                 make_defaults("test", "f4:8c:50:aa:00:05", 200, 0x0401, "82848b96", kSoftwareTim, std::nullopt,
                               std::nullopt, std::nullopt),
                 {F::Ssid, F::Bssid, F::BeaconInterval, F::SupportedRates, F::DtimPeriod, F::Country, F::Rsn}});

    p.push_back({"unity-network-manager", "unity network manager", DeviceCategory::Software,
                 make_defaults("ubuntu", "9c:b6:d0:aa:00:06", 100, 0x0001, "02040b160c121824", kSoftwareTim,
                               std::nullopt, "b048606c", vendor_elements({kWmmInfo})),
                 locked_down});

    p.push_back({"ap-hotspot", "ap-hotspot", DeviceCategory::Software,
                 make_defaults("myhotspot", "00:1b:77:aa:00:07", 200, 0x0021, "82848b0c1296 1824", kSoftwareTim,
                               std::nullopt, "30c8606c", vendor_elements({"0050f202000180"})),
                 locked_down});

    p.push_back({"aircrack-ng", "aircrack-ng", DeviceCategory::Software,
                 make_defaults("default", "00:c0:ca:aa:00:08", 100, 0x0001, "82848b962430486c", std::nullopt,
                               "555320010b1e", std::nullopt, std::nullopt),
                 locked_down});

    p.push_back({"sony-xperia-z", "Sony Xperia Z", DeviceCategory::MobileHotspot,
                 make_defaults("AndroidAP", "84:8e:df:aa:00:09", 100, 0x0431, "82848b960c129824", kHotspotTim,
                               std::nullopt, "30486c60", vendor_elements({"00101802020000", kWmmParameterB})),
                 locked_down});

    p.push_back({"redmi-note-4", "Redmi Note 4", DeviceCategory::MobileHotspot,
                 make_defaults("Redmi", "64:cc:2e:aa:00:0a", 100, 0x0421, "82848b968c129824", kHotspotTim,
                               std::nullopt, "b0c8606c", vendor_elements({"00a0c600", kWmmParameterB})),
                 locked_down});

    p.push_back({"moto-g5-plus", "Moto G5 Plus", DeviceCategory::MobileHotspot,
                 make_defaults("Moto G (5) Plus", "60:be:b5:aa:00:0b", 100, 0x0411, "82848b96 8c12 9824", kHotspotTim,
                               std::nullopt, "30486c", vendor_elements({"00a0c600010203", kWmmParameterA})),
                 locked_down});

    p.push_back({"lenovo-tab-a7", "Lenovo Tab A7", DeviceCategory::MobileHotspot,
                 make_defaults("Lenovo A7", "ec:89:f5:aa:00:0c", 100, 0x0401, "8c129824b048606c", kHotspotTim,
                               std::nullopt, "82848b96", vendor_elements({"000ce70800", kWmmInfo})),
                 locked_down});
    return p;
}

} // namespace

const std::vector<DeviceProfile>& builtin_profiles()
{
    static const std::vector<DeviceProfile> profiles = make_profiles();
    return profiles;
}

const DeviceProfile& find_profile(std::string_view name)
{
    for (const auto& p : builtin_profiles()) {
        if (p.name == name) {
            return p;
        }
    }
    std::string names;
    for (const auto& p : builtin_profiles()) {
        names += (names.empty() ? "" : ", ") + p.name;
    }
    throw Error(Errc::InvalidScenario, "unknown device profile '" + std::string(name) + "' (known: " + names + ")");
}

std::string_view to_string(DeviceCategory category) noexcept
{
    switch (category) {
    case DeviceCategory::Hardware: return "hardware";
    case DeviceCategory::Software: return "software";
    case DeviceCategory::MobileHotspot: return "mobile-hotspot";
    }
    return "unknown";
}

std::string_view to_string(CellRelation relation) noexcept
{
    switch (relation) {
    case CellRelation::Same: return "Yes";
    case CellRelation::ForgedSame: return "Yes(forged)";
    case CellRelation::Differs: return "No";
    case CellRelation::PresenceDiffers: return "No(presence)";
    case CellRelation::BothAbsent: return "NA";
    }
    return "?";
}

std::string_view to_string(MatrixColumn column) noexcept
{
    switch (column) {
    case MatrixColumn::BeaconLength: return "beacon_length";
    case MatrixColumn::Ssid: return "ssid";
    case MatrixColumn::Bssid: return "bssid";
    case MatrixColumn::BeaconInterval: return "beacon_interval";
    case MatrixColumn::CapabilityInfo: return "capability_info";
    case MatrixColumn::SupportedRates: return "supported_rates";
    case MatrixColumn::TimLength: return "tim_length";
    case MatrixColumn::DtimPeriod: return "dtim_period";
    case MatrixColumn::Country: return "country";
    case MatrixColumn::Rsn: return "rsn";
    case MatrixColumn::ExtendedRates: return "extended_rates";
    case MatrixColumn::VendorSpecific: return "vendor_specific";
    }
    return "?";
}

std::optional<FingerprintField> column_field(MatrixColumn column) noexcept
{
    switch (column) {
    case MatrixColumn::BeaconLength: return std::nullopt;
    case MatrixColumn::Ssid: return F::Ssid;
    case MatrixColumn::Bssid: return F::Bssid;
    case MatrixColumn::BeaconInterval: return F::BeaconInterval;
    case MatrixColumn::CapabilityInfo: return F::CapabilityInfo;
    case MatrixColumn::SupportedRates: return F::SupportedRates;
    case MatrixColumn::TimLength: return F::TimLength;
    case MatrixColumn::DtimPeriod: return F::DtimPeriod;
    case MatrixColumn::Country: return F::Country;
    case MatrixColumn::Rsn: return F::Rsn;
    case MatrixColumn::ExtendedRates: return F::ExtendedRates;
    case MatrixColumn::VendorSpecific: return F::VendorSpecific;
    }
    return std::nullopt;
}

const std::vector<DeviceMatrixRow>& device_matrix()
{
    constexpr auto S = CellRelation::Same;
    constexpr auto R = CellRelation::ForgedSame;
    constexpr auto D = CellRelation::Differs;
    constexpr auto P = CellRelation::PresenceDiffers;
    constexpr auto N = CellRelation::BothAbsent;
    // Columns: length, SSID, BSSID, interval, capability, rates, TIM length,
    // DTIM period, country, RSN, extended rates, vendor.
    static const std::vector<DeviceMatrixRow> rows{
        {"dlink-dir615", {D, R, R, S, D, D, S, S, N, N, D, D}},
        {"digisol-dg-hr1400", {D, R, R, R, D, D, S, S, N, N, D, D}},
        {"tplink-tl-wr841n", {D, R, R, S, S, D, S, S, N, N, D, D}},
        {"mi-3c", {D, R, R, S, D, D, S, D, P, N, D, D}},
        {"hostapd", {D, R, R, R, D, R, S, R, N, N, P, P}},
        {"unity-network-manager", {D, R, R, S, D, D, S, D, N, N, D, D}},
        {"ap-hotspot", {D, R, R, D, D, D, S, D, N, N, D, D}},
        {"aircrack-ng", {D, R, R, S, D, D, P, P, P, N, P, P}},
        {"sony-xperia-z", {D, R, R, S, D, D, D, D, N, N, D, D}},
        {"redmi-note-4", {D, R, R, S, S, D, D, D, N, N, D, D}},
        {"moto-g5-plus", {D, R, R, S, D, D, D, D, N, N, D, D}},
        {"lenovo-tab-a7", {D, R, R, S, D, D, D, D, N, N, D, D}},
    };
    return rows;
}

} // namespace etguard::sim
