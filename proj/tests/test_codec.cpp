#include "etguard/error.hpp"
#include "etguard/pcap.hpp"
#include "etguard/radiotap.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace etguard;
using etguard::testing::Gen;

namespace {

Bytes bare_dot11_beacon(const BeaconFrame& f)
{
    const Bytes full = encode_beacon(f);
    return Bytes(full.begin() + f.radiotap.header_length, full.end());
}

BeaconFrame cse_beacon()
{
    BeaconFrame f;
    f.radiotap = make_radiotap(std::int8_t{-50});
    f.mac.addr2 = f.mac.addr3 = MacAddress::parse("00:1e:58:4c:a1:30");
    f.beacon_interval = 0x0064;
    f.elements = {{ie::kSsid, to_bytes("CSE")}};
    return f;
}

Errc error_code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::Io;
}

} // namespace

TEST_SUITE("radiotap")
{
    TEST_CASE("empty present mask")
    {
        const Bytes h{0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00};
        const auto [info, offset] = decode_radiotap(h);
        CHECK_FALSE(info.signal_dbm.has_value());
        CHECK(offset == 8);
    }

    TEST_CASE("signal only")
    {
        const Bytes h{0x00, 0x00, 0x09, 0x00, 0x20, 0x00, 0x00, 0x00, 0xC5};
        const auto [info, offset] = decode_radiotap(h);
        REQUIRE(info.signal_dbm.has_value());
        CHECK(*info.signal_dbm == -59);
        CHECK(offset == 9);
    }

    TEST_CASE("rate, channel and signal use aligned offsets")
    {
        // rate @8, pad @9, channel @10..13, signal @14
        const Bytes h{0x00, 0x00, 0x0F, 0x00, 0x2C, 0x00, 0x00, 0x00, 0x02, 0x00, 0x6C, 0x09, 0xA0, 0x00, 0xBA};
        CHECK(testing::radiotap_walk_offsets(0x2C)[5] == std::optional<std::size_t>(14));
        const auto [info, offset] = decode_radiotap(h);
        CHECK(offset == 15);
        REQUIRE(info.signal_dbm.has_value());
        CHECK(*info.signal_dbm == -70);
        CHECK(info.rate == std::optional<std::uint8_t>(0x02));
        REQUIRE(info.channel.has_value());
        CHECK(info.channel->frequency_mhz == 2412);
        CHECK(info.channel->flags == 0x00A0);
        CHECK(encode_radiotap(info) == h);
        CHECK(encode_radiotap(make_radiotap(std::int8_t{-70}, RadiotapChannel{2412, 0x00A0}, std::uint8_t{2})) == h);
    }

    TEST_CASE("offsets agree with the byte walk for every subset of the supported bits")
    {
        for (std::uint32_t present = 0; present < 64; ++present) {
            CAPTURE(present);
            const auto walk = testing::radiotap_walk_offsets(present);
            for (unsigned bit = 0; bit < 6; ++bit) {
                CHECK(radiotap_field_offset(present, bit) == walk[bit]);
            }
            const Bytes h = testing::radiotap_walk_build(present);
            const auto [info, offset] = decode_radiotap(h);
            CHECK(offset == h.size());
            if (walk[5]) {
                REQUIRE(info.signal_dbm.has_value());
                CHECK(static_cast<std::uint8_t>(*info.signal_dbm) == h[*walk[5]]);
            } else {
                CHECK_FALSE(info.signal_dbm.has_value());
            }
            if (walk[3]) {
                REQUIRE(info.channel.has_value());
                CHECK(info.channel->frequency_mhz == load_le16(h, *walk[3]));
            }
            CHECK(encode_radiotap(info) == h);
        }
    }

    TEST_CASE("truncated header")
    {
        const Bytes h{0x00, 0x00, 0x0F, 0x00, 0x2C, 0x00, 0x00, 0x00, 0x02};
        CHECK(error_code_of([&] { decode_radiotap(h); }) == Errc::TruncatedHeader);
        CHECK(error_code_of([&] { decode_radiotap(Bytes{0, 0, 8}); }) == Errc::TruncatedHeader);
    }

    TEST_CASE("unknown bits above the signal field keep the signal")
    {
        // bit 5 and bit 6 (unknown, after signal): signal offset still computable
        const Bytes h{0x00, 0x00, 0x0A, 0x00, 0x60, 0x00, 0x00, 0x00, 0xC5, 0x00};
        const auto [info, offset] = decode_radiotap(h);
        CHECK(info.signal_dbm == std::optional<std::int8_t>(-59));
        CHECK(offset == 10);
        CHECK(error_code_of([&] { encode_radiotap(info); }) == Errc::UnsupportedPresenceBit);
    }

    TEST_CASE("chained present words are skipped")
    {
        // word 0: signal + extension; word 1: nothing
        const Bytes h{0x00, 0x00, 0x0D, 0x00, 0x20, 0x00, 0x00, 0x80, 0x00, 0x00, 0x00, 0x00, 0xB0};
        const auto [info, offset] = decode_radiotap(h);
        CHECK(info.present_words.size() == 2);
        CHECK(info.signal_dbm == std::optional<std::int8_t>(-80));
        CHECK(offset == 13);
    }
}

TEST_SUITE("beacon")
{
    TEST_CASE("minimal beacon with only an SSID")
    {
        const auto decoded = decode_beacon(encode_beacon(cse_beacon()));
        REQUIRE(decoded.elements.size() == 1);
        CHECK(decoded.elements[0].element_id == 0);
        CHECK(decoded.elements[0].payload == to_bytes("CSE"));
    }

    TEST_CASE("fingerprinted element ids are recovered in order")
    {
        auto f = cse_beacon();
        f.elements = {{0, to_bytes("CSE")},   {1, from_hex("82848b96")}, {5, from_hex("00010000")},
                      {7, to_bytes("IN ")},   {48, from_hex("0100")},    {50, from_hex("3048606c")},
                      {221, from_hex("0050f2020101")}};
        const auto decoded = decode_beacon(encode_beacon(f));
        std::vector<int> ids;
        for (const auto& e : decoded.elements) {
            ids.push_back(e.element_id);
        }
        CHECK(ids == std::vector<int>{0, 1, 5, 7, 48, 50, 221});
        CHECK(decoded == f);
    }

    TEST_CASE("beacon interval 0x0064 is 100 TU, 102.4 ms")
    {
        const auto decoded = decode_beacon(encode_beacon(cse_beacon()));
        CHECK(decoded.beacon_interval == 100);
        CHECK(decoded.beacon_interval_ms() == doctest::Approx(102.4));
    }

    TEST_CASE("frame without elements has a 12-byte body")
    {
        auto f = cse_beacon();
        f.elements.clear();
        CHECK(bare_dot11_beacon(f).size() == 24 + 12);
    }

    TEST_CASE("SSID length boundary")
    {
        auto f = cse_beacon();
        f.elements = {{ie::kSsid, Bytes(32, 'a')}};
        CHECK_NOTHROW(encode_beacon(f));
        f.elements = {{ie::kSsid, Bytes(33, 'a')}};
        CHECK(error_code_of([&] { encode_beacon(f); }) == Errc::FieldOverflow);
        f.elements = {{221, Bytes(256, 1)}};
        CHECK(error_code_of([&] { encode_beacon(f); }) == Errc::FieldOverflow);
    }

    TEST_CASE("duplicate elements are kept in wire order")
    {
        auto f = cse_beacon();
        f.elements = {{221, {1}}, {0, to_bytes("CSE")}, {221, {2}}, {221, {1}}};
        CHECK(decode_beacon(encode_beacon(f)).elements == f.elements);
    }

    TEST_CASE("decode errors")
    {
        const auto good = encode_beacon(cse_beacon());
        const std::size_t rt_len = good[2] | (good[3] << 8);
        auto not_beacon = good;
        not_beacon[rt_len] = 0x40; // probe request
        CHECK(error_code_of([&] { decode_beacon(not_beacon); }) == Errc::NotABeacon);

        auto overrun = good;
        overrun[overrun.size() - 4] = 0x40; // SSID length beyond the frame
        CHECK(error_code_of([&] { decode_beacon(overrun); }) == Errc::MalformedIE);

        const Bytes truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(rt_len) + 20);
        CHECK(error_code_of([&] { decode_beacon(truncated); }) == Errc::TruncatedFrame);
    }

    TEST_CASE("trailing FCS is verified and stripped")
    {
        auto f = cse_beacon();
        f.radiotap = make_radiotap(std::int8_t{-50}, std::nullopt, std::nullopt, std::nullopt, kRadiotapFlagFcs);
        auto bytes = encode_beacon(f);
        CHECK(decode_beacon(bytes) == f);
        bytes.back() ^= 0xff;
        CHECK(error_code_of([&] { decode_beacon(bytes); }) == Errc::BadFcs);
    }

    TEST_CASE("sequence number keeps 12 bits and the fragment 4")
    {
        auto f = cse_beacon();
        f.mac.sequence_number = 4095;
        f.mac.fragment_number = 15;
        const auto d = decode_beacon(encode_beacon(f));
        CHECK(d.mac.sequence_number == 4095);
        CHECK(d.mac.fragment_number == 15);
    }

    TEST_CASE("round trip over random frames")
    {
        Gen g(0xbeac0);
        for (int i = 0; i < 1000; ++i) {
            const auto f = testing::random_beacon(g);
            const auto decoded = decode_beacon(encode_beacon(f));
            CHECK(decoded == f);
            if (decoded != f) {
                break;
            }
        }
    }
}

TEST_SUITE("deauth")
{
    TEST_CASE("broadcast addressing")
    {
        const auto d = DeauthFrame::broadcast_for(MacAddress::parse("aa:bb:cc:dd:ee:01"), 1);
        CHECK(d.mac.addr1 == MacAddress::broadcast());
        CHECK(d.mac.addr2 == MacAddress::parse("aa:bb:cc:dd:ee:01"));
        CHECK(d.mac.addr3 == MacAddress::parse("aa:bb:cc:dd:ee:01"));
        CHECK(encode_deauth(d)[0] == 0xC0);
    }

    TEST_CASE("reason code is little-endian at the tail")
    {
        const auto bytes = encode_deauth(DeauthFrame::broadcast_for(MacAddress::parse("aa:bb:cc:dd:ee:01"), 0x0007));
        REQUIRE(bytes.size() == 26);
        CHECK(bytes[24] == 0x07);
        CHECK(bytes[25] == 0x00);
    }

    TEST_CASE("round trip")
    {
        Gen g(7);
        for (int i = 0; i < 200; ++i) {
            const auto d = testing::random_deauth(g);
            CHECK(decode_deauth(encode_deauth(d)) == d);
        }
        CHECK(error_code_of([] { decode_deauth(Bytes(10, 0)); }) == Errc::TruncatedFrame);
    }
}

TEST_SUITE("mac")
{
    TEST_CASE("parse and print")
    {
        CHECK(MacAddress::parse("AA-BB-cc-dd-ee-01").to_string() == "aa:bb:cc:dd:ee:01");
        CHECK_THROWS_AS(MacAddress::parse("aa:bb:cc"), Error);
        CHECK_THROWS_AS(MacAddress::parse("zz:bb:cc:dd:ee:01"), Error);
    }
}

TEST_SUITE("pcap")
{
    TEST_CASE("header-only capture is empty")
    {
        const auto bytes = pcap_bytes(kLinkTypeRadiotap, {});
        const auto result = read_capture_bytes(bytes);
        CHECK(result.beacons.empty());
        CHECK(result.diagnostics.empty());
    }

    TEST_CASE("three beacons and a data frame")
    {
        std::vector<CaptureRecord> records;
        for (int i = 0; i < 3; ++i) {
            auto f = cse_beacon();
            f.mac.sequence_number = static_cast<std::uint16_t>(i);
            records.push_back({static_cast<std::uint64_t>(1000 * i), encode_beacon(f)});
        }
        Bytes data = encode_radiotap(make_radiotap(std::int8_t{-60}));
        const Bytes dot11_data{0x08, 0x02, 0, 0, 1, 2, 3, 4, 5, 6, 1, 2, 3, 4, 5, 6, 1, 2, 3, 4, 5, 6, 0, 0, 0xaa, 0xaa};
        data.insert(data.end(), dot11_data.begin(), dot11_data.end());
        records.insert(records.begin() + 1, CaptureRecord{500, data});
        const auto result = read_capture_bytes(pcap_bytes(kLinkTypeRadiotap, records));
        CHECK(result.beacons.size() == 3);
        CHECK(result.skipped_non_beacon == 1);
        CHECK(result.packets == 4);
    }

    TEST_CASE("corrupt packets are skipped with a diagnostic")
    {
        auto good = encode_beacon(cse_beacon());
        Bytes bad = good;
        bad.at(good.size() - 4) = 0x40;
        const std::vector<CaptureRecord> records{{1, good}, {2, bad}, {3, good}};
        const auto result = read_capture_bytes(pcap_bytes(kLinkTypeRadiotap, records), "fixture.pcap");
        CHECK(result.beacons.size() == 2);
        CHECK(result.skipped_corrupt == 1);
        REQUIRE(result.diagnostics.size() == 1);
        CHECK(result.diagnostics[0].find("fixture.pcap") != std::string::npos);
    }

    TEST_CASE("write then read returns the same frames")
    {
        Gen g(42);
        std::vector<CapturedBeacon> frames;
        for (int i = 0; i < 50; ++i) {
            frames.push_back({1'600'000'000'000'000ull + static_cast<std::uint64_t>(i) * 102'400, testing::random_beacon(g)});
        }
        std::filesystem::create_directories(ETGUARD_TEST_TMP);
        const auto path = std::filesystem::path(ETGUARD_TEST_TMP) / "roundtrip.pcap";
        write_capture(std::span<const CapturedBeacon>(frames), path);
        const auto result = read_capture(path);
        CHECK(result.beacons == frames);
        CHECK(result.diagnostics.empty());
    }

    TEST_CASE("byte order and timestamp resolution variants")
    {
        const auto frame = encode_beacon(cse_beacon());
        auto build = [&](bool big_endian, bool nanos) {
            Bytes out;
            auto put32 = [&](std::uint32_t v) {
                for (int i = 0; i < 4; ++i) {
                    const int shift = big_endian ? 8 * (3 - i) : 8 * i;
                    out.push_back(static_cast<std::uint8_t>(v >> shift));
                }
            };
            auto put16 = [&](std::uint16_t v) {
                for (int i = 0; i < 2; ++i) {
                    const int shift = big_endian ? 8 * (1 - i) : 8 * i;
                    out.push_back(static_cast<std::uint8_t>(v >> shift));
                }
            };
            put32(nanos ? 0xa1b23c4d : 0xa1b2c3d4);
            put16(2);
            put16(4);
            put32(0);
            put32(0);
            put32(65535);
            put32(kLinkTypeRadiotap);
            put32(7);                              // seconds
            put32(nanos ? 250'000'000 : 250'000); // fraction
            put32(static_cast<std::uint32_t>(frame.size()));
            put32(static_cast<std::uint32_t>(frame.size()));
            out.insert(out.end(), frame.begin(), frame.end());
            return out;
        };
        for (bool be : {false, true}) {
            for (bool ns : {false, true}) {
                CAPTURE(be);
                CAPTURE(ns);
                const auto result = read_capture_bytes(build(be, ns));
                REQUIRE(result.beacons.size() == 1);
                CHECK(result.beacons[0].capture_time_us == 7'250'000);
            }
        }
    }

    TEST_CASE("file-level errors")
    {
        CHECK(error_code_of([] { read_capture_bytes(Bytes(24, 0)); }) == Errc::BadMagic);
        CHECK(error_code_of([] { read_capture_bytes(pcap_bytes(kLinkTypeIeee80211, {})); }) ==
              Errc::UnsupportedLinkType);
    }

    TEST_CASE("truncated trailing record is reported")
    {
        auto bytes = pcap_bytes(kLinkTypeRadiotap, std::vector<CaptureRecord>{{1, encode_beacon(cse_beacon())}});
        bytes.resize(bytes.size() - 5);
        const auto result = read_capture_bytes(bytes);
        CHECK(result.beacons.empty());
        CHECK_FALSE(result.diagnostics.empty());
    }

    TEST_CASE("merge orders by capture time and keeps source order on ties")
    {
        auto a = cse_beacon();
        auto b = cse_beacon();
        b.mac.sequence_number = 9;
        const auto merged = merge_by_time({{{30, a}, {10, a}}, {{10, b}, {20, b}}});
        std::vector<std::uint64_t> times;
        for (const auto& m : merged) {
            times.push_back(m.capture_time_us);
        }
        CHECK(times == std::vector<std::uint64_t>{10, 10, 20, 30});
        CHECK(merged[0].frame.mac.sequence_number == 0);
        CHECK(merged[1].frame.mac.sequence_number == 9);
    }
}
