#include "etguard/error.hpp"
#include "etguard/store.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

using namespace etguard;
using etguard::testing::Gen;

namespace {

struct FakeClock {
    std::shared_ptr<std::int64_t> now = std::make_shared<std::int64_t>(1000);
    ClockMs fn() const
    {
        auto n = now;
        return [n] { return *n; };
    }
};

Fingerprint ap(const char* bssid, const char* ssid = "CSE")
{
    Fingerprint fp;
    fp.ssid = to_bytes(ssid);
    fp.bssid = MacAddress::parse(bssid);
    fp.beacon_interval = 100;
    fp.capability_info = 0x0421;
    fp.supported_rates = from_hex("82848b96");
    fp.tim_length = 4;
    fp.dtim_period = 1;
    fp.vendor_specific = from_hex("dd0300101802");
    return fp;
}

std::filesystem::path tmp(const std::string& name)
{
    std::filesystem::create_directories(ETGUARD_TEST_TMP);
    return std::filesystem::path(ETGUARD_TEST_TMP) / name;
}

} // namespace

TEST_SUITE("store")
{
    TEST_CASE("read your write")
    {
        FingerprintStore store;
        const auto fp = ap("00:1e:58:4c:a1:30");
        store.enroll(fp, -50, "CSE");
        REQUIRE(store.find(fp.bssid).has_value());
        CHECK(store.find(fp.bssid)->fingerprint == fp);
        CHECK(store.find(fp.bssid)->max_ssi_dbm == -50);
    }

    TEST_CASE("re-enrolment replaces and advances updated_at")
    {
        FakeClock clock;
        FingerprintStore store(clock.fn());
        auto fp = ap("00:1e:58:4c:a1:30");
        store.enroll(fp, -50, "CSE");
        *clock.now = 2000;
        fp.capability_info = 0x0431;
        store.enroll(fp, -50, "CSE");
        CHECK(store.size() == 1);
        CHECK(store.find(fp.bssid)->fingerprint.capability_info == 0x0431);
        CHECK(store.find(fp.bssid)->updated_at_ms == 2000);
    }

    TEST_CASE("identical re-enrolment leaves the record untouched")
    {
        FakeClock clock;
        FingerprintStore store(clock.fn());
        const auto fp = ap("00:1e:58:4c:a1:30");
        const auto first = store.enroll(fp, -50, "CSE");
        *clock.now = 5000;
        CHECK(store.enroll(fp, -50, "CSE") == first);
        CHECK(*store.find(fp.bssid) == first);
    }

    TEST_CASE("fifty APs, incremental")
    {
        FingerprintStore store;
        std::vector<FingerprintRecord> before;
        for (int i = 0; i < 50; ++i) {
            std::array<std::uint8_t, 6> o{0x02, 0, 0, 0, 0, static_cast<std::uint8_t>(i)};
            auto fp = ap("00:00:00:00:00:00");
            fp.bssid = MacAddress(o);
            store.enroll(fp, -60, "ap" + std::to_string(i));
            const auto snap = store.snapshot().records();
            for (const auto& r : before) {
                CHECK(*store.find(r.bssid()) == r);
            }
            before = snap;
        }
        CHECK(store.size() == 50);
    }

    TEST_CASE("running maximum")
    {
        FingerprintStore store;
        const auto fp = ap("00:1e:58:4c:a1:30");
        store.enroll(fp, -50, "CSE");
        store.update_observation(fp.bssid, -60);
        CHECK(store.find(fp.bssid)->max_ssi_dbm == -50);
        store.update_observation(fp.bssid, -50);
        CHECK(store.find(fp.bssid)->max_ssi_dbm == -50);
        store.update_observation(fp.bssid, -45);
        CHECK(store.find(fp.bssid)->max_ssi_dbm == -45);
        CHECK_THROWS_AS(store.update_observation(MacAddress::parse("02:00:00:00:00:09"), -10), Error);
    }

    TEST_CASE("monotone under any update sequence")
    {
        Gen g(17);
        FingerprintStore store;
        const auto fp = ap("00:1e:58:4c:a1:30");
        store.enroll(fp, -80, "CSE");
        int last = -80;
        for (int i = 0; i < 500; ++i) {
            store.update_observation(fp.bssid, static_cast<int>(g.range(-100, 0)));
            const int now = store.find(fp.bssid)->max_ssi_dbm;
            CHECK(now >= last);
            last = now;
        }
    }

    TEST_CASE("administrative reset lowers the maximum")
    {
        FingerprintStore store;
        const auto fp = ap("00:1e:58:4c:a1:30");
        store.enroll(fp, -40, "CSE");
        CHECK(store.reset_ssi(fp.bssid, -55).max_ssi_dbm == -55);
        CHECK(store.find(fp.bssid)->max_ssi_dbm == -55);
        CHECK_THROWS_AS(store.reset_ssi(MacAddress::parse("02:00:00:00:00:09"), -10), Error);
    }

    TEST_CASE("exact lookup")
    {
        FingerprintStore store;
        const auto fp = ap("00:1e:58:4c:a1:30");
        store.enroll(fp, -50, "CSE");
        CHECK(store.lookup_exact(fp).has_value());
        auto vendor = fp;
        (*vendor.vendor_specific).back() ^= 1;
        CHECK_FALSE(store.lookup_exact(vendor).has_value());
        auto digit = fp;
        digit.bssid = MacAddress::parse("00:1e:58:4c:a1:31");
        CHECK_FALSE(store.lookup_exact(digit).has_value());
    }

    TEST_CASE("lookup by SSID")
    {
        FingerprintStore store;
        store.enroll(ap("00:1e:58:4c:a1:30"), -50, "a");
        store.enroll(ap("00:1e:58:4c:a1:40"), -50, "b");
        store.enroll(ap("00:1e:58:4c:a1:50", "Lab"), -50, "c");
        CHECK(store.lookup_by_ssid(to_bytes("Guest")).empty());
        CHECK(store.lookup_by_ssid(to_bytes("CSE")).size() == 2);
        CHECK(store.lookup_by_ssid(to_bytes("cse")).empty());
        // replacing a record moves it in the index
        store.enroll(ap("00:1e:58:4c:a1:40", "Lab"), -50, "b");
        CHECK(store.lookup_by_ssid(to_bytes("CSE")).size() == 1);
        CHECK(store.lookup_by_ssid(to_bytes("Lab")).size() == 2);
        CHECK(store.remove(MacAddress::parse("00:1e:58:4c:a1:50")));
        CHECK(store.lookup_by_ssid(to_bytes("Lab")).size() == 1);
    }

    TEST_CASE("persist and load")
    {
        Gen g(3);
        FingerprintStore empty;
        const auto empty_path = tmp("empty.store");
        empty.persist(empty_path);
        FingerprintStore empty_back;
        empty_back.load(empty_path);
        CHECK(empty_back.size() == 0);

        FingerprintStore store;
        for (int i = 0; i < 50; ++i) {
            auto fp = testing::random_fingerprint(g);
            fp.bssid = g.mac();
            store.enroll(fp, static_cast<int>(g.range(-90, -10)), i % 7 == 0 ? "tab\there %" : "label " + std::to_string(i));
        }
        const auto path = tmp("fifty.store");
        store.persist(path);
        FingerprintStore back;
        back.load(path);
        CHECK(back.snapshot() == store.snapshot());
    }

    TEST_CASE("a tampered line is reported by number")
    {
        FingerprintStore store;
        store.enroll(ap("00:1e:58:4c:a1:30"), -50, "one");
        store.enroll(ap("00:1e:58:4c:a1:40"), -50, "two");
        std::stringstream buffer;
        store.save_to(buffer);
        std::vector<std::string> lines;
        for (std::string line; std::getline(buffer, line);) {
            lines.push_back(line);
        }
        // find the last record line and break its hex
        std::size_t target = lines.size() - 1;
        lines[target].back() = 'z';
        std::stringstream tampered;
        for (const auto& l : lines) {
            tampered << l << '\n';
        }
        FingerprintStore back;
        try {
            back.load_from(tampered, "db.store");
            FAIL("load accepted a corrupt line");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::CorruptStore);
            CHECK(std::string(e.what()).find("db.store:" + std::to_string(target + 1)) != std::string::npos);
        }
    }

    TEST_CASE("concurrent readers and a writer")
    {
        FingerprintStore store;
        store.enroll(ap("00:1e:58:4c:a1:30"), -50, "CSE");
        std::atomic<bool> stop{false};
        std::atomic<int> inconsistent{0};
        std::vector<std::thread> readers;
        for (int i = 0; i < 4; ++i) {
            readers.emplace_back([&] {
                while (!stop) {
                    const auto snap = store.snapshot();
                    for (const auto* r : snap.lookup_by_ssid(to_bytes("CSE"))) {
                        if (r->fingerprint.ssid != std::optional<Bytes>(to_bytes("CSE"))) {
                            ++inconsistent;
                        }
                    }
                }
            });
        }
        for (int i = 0; i < 2000; ++i) {
            store.update_observation(MacAddress::parse("00:1e:58:4c:a1:30"), -50 + i % 30);
            store.enroll(ap("00:1e:58:4c:a1:40", i % 2 ? "CSE" : "Lab"), -60, "x");
        }
        stop = true;
        for (auto& t : readers) {
            t.join();
        }
        CHECK(inconsistent == 0);
        CHECK(store.find(MacAddress::parse("00:1e:58:4c:a1:30"))->max_ssi_dbm == -21);
    }
}
