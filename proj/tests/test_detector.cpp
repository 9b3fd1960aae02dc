#include "etguard/detector.hpp"
#include "etguard/simulator.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace etguard;
using etguard::testing::Gen;

namespace {

Fingerprint cse()
{
    return sim::find_profile(sim::kGenuineProfile).defaults;
}

StoreSnapshot store_of(std::vector<FingerprintRecord> records)
{
    return StoreSnapshot(std::move(records));
}

Observation seen(const Fingerprint& fp, std::optional<int> ssi)
{
    Observation o;
    o.fingerprint = fp;
    o.ssi_dbm = ssi;
    o.frame_count = 1;
    return o;
}

} // namespace

TEST_SUITE("classify")
{
    const auto genuine = FingerprintRecord{cse(), -50, "CSE", 0, 0};

    TEST_CASE("exact match below the stored maximum")
    {
        const auto v = classify(seen(cse(), -55), store_of({genuine}));
        CHECK(v.kind == VerdictKind::Legitimate);
        CHECK(v.reason == VerdictReason::ExactMatch);
    }

    TEST_CASE("exact match louder than the stored maximum")
    {
        const auto v = classify(seen(cse(), -40), store_of({genuine}));
        CHECK(v.kind == VerdictKind::EvilTwin);
        CHECK(v.reason == VerdictReason::SsiExceeded);
    }

    TEST_CASE("equal signal is legitimate; the margin widens the band")
    {
        CHECK(classify(seen(cse(), -50), store_of({genuine})).kind == VerdictKind::Legitimate);
        CHECK(classify(seen(cse(), -47), store_of({genuine}), {3}).kind == VerdictKind::Legitimate);
        CHECK(classify(seen(cse(), -46), store_of({genuine}), {3}).kind == VerdictKind::EvilTwin);
    }

    TEST_CASE("absent signal never exceeds")
    {
        CHECK(classify(seen(cse(), std::nullopt), store_of({genuine})).kind == VerdictKind::Legitimate);
    }

    TEST_CASE("hostapd twin with the genuine SSID")
    {
        auto twin = sim::resolve_twin(*sim::builtin_scenario("colocation-hostapd"));
        REQUIRE(twin.has_value());
        const auto v = classify(seen(*twin, -40), store_of({genuine}));
        CHECK(v.kind == VerdictKind::EvilTwin);
        CHECK(v.reason == VerdictReason::FingerprintMismatchSameSsid);
        REQUIRE(v.matched_record.has_value());
        CHECK(v.matched_record->label == "CSE");
    }

    TEST_CASE("only the last BSSID digit differs")
    {
        auto fp = cse();
        fp.bssid = MacAddress::parse("00:1e:58:4c:a1:31");
        const auto v = classify(seen(fp, -70), store_of({genuine}));
        CHECK(v.kind == VerdictKind::EvilTwin);
        CHECK(v.reason == VerdictReason::BssidForged);
    }

    TEST_CASE("unknown SSID")
    {
        auto fp = cse();
        fp.ssid = to_bytes("Guest");
        const auto v = classify(seen(fp, -70), store_of({genuine}));
        CHECK(v.kind == VerdictKind::Unregistered);
        CHECK(v.reason == VerdictReason::NoSsidMatch);
        CHECK(classify(seen(cse(), -70), store_of({})).kind == VerdictKind::Unregistered);
    }

    TEST_CASE("twin attributed to the closest record, lowest BSSID on ties")
    {
        auto far = cse();
        far.bssid = MacAddress::parse("00:00:00:00:00:01");
        far.capability_info = 0x1111;
        far.supported_rates.reset();
        auto near = cse();
        near.bssid = MacAddress::parse("00:00:00:00:00:09");
        auto tie = cse();
        tie.bssid = MacAddress::parse("00:00:00:00:00:05");
        auto obs = cse();
        obs.bssid = MacAddress::parse("02:00:00:00:00:01");
        obs.capability_info = 0x2222;

        auto v = classify(seen(obs, -50), store_of({{far, -50, "far", 0, 0}, {near, -50, "near", 0, 0}}));
        REQUIRE(v.matched_record.has_value());
        CHECK(v.matched_record->label == "near");

        v = classify(seen(obs, -50), store_of({{near, -50, "near", 0, 0}, {tie, -50, "tie", 0, 0}}));
        REQUIRE(v.matched_record.has_value());
        CHECK(v.matched_record->label == "tie");
    }

    TEST_CASE("exact match wins over a same-SSID record elsewhere")
    {
        auto other = cse();
        other.bssid = MacAddress::parse("00:00:00:00:00:01");
        other.capability_info = 1;
        const auto v = classify(seen(cse(), -60), store_of({{other, -50, "other", 0, 0}, genuine}));
        CHECK(v.kind == VerdictKind::Legitimate);
        CHECK(v.matched_record->label == "CSE");
    }

    TEST_CASE("agrees with the per-record walk")
    {
        Gen g(0xa1);
        for (int i = 0; i < 2000; ++i) {
            const auto records = testing::random_records(g, 5);
            const auto obs = testing::random_observation(g, records);
            const int margin = static_cast<int>(g.range(0, 1) * g.range(0, 6));
            const auto v = classify(obs, StoreSnapshot(records), {margin});
            const auto o = testing::detection_loop_walk(obs, records, margin);
            CHECK(v.kind == o.kind);
            CHECK(v.reason == o.reason);
            CHECK((v.matched_record ? std::optional<MacAddress>(v.matched_record->bssid()) : std::nullopt) == o.matched);
        }
    }

    TEST_CASE("signal monotonicity")
    {
        Gen g(0xa2);
        for (int i = 0; i < 300; ++i) {
            const auto records = testing::random_records(g, 5);
            auto obs = testing::random_observation(g, records);
            if (!obs.ssi_dbm || classify(obs, StoreSnapshot(records)).kind != VerdictKind::Legitimate) {
                continue;
            }
            for (int s = *obs.ssi_dbm; s >= -128; s -= 7) {
                obs.ssi_dbm = s;
                CHECK(classify(obs, StoreSnapshot(records)).kind == VerdictKind::Legitimate);
            }
        }
    }
}

TEST_SUITE("pipeline")
{
    TEST_CASE("genuine plus hostapd twin")
    {
        const auto scenario = *sim::builtin_scenario("colocation-hostapd");
        const auto capture = sim::generate(scenario, 11);
        const StoreSnapshot store({{capture.genuine, -50, "CSE", 0, 0}});
        const auto analysis = classify_capture(capture.frames, store);
        REQUIRE(analysis.results.size() == 2);
        int legit = 0;
        int twins = 0;
        for (const auto& r : analysis.results) {
            if (r.verdict.kind == VerdictKind::Legitimate) {
                ++legit;
                CHECK(r.observation.fingerprint == capture.genuine);
            }
            if (r.verdict.kind == VerdictKind::EvilTwin) {
                ++twins;
                CHECK(r.observation.fingerprint == *capture.twin);
            }
        }
        CHECK(legit == 1);
        CHECK(twins == 1);
        CHECK(analysis.diagnostics.empty());
    }

    TEST_CASE("one AP with 100 consecutive beacons")
    {
        auto scenario = *sim::builtin_scenario("genuine-only");
        scenario.duration_ms = 10'240;
        const auto capture = sim::generate(scenario, 3);
        REQUIRE(capture.frames.size() == 100);
        const auto analysis = classify_capture(capture.frames, StoreSnapshot());
        REQUIRE(analysis.results.size() == 1);
        CHECK(analysis.results[0].observation.frame_count == 1);
        CHECK(analysis.fingerprint_computations == 1);
    }

    TEST_CASE("empty capture")
    {
        const auto analysis = classify_capture({}, StoreSnapshot());
        CHECK(analysis.results.empty());
    }

    TEST_CASE("verdicts do not depend on frame order")
    {
        const auto capture = sim::generate(*sim::builtin_scenario("colocation-mi-3c"), 5);
        const StoreSnapshot store({{capture.genuine, -50, "CSE", 0, 0}});
        std::vector<std::string> d1, d2;
        auto frames = capture.frames;
        const auto before = aggregate_observations(frames, d1);
        Gen g(8);
        std::shuffle(frames.begin(), frames.end(), g.engine());
        const auto after = aggregate_observations(frames, d2);
        REQUIRE(before.size() == after.size());
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].fingerprint == after[i].fingerprint);
            CHECK(before[i].ssi_dbm == after[i].ssi_dbm);
            CHECK(classify(before[i], store) == classify(after[i], store));
        }
    }

    TEST_CASE("unbuildable fingerprints are reported, not fatal")
    {
        auto capture = sim::generate(*sim::builtin_scenario("genuine-only"), 3);
        auto& f = capture.frames[5].frame;
        for (auto& e : f.elements) {
            if (e.element_id == ie::kTim) {
                e.payload.resize(2);
            }
        }
        std::vector<std::string> diagnostics;
        const auto obs = aggregate_observations(capture.frames, diagnostics);
        CHECK(obs.size() == 1);
        CHECK(diagnostics.size() == 1);
    }

    TEST_CASE("update gate")
    {
        FingerprintStore store;
        store.enroll(cse(), -50, "CSE");
        const auto snap = store.snapshot();

        auto louder = seen(cse(), -45);
        auto v = classify(louder, snap);
        CHECK(v.kind == VerdictKind::EvilTwin);
        CHECK_FALSE(apply_observation_update(store, louder, v));
        CHECK(store.find(cse().bssid)->max_ssi_dbm == -50);

        auto same = seen(cse(), -50);
        v = classify(same, snap);
        CHECK(v.kind == VerdictKind::Legitimate);
        apply_observation_update(store, same, v);
        CHECK(store.find(cse().bssid)->max_ssi_dbm == -50);

        auto margin_obs = seen(cse(), -48);
        v = classify(margin_obs, snap, {5});
        CHECK(v.kind == VerdictKind::Legitimate);
        CHECK(apply_observation_update(store, margin_obs, v));
        CHECK(store.find(cse().bssid)->max_ssi_dbm == -48);
    }
}
