#pragma once

#include "etguard/detector.hpp"
#include "etguard/pcap.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace etguard {

/// Exit codes of the command line.
inline constexpr int kExitClean = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitEvilTwin = 2;

/// Entry point of the `etguard` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct BenchReport {
    std::size_t frames = 0;
    std::size_t frames_after_dedup = 0;
    std::size_t identities = 0;
    double read_ms = 0;
    double extract_ms = 0; // dedup, fingerprinting, aggregation
    double classify_ms = 0;
    double total_ms = 0;
    std::vector<VerdictKind> verdicts;
};

/// Times the detection pipeline stage by stage over an encoded capture.
BenchReport run_bench(ByteView capture, const StoreSnapshot& store, const DetectorOptions& options = {});

/// Encoded capture of `frames` beacons from the hostapd colocation scenario
/// plus a store holding its genuine AP, for benchmarking.
struct BenchFixture {
    Bytes capture;
    std::vector<FingerprintRecord> records;
};
BenchFixture make_bench_fixture(std::size_t frames, std::uint64_t seed = 1);

} // namespace etguard
