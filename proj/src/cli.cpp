#include "etguard/cli.hpp"

#include "etguard/dedup.hpp"
#include "etguard/error.hpp"
#include "etguard/http_server.hpp"
#include "etguard/scan_service.hpp"
#include "etguard/simulator.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <pthread.h>

namespace etguard {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct GlobalOptions {
    std::string store_path = "etguard.store";
    std::string format = "table";
    int ssi_margin_db = 0;
};

void load_store(FingerprintStore& store, const std::string& path)
{
    if (std::filesystem::exists(path)) {
        store.load(path);
    }
}

std::string pad(std::string text, std::size_t width)
{
    if (text.size() < width) {
        text.append(width - text.size(), ' ');
    }
    return text;
}

void print_table(std::ostream& out, const ScanResponse& r)
{
    out << pad("VERDICT", 13) << pad("REASON", 28) << pad("SSID", 20) << pad("BSSID", 19) << pad("SSI", 6)
        << pad("FRAMES", 8) << "LABEL\n";
    for (const auto& ap : r.aps) {
        out << pad(std::string(to_string(ap.verdict)), 13) << pad(std::string(to_string(ap.reason)), 28)
            << pad(display_ssid(ap.ssid), 20) << pad(ap.bssid.to_string(), 19)
            << pad(ap.ssi_dbm ? std::to_string(*ap.ssi_dbm) : "-", 6) << pad(std::to_string(ap.frames), 8)
            << ap.matched_label.value_or("-") << '\n';
    }
    if (r.aps.empty()) {
        out << "(no access points)\n";
    }
}

void print_records(std::ostream& out, const std::vector<FingerprintRecord>& records)
{
    for (const auto& r : records) {
        out << "  " << pad(r.bssid().to_string(), 19) << pad(display_ssid(r.fingerprint.ssid), 20)
            << pad(std::to_string(r.max_ssi_dbm) + " dBm", 10) << r.label << "  [" << fingerprint_id(r.fingerprint)
            << "]\n";
    }
}

std::string abs_path(const std::string& p)
{
    return p.starts_with(kLiveSourcePrefix) ? p : std::filesystem::absolute(p).string();
}

int cmd_enroll(const GlobalOptions& g, const std::string& capture_path, const std::string& label, std::ostream& out)
{
    FingerprintStore store;
    load_store(store, g.store_path);
    const std::size_t before = store.size();
    ScanServiceConfig cfg;
    cfg.store_path = g.store_path;
    ScanService service(store, cfg);
    const auto result = service.enroll_capture(read_capture(std::filesystem::path(capture_path)), label);
    for (const auto& d : result.diagnostics) {
        out << "warning: " << d << '\n';
    }
    if (g.format == "json") {
        out << "{\"enrolled\":[";
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            out << (i ? "," : "") << record_to_json(result.records[i]);
        }
        out << "],\"store_size\":" << store.size() << "}\n";
    } else {
        out << "enrolled " << result.records.size() << " record(s) from " << capture_path << " into " << g.store_path
            << " (" << before << " -> " << store.size() << ")\n";
        print_records(out, result.records);
    }
    return kExitClean;
}

int cmd_scan(const GlobalOptions& g, const std::vector<std::string>& captures, bool update, const std::string& server,
             std::ostream& out, std::ostream& err)
{
    ScanRequest request;
    request.request_id = "cli";
    request.options.ssi_margin_db = g.ssi_margin_db;
    ScanResponse response;
    if (!server.empty()) {
        for (const auto& c : captures) {
            request.sources.push_back(abs_path(c));
        }
        httplib::Client client(server);
        client.set_read_timeout(std::chrono::seconds(60));
        auto res = client.Post("/scan", to_json(request), "application/json");
        if (!res) {
            throw Error(Errc::Io, "cannot reach " + server + ": " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(Errc::Io, "server answered " + std::to_string(res->status) + ": " + res->body);
        }
        response = scan_response_from_json(res->body);
    } else {
        request.sources = captures;
        FingerprintStore store;
        load_store(store, g.store_path);
        ScanServiceConfig cfg;
        cfg.update_store = update;
        cfg.store_path = update ? g.store_path : std::string();
        ScanService service(store, cfg);
        response = service.handle_scan(request);
    }
    if (g.format == "json") {
        out << to_json(response) << '\n';
    } else {
        for (const auto& d : response.diagnostics) {
            err << "warning: " << d << '\n';
        }
        print_table(out, response);
    }
    return response.evil_twin_found() ? kExitEvilTwin : kExitClean;
}

int cmd_simulate(const std::string& which, std::string out_path, std::string baseline_path, std::uint64_t seed,
                 bool list, std::ostream& out, std::ostream& err)
{
    if (list) {
        for (const auto& s : sim::scenario_matrix()) {
            out << pad(s.name, 38) << s.description << '\n';
        }
        return kExitClean;
    }
    if (which.empty()) {
        err << "etguard simulate: a scenario name or config file is required (see --list)\n";
        return kExitError;
    }
    sim::Scenario scenario;
    if (auto builtin = sim::builtin_scenario(which)) {
        scenario = *builtin;
    } else if (std::filesystem::exists(which)) {
        scenario = sim::load_scenario_file(which);
    } else {
        std::string names;
        for (const auto& n : sim::builtin_scenario_names()) {
            names += "\n  " + n;
        }
        throw Error(Errc::UnknownScenario, "unknown scenario '" + which + "'; valid names:" + names);
    }
    if (out_path.empty()) {
        out_path = scenario.name + ".pcap";
    }
    if (baseline_path.empty()) {
        auto p = std::filesystem::path(out_path);
        baseline_path = (p.parent_path() / (p.stem().string() + ".baseline" + p.extension().string())).string();
    }
    const auto capture = sim::generate(scenario, seed);
    const auto baseline = sim::generate_baseline(scenario, seed);
    write_capture(std::span<const CapturedBeacon>(capture.frames), out_path);
    write_capture(std::span<const CapturedBeacon>(baseline.frames), baseline_path);
    const std::string labels_path = out_path + ".labels";
    std::ofstream labels(labels_path);
    labels << sim::format_labels(capture.labels);
    if (!labels) {
        throw Error(Errc::Io, "cannot write " + labels_path);
    }
    out << "scenario " << scenario.name << " (seed " << seed << "): " << capture.frames.size() << " frames -> "
        << out_path << "\n  labels   -> " << labels_path << "\n  baseline -> " << baseline_path << " ("
        << baseline.frames.size() << " frames)\n";
    return kExitClean;
}

sigset_t shutdown_signals()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    return set;
}

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8470;
    std::size_t queue_capacity = 64;
    std::size_t workers = 4;
    std::string admin_token;
    std::string ui_dir;
    bool no_update = false;
    std::string deauth_out;
    std::uint16_t deauth_reason = DeauthScheduler::kDefaultReason;
    int deauth_interval_ms = 100;
};

int cmd_serve(const GlobalOptions& g, ServeOptions s, std::ostream& out, std::ostream& err)
{
    if (s.admin_token.empty()) {
        if (const char* env = std::getenv("ETGUARD_ADMIN_TOKEN")) {
            s.admin_token = env;
        }
    }
    // Block the shutdown signals before any thread starts so that only the
    // sigwait below sees them.
    const sigset_t signals = shutdown_signals();
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    FingerprintStore store;
    load_store(store, g.store_path);
    auto scheduler = std::make_shared<DeauthScheduler>();
    std::shared_ptr<DeauthSink> sink;
    if (!s.deauth_out.empty()) {
        sink = std::make_shared<PcapDeauthSink>(s.deauth_out);
    }
    ScanServiceConfig cfg;
    cfg.update_store = !s.no_update;
    cfg.store_path = g.store_path;
    cfg.deauth_reason = s.deauth_reason;
    cfg.deauth_interval = std::chrono::milliseconds(s.deauth_interval_ms);
    std::mutex log_mutex;
    ScanService service(store, cfg, scheduler, sink, [&err, &log_mutex](const std::string& line) {
        std::lock_guard lock(log_mutex);
        err << "audit " << system_clock_ms() << ' ' << line << std::endl;
    });

    HttpServerConfig hc;
    hc.host = s.host;
    hc.port = s.port;
    hc.queue_capacity = s.queue_capacity;
    hc.workers = s.workers;
    hc.admin_token = s.admin_token;
    hc.ui_dir = s.ui_dir;
    HttpServer server(service, hc);
    server.start();
    out << "etguard listening on http://" << s.host << ':' << server.port() << " (" << store.size()
        << " fingerprints, queue " << s.queue_capacity << ", workers " << s.workers << ")" << std::endl;
    if (s.admin_token.empty()) {
        err << "warning: no admin token set; admin endpoints will refuse every request" << std::endl;
    }

    int received = 0;
    sigwait(&signals, &received);
    out << "signal " << received << ": draining" << std::endl;
    server.stop();
    scheduler->shutdown();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    out << "stopped" << std::endl;
    return kExitClean;
}

int cmd_bench(const GlobalOptions& g, const std::vector<std::string>& captures, std::size_t frames, std::ostream& out)
{
    std::vector<BenchReport> reports;
    std::vector<std::string> names;
    if (captures.empty()) {
        const auto fixture = make_bench_fixture(frames);
        reports.push_back(run_bench(fixture.capture, StoreSnapshot(fixture.records), {g.ssi_margin_db}));
        names.push_back("synthetic hostapd colocation (" + std::to_string(frames) + " frames)");
    } else {
        FingerprintStore store;
        load_store(store, g.store_path);
        const auto snapshot = store.snapshot();
        for (const auto& c : captures) {
            std::ifstream in(c, std::ios::binary);
            if (!in) {
                throw Error(Errc::Io, "cannot open " + c);
            }
            const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            reports.push_back(run_bench(bytes, snapshot, {g.ssi_margin_db}));
            names.push_back(c);
        }
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (g.format == "json") {
            const nlohmann::json j{{"source", names[i]},          {"frames", r.frames},
                                   {"frames_after_dedup", r.frames_after_dedup},
                                   {"identities", r.identities},  {"read_ms", r.read_ms},
                                   {"extract_ms", r.extract_ms},  {"classify_ms", r.classify_ms},
                                   {"total_ms", r.total_ms}};
            out << j.dump() << '\n';
            continue;
        }
        out << names[i] << '\n' << std::fixed << std::setprecision(3) << "  frames       " << r.frames
            << " (after dedup " << r.frames_after_dedup << ", identities " << r.identities << ")\n"
            << "  read         " << r.read_ms << " ms\n"
            << "  extract      " << r.extract_ms << " ms\n"
            << "  classify     " << r.classify_ms << " ms\n"
            << "  total        " << r.total_ms << " ms\n";
    }
    return kExitClean;
}

} // namespace

BenchReport run_bench(ByteView capture, const StoreSnapshot& store, const DetectorOptions& options)
{
    BenchReport report;
    const auto t0 = Clock::now();
    const auto read = read_capture_bytes(capture, "bench");
    report.read_ms = ms_since(t0);
    report.frames = read.beacons.size();

    const auto t1 = Clock::now();
    const auto unique = dedup_stream(read.beacons);
    std::vector<std::string> diagnostics;
    const auto observations = aggregate_observations(unique, diagnostics);
    report.extract_ms = ms_since(t1);
    report.frames_after_dedup = unique.size();
    report.identities = observations.size();

    const auto t2 = Clock::now();
    for (const auto& obs : observations) {
        report.verdicts.push_back(classify(obs, store, options).kind);
    }
    report.classify_ms = ms_since(t2);
    report.total_ms = ms_since(t0);
    return report;
}

BenchFixture make_bench_fixture(std::size_t frames, std::uint64_t seed)
{
    auto scenario = *sim::builtin_scenario("colocation-hostapd");
    // Roughly 14.6 beacons per second from the two emitters.
    scenario.duration_ms = static_cast<std::uint32_t>(frames * 70 + 1000);
    auto capture = sim::generate(scenario, seed);
    if (capture.frames.size() > frames) {
        capture.frames.resize(frames);
    }
    const auto baseline = sim::generate_baseline(scenario, seed);
    std::vector<std::string> diagnostics;
    BenchFixture fixture;
    for (const auto& obs : aggregate_observations(baseline.frames, diagnostics)) {
        fixture.records.push_back({obs.fingerprint, obs.ssi_dbm.value_or(0), scenario.genuine_label, 0, 0});
    }
    fixture.capture = pcap_bytes(kLinkTypeRadiotap, to_records(capture.frames));
    return fixture;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"etguard: evil-twin access point detection from beacon fingerprints"};
    app.name("etguard");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI/TOML file with option defaults (flags override it)");

    GlobalOptions g;
    app.add_option("--store", g.store_path, "Fingerprint store file")->capture_default_str();
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
    app.add_option("--ssi-margin-db", g.ssi_margin_db, "Signal headroom before an exact match counts as a twin")
        ->capture_default_str();

    std::string capture_path, label;
    auto* enroll = app.add_subcommand("enroll", "Enroll the access points of a trusted capture");
    enroll->add_option("capture", capture_path, "pcap (radiotap) captured from the genuine APs")->required();
    enroll->add_option("--label", label, "Label for the enrolled records (default: SSID)");

    std::vector<std::string> captures;
    bool update = false;
    std::string server;
    auto* scan = app.add_subcommand("scan", "Classify the access points in one or more captures");
    scan->add_option("captures", captures, "pcap files, merged by capture time");
    scan->add_flag("--update", update, "Raise stored signal maxima from Legitimate observations");
    scan->add_option("--server", server, "Send the scan to a running server, e.g. http://127.0.0.1:8470");

    std::string which, out_path, baseline_path;
    std::uint64_t seed = 1;
    bool list = false;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic scenario capture and its labels");
    simulate->add_option("scenario", which, "Built-in scenario name or JSON scenario file");
    simulate->add_option("--out", out_path, "Output pcap (labels go to <out>.labels)");
    simulate->add_option("--baseline", baseline_path, "Genuine-only capture for enrollment (default <out>.baseline.pcap)");
    simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
    simulate->add_flag("--list", list, "List built-in scenarios");

    ServeOptions s;
    auto* serve = app.add_subcommand("serve", "Run the HTTP detection server");
    serve->add_option("--host", s.host)->capture_default_str();
    serve->add_option("--port", s.port, "0 picks a free port")->capture_default_str();
    serve->add_option("--queue-capacity", s.queue_capacity)->check(CLI::PositiveNumber)->capture_default_str();
    serve->add_option("--workers", s.workers)->check(CLI::PositiveNumber)->capture_default_str();
    serve->add_option("--admin-token", s.admin_token, "Shared secret (or ETGUARD_ADMIN_TOKEN)");
    serve->add_option("--ui", s.ui_dir, "Directory with dashboard assets, served under /ui");
    serve->add_flag("--no-update", s.no_update, "Never raise stored signal maxima");
    serve->add_option("--deauth-out", s.deauth_out, "pcap file receiving countermeasure frames");
    serve->add_option("--deauth-reason", s.deauth_reason)->capture_default_str();
    serve->add_option("--deauth-interval-ms", s.deauth_interval_ms)->check(CLI::PositiveNumber)->capture_default_str();

    std::vector<std::string> bench_captures;
    std::size_t bench_frames = 1000;
    auto* bench = app.add_subcommand("bench", "Time the pipeline stages");
    bench->add_option("captures", bench_captures, "pcap files (default: a synthetic fixture)");
    bench->add_option("--frames", bench_frames, "Size of the synthetic fixture")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitClean;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitClean;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << e.what() << '\n';
            return kExitClean;
        }
        err << "etguard: " << e.what() << "\nRun with --help for usage.\n";
        return kExitError;
    }

    try {
        if (enroll->parsed()) {
            return cmd_enroll(g, capture_path, label, out);
        }
        if (scan->parsed()) {
            return cmd_scan(g, captures, update, server, out, err);
        }
        if (simulate->parsed()) {
            return cmd_simulate(which, out_path, baseline_path, seed, list, out, err);
        }
        if (serve->parsed()) {
            return cmd_serve(g, s, out, err);
        }
        if (bench->parsed()) {
            return cmd_bench(g, bench_captures, bench_frames, out);
        }
    } catch (const Error& e) {
        err << "etguard: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "etguard: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace etguard
