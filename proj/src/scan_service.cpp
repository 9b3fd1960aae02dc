#include "etguard/scan_service.hpp"

#include "etguard/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace etguard {

using nlohmann::json;

namespace {

std::optional<VerdictReason> parse_reason(std::string_view text)
{
    for (auto r : {VerdictReason::ExactMatch, VerdictReason::SsiExceeded, VerdictReason::FingerprintMismatchSameSsid,
                   VerdictReason::BssidForged, VerdictReason::NoSsidMatch}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    return std::nullopt;
}

json optional_hex(const std::optional<Bytes>& value)
{
    return value ? json(to_hex(*value)) : json(nullptr);
}

json ap_to_json(const ApReport& ap)
{
    return {
        {"ssid", display_ssid(ap.ssid)},
        {"ssid_hex", optional_hex(ap.ssid)},
        {"bssid", ap.bssid.to_string()},
        {"ssi_dbm", ap.ssi_dbm ? json(*ap.ssi_dbm) : json(nullptr)},
        {"verdict", to_string(ap.verdict)},
        {"reason", to_string(ap.reason)},
        {"matched_label", ap.matched_label ? json(*ap.matched_label) : json(nullptr)},
        {"fingerprint_id", ap.fingerprint_id},
        {"frames", ap.frames},
    };
}

ApReport ap_from_json(const json& j)
{
    ApReport ap;
    if (!j.at("ssid_hex").is_null()) {
        ap.ssid = from_hex(j.at("ssid_hex").get<std::string>());
    }
    ap.bssid = MacAddress::parse(j.at("bssid").get<std::string>());
    if (!j.at("ssi_dbm").is_null()) {
        ap.ssi_dbm = j.at("ssi_dbm").get<int>();
    }
    const auto kind = parse_verdict_kind(j.at("verdict").get<std::string>());
    const auto reason = parse_reason(j.at("reason").get<std::string>());
    if (!kind || !reason) {
        throw Error(Errc::BadRequest, "unknown verdict or reason in response");
    }
    ap.verdict = *kind;
    ap.reason = *reason;
    if (!j.at("matched_label").is_null()) {
        ap.matched_label = j.at("matched_label").get<std::string>();
    }
    ap.fingerprint_id = j.at("fingerprint_id").get<std::string>();
    ap.frames = j.at("frames").get<std::size_t>();
    return ap;
}

json record_json(const FingerprintRecord& r)
{
    json fields = json::object();
    for (auto f : kAllFingerprintFields) {
        fields[std::string(to_string(f))] = optional_hex(field_value(r.fingerprint, f));
    }
    return {
        {"label", r.label},
        {"bssid", r.bssid().to_string()},
        {"ssid", display_ssid(r.fingerprint.ssid)},
        {"max_ssi_dbm", r.max_ssi_dbm},
        {"fingerprint_id", fingerprint_id(r.fingerprint)},
        {"enrolled_at_ms", r.enrolled_at_ms},
        {"updated_at_ms", r.updated_at_ms},
        {"fields", std::move(fields)},
    };
}

json campaign_json(const DeauthCampaign& c)
{
    return {
        {"target_bssid", c.target_bssid.to_string()},
        {"reason_code", c.reason_code},
        {"interval_ms", c.interval.count()},
        {"started_at_ms", c.started_at_ms},
        {"stopped_at_ms", c.stopped_at_ms ? json(*c.stopped_at_ms) : json(nullptr)},
        {"emitted_count", c.emitted_count},
        {"active", c.active},
    };
}

template <typename Fn>
auto parse_or_bad_request(std::string_view what, Fn&& fn)
{
    try {
        return fn();
    } catch (const json::exception& e) {
        throw Error(Errc::BadRequest, std::string(what) + ": " + e.what());
    }
}

} // namespace

bool ScanResponse::evil_twin_found() const
{
    return std::any_of(aps.begin(), aps.end(), [](const ApReport& a) { return a.verdict == VerdictKind::EvilTwin; });
}

std::vector<ApReport> build_reports(const CaptureAnalysis& analysis)
{
    std::vector<ApReport> aps;
    aps.reserve(analysis.results.size());
    for (const auto& r : analysis.results) {
        ApReport ap;
        ap.ssid = r.observation.fingerprint.ssid;
        ap.bssid = r.observation.fingerprint.bssid;
        ap.ssi_dbm = r.observation.ssi_dbm;
        ap.verdict = r.verdict.kind;
        ap.reason = r.verdict.reason;
        if (r.verdict.matched_record) {
            ap.matched_label = r.verdict.matched_record->label;
        }
        ap.fingerprint_id = fingerprint_id(r.observation.fingerprint);
        ap.frames = r.observation.frame_count;
        aps.push_back(std::move(ap));
    }
    std::stable_sort(aps.begin(), aps.end(), [](const ApReport& a, const ApReport& b) {
        const int ra = severity_rank(a.verdict);
        const int rb = severity_rank(b.verdict);
        return std::tie(ra, a.ssid, a.bssid, a.fingerprint_id) < std::tie(rb, b.ssid, b.bssid, b.fingerprint_id);
    });
    return aps;
}

std::string to_json(const ScanResponse& response, int indent)
{
    json aps = json::array();
    for (const auto& ap : response.aps) {
        aps.push_back(ap_to_json(ap));
    }
    json deauth = json::array();
    for (const auto& b : response.deauth_started) {
        deauth.push_back(b.to_string());
    }
    const json j{
        {"request_id", response.request_id},
        {"aps", std::move(aps)},
        {"diagnostics", response.diagnostics},
        {"deauth_started", std::move(deauth)},
        {"elapsed_ms", response.elapsed_ms},
    };
    return j.dump(indent);
}

ScanResponse scan_response_from_json(std::string_view text)
{
    return parse_or_bad_request("scan response", [&] {
        const json j = json::parse(text);
        ScanResponse r;
        r.request_id = j.at("request_id").get<std::string>();
        for (const auto& ap : j.at("aps")) {
            r.aps.push_back(ap_from_json(ap));
        }
        r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        for (const auto& b : j.value("deauth_started", json::array())) {
            r.deauth_started.push_back(MacAddress::parse(b.get<std::string>()));
        }
        r.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
        return r;
    });
}

ScanRequest scan_request_from_json(std::string_view text)
{
    return parse_or_bad_request("scan request", [&] {
        const json j = text.empty() ? json::object() : json::parse(text);
        if (!j.is_object()) {
            throw Error(Errc::BadRequest, "scan request must be a JSON object");
        }
        ScanRequest r;
        r.request_id = j.value("request_id", std::string());
        r.sources = j.value("sources", std::vector<std::string>{});
        if (j.contains("options")) {
            const auto& o = j.at("options");
            r.options.ssi_margin_db = o.value("ssi_margin_db", 0);
            r.options.auto_deauth = o.value("auto_deauth", false);
            r.options.live_window = std::chrono::milliseconds(o.value("live_window_ms", std::int64_t{1000}));
        }
        return r;
    });
}

std::string to_json(const ScanRequest& request)
{
    const json j{
        {"request_id", request.request_id},
        {"sources", request.sources},
        {"options",
         {
             {"ssi_margin_db", request.options.ssi_margin_db},
             {"auto_deauth", request.options.auto_deauth},
             {"live_window_ms", request.options.live_window.count()},
         }},
    };
    return j.dump();
}

std::string record_to_json(const FingerprintRecord& record, int indent)
{
    return record_json(record).dump(indent);
}

std::string campaign_to_json(const DeauthCampaign& campaign, int indent)
{
    return campaign_json(campaign).dump(indent);
}

void LiveSource::publish(CapturedBeacon frame)
{
    std::lock_guard lock(mutex_);
    if (!closed_) {
        frames_.push_back(std::move(frame));
    }
}

void LiveSource::publish(std::vector<CapturedBeacon> frames)
{
    std::lock_guard lock(mutex_);
    if (!closed_) {
        frames_.insert(frames_.end(), std::make_move_iterator(frames.begin()), std::make_move_iterator(frames.end()));
    }
}

void LiveSource::close()
{
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    closed_cv_.notify_all();
}

bool LiveSource::closed() const
{
    std::lock_guard lock(mutex_);
    return closed_;
}

std::vector<CapturedBeacon> LiveSource::collect(std::chrono::milliseconds window) const
{
    std::unique_lock lock(mutex_);
    closed_cv_.wait_for(lock, window, [this] { return closed_; });
    return frames_;
}

std::shared_ptr<LiveSource> LiveSourceRegistry::open(const std::string& name)
{
    std::lock_guard lock(mutex_);
    auto& slot = sources_[name];
    if (!slot) {
        slot = std::make_shared<LiveSource>();
    }
    return slot;
}

std::shared_ptr<LiveSource> LiveSourceRegistry::find(const std::string& name) const
{
    std::lock_guard lock(mutex_);
    auto it = sources_.find(name);
    return it == sources_.end() ? nullptr : it->second;
}

void LiveSourceRegistry::remove(const std::string& name)
{
    std::lock_guard lock(mutex_);
    sources_.erase(name);
}

ScanService::ScanService(FingerprintStore& store, ScanServiceConfig config, std::shared_ptr<DeauthScheduler> scheduler,
                         std::shared_ptr<DeauthSink> sink, AuditLog audit)
    : store_(store), config_(std::move(config)), scheduler_(std::move(scheduler)), sink_(std::move(sink)),
      audit_(std::move(audit))
{
    if (scheduler_ && !sink_) {
        sink_ = std::make_shared<MemoryDeauthSink>();
    }
}

ScanResponse ScanService::handle_scan(const ScanRequest& request)
{
    const auto started = std::chrono::steady_clock::now();
    ScanResponse response;
    response.request_id =
        request.request_id.empty() ? "scan-" + std::to_string(next_request_.fetch_add(1)) : request.request_id;

    std::vector<std::vector<CapturedBeacon>> per_source;
    std::size_t failed = 0;
    for (const auto& source : request.sources) {
        if (source.starts_with(kLiveSourcePrefix)) {
            const auto name = source.substr(kLiveSourcePrefix.size());
            if (auto live = live_.find(name)) {
                per_source.push_back(live->collect(request.options.live_window));
            } else {
                response.diagnostics.push_back(source + ": no such live source");
                ++failed;
            }
            continue;
        }
        try {
            auto capture = read_capture(std::filesystem::path(source));
            response.diagnostics.insert(response.diagnostics.end(), capture.diagnostics.begin(),
                                        capture.diagnostics.end());
            per_source.push_back(std::move(capture.beacons));
        } catch (const Error& e) {
            response.diagnostics.push_back(source + ": " + e.what());
            ++failed;
        }
    }
    if (!request.sources.empty() && failed == request.sources.size()) {
        std::string detail;
        for (const auto& d : response.diagnostics) {
            detail += (detail.empty() ? "" : "; ") + d;
        }
        throw Error(Errc::Io, "every source failed: " + detail);
    }

    const auto frames = merge_by_time(std::move(per_source));
    DetectorOptions options;
    options.ssi_margin_db = request.options.ssi_margin_db;
    const auto analysis = classify_capture(frames, store_.snapshot(), options);
    response.diagnostics.insert(response.diagnostics.end(), analysis.diagnostics.begin(), analysis.diagnostics.end());

    if (config_.update_store) {
        std::lock_guard lock(writer_);
        bool changed = false;
        for (const auto& r : analysis.results) {
            changed |= apply_observation_update(store_, r.observation, r.verdict);
        }
        if (changed) {
            persist_locked();
        }
    }

    if (request.options.auto_deauth && scheduler_) {
        std::set<MacAddress> targets;
        for (const auto& r : analysis.results) {
            if (r.verdict.kind == VerdictKind::EvilTwin) {
                targets.insert(r.observation.fingerprint.bssid);
            }
        }
        for (const auto& bssid : targets) {
            if (scheduler_->is_active(bssid)) {
                continue;
            }
            try {
                scheduler_->start_campaign(bssid, config_.deauth_reason, config_.deauth_interval, sink_);
                response.deauth_started.push_back(bssid);
                audit("deauth start " + bssid.to_string() + " request=" + response.request_id);
            } catch (const Error& e) {
                if (e.code() != Errc::DuplicateCampaign) {
                    throw;
                }
            }
        }
    }

    response.aps = build_reports(analysis);
    response.elapsed_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    return response;
}

ScanService::EnrollResult ScanService::enroll_capture(const CaptureReadResult& capture, const std::string& label)
{
    EnrollResult result;
    result.diagnostics = capture.diagnostics;
    const auto observations = aggregate_observations(capture.beacons, result.diagnostics);
    std::map<MacAddress, std::size_t> per_bssid;
    for (const auto& obs : observations) {
        ++per_bssid[obs.fingerprint.bssid];
    }
    std::lock_guard lock(writer_);
    for (const auto& obs : observations) {
        const auto& bssid = obs.fingerprint.bssid;
        if (per_bssid[bssid] > 1) {
            result.diagnostics.push_back(bssid.to_string() +
                                         ": several fingerprints in the trusted capture; the last one is kept");
        }
        if (!obs.ssi_dbm) {
            result.diagnostics.push_back(bssid.to_string() + ": no signal field; stored maximum starts at 0 dBm");
        }
        const std::string name = label.empty() ? display_ssid(obs.fingerprint.ssid) : label;
        result.records.push_back(store_.enroll(obs.fingerprint, obs.ssi_dbm.value_or(0), name));
        audit("enroll " + bssid.to_string() + " label=" + name + " max_ssi=" +
              std::to_string(result.records.back().max_ssi_dbm));
    }
    if (!observations.empty()) {
        persist_locked();
    }
    return result;
}

FingerprintRecord ScanService::reset_ssi(const MacAddress& bssid, int max_ssi_dbm)
{
    std::lock_guard lock(writer_);
    auto record = store_.reset_ssi(bssid, max_ssi_dbm);
    persist_locked();
    audit("ssi-reset " + bssid.to_string() + " max_ssi=" + std::to_string(max_ssi_dbm));
    return record;
}

std::optional<DeauthCampaign> ScanService::stop_deauth(const MacAddress& bssid)
{
    if (!scheduler_) {
        return std::nullopt;
    }
    auto campaign = scheduler_->stop_campaign(bssid);
    audit("deauth stop " + bssid.to_string() + (campaign ? "" : " (no campaign)"));
    return campaign;
}

std::vector<FingerprintRecord> ScanService::fingerprints() const
{
    return store_.snapshot().records();
}

std::vector<DeauthCampaign> ScanService::campaigns() const
{
    return scheduler_ ? scheduler_->campaigns() : std::vector<DeauthCampaign>{};
}

void ScanService::persist_locked()
{
    if (!config_.store_path.empty()) {
        store_.persist(config_.store_path);
    }
}

void ScanService::audit(const std::string& line) const
{
    if (audit_) {
        audit_(line);
    }
}

} // namespace etguard
