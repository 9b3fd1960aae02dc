#include "etguard/store.hpp"

#include "etguard/error.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>

namespace etguard {

StoreSnapshot::StoreSnapshot(std::vector<FingerprintRecord> records) : records_(std::move(records))
{
    std::sort(records_.begin(), records_.end(),
              [](const FingerprintRecord& a, const FingerprintRecord& b) { return a.bssid() < b.bssid(); });
}

const FingerprintRecord* StoreSnapshot::find(const MacAddress& bssid) const
{
    auto it = std::lower_bound(records_.begin(), records_.end(), bssid,
                               [](const FingerprintRecord& r, const MacAddress& m) { return r.bssid() < m; });
    return it != records_.end() && it->bssid() == bssid ? &*it : nullptr;
}

const FingerprintRecord* StoreSnapshot::lookup_exact(const Fingerprint& fp) const
{
    const auto* record = find(fp.bssid);
    return record && record->fingerprint == fp ? record : nullptr;
}

std::vector<const FingerprintRecord*> StoreSnapshot::lookup_by_ssid(const std::optional<Bytes>& ssid) const
{
    std::vector<const FingerprintRecord*> out;
    for (const auto& r : records_) {
        if (r.fingerprint.ssid == ssid) {
            out.push_back(&r);
        }
    }
    return out;
}

std::int64_t system_clock_ms()
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

FingerprintStore::FingerprintStore(ClockMs clock) : clock_(std::move(clock)) {}

FingerprintRecord FingerprintStore::enroll(const BeaconFrame& frame, int observed_ssi_dbm, std::string label)
{
    return enroll(build_fingerprint(frame), observed_ssi_dbm, std::move(label));
}

FingerprintRecord FingerprintStore::enroll(const Fingerprint& fp, int observed_ssi_dbm, std::string label)
{
    std::unique_lock lock(mutex_);
    const std::int64_t now = clock_();
    FingerprintRecord record{fp, observed_ssi_dbm, std::move(label), now, now};
    if (auto it = records_.find(fp.bssid); it != records_.end()) {
        if (it->second.fingerprint == fp) {
            if (it->second.max_ssi_dbm == observed_ssi_dbm && it->second.label == record.label) {
                return it->second;
            }
            record.enrolled_at_ms = it->second.enrolled_at_ms;
        }
        unindex_ssid_locked(it->second);
        it->second = record;
    } else {
        records_.emplace(fp.bssid, record);
    }
    index_ssid_locked(record);
    return record;
}

void FingerprintStore::update_observation(const MacAddress& bssid, int observed_ssi_dbm)
{
    std::unique_lock lock(mutex_);
    auto it = records_.find(bssid);
    if (it == records_.end()) {
        throw Error(Errc::UnknownBssid, bssid.to_string() + " is not enrolled");
    }
    if (observed_ssi_dbm > it->second.max_ssi_dbm) {
        it->second.max_ssi_dbm = observed_ssi_dbm;
        it->second.updated_at_ms = clock_();
    }
}

FingerprintRecord FingerprintStore::reset_ssi(const MacAddress& bssid, int new_max_ssi_dbm)
{
    std::unique_lock lock(mutex_);
    auto it = records_.find(bssid);
    if (it == records_.end()) {
        throw Error(Errc::UnknownBssid, bssid.to_string() + " is not enrolled");
    }
    it->second.max_ssi_dbm = new_max_ssi_dbm;
    it->second.updated_at_ms = clock_();
    return it->second;
}

bool FingerprintStore::remove(const MacAddress& bssid)
{
    std::unique_lock lock(mutex_);
    auto it = records_.find(bssid);
    if (it == records_.end()) {
        return false;
    }
    unindex_ssid_locked(it->second);
    records_.erase(it);
    return true;
}

std::optional<FingerprintRecord> FingerprintStore::find(const MacAddress& bssid) const
{
    std::shared_lock lock(mutex_);
    auto it = records_.find(bssid);
    if (it == records_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<FingerprintRecord> FingerprintStore::lookup_exact(const Fingerprint& fp) const
{
    std::shared_lock lock(mutex_);
    auto it = records_.find(fp.bssid);
    if (it == records_.end() || !(it->second.fingerprint == fp)) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<FingerprintRecord> FingerprintStore::lookup_by_ssid(const std::optional<Bytes>& ssid) const
{
    std::shared_lock lock(mutex_);
    std::vector<FingerprintRecord> out;
    auto [first, last] = by_ssid_.equal_range(ssid);
    for (auto it = first; it != last; ++it) {
        out.push_back(records_.at(it->second));
    }
    std::sort(out.begin(), out.end(),
              [](const FingerprintRecord& a, const FingerprintRecord& b) { return a.bssid() < b.bssid(); });
    return out;
}

StoreSnapshot FingerprintStore::snapshot() const
{
    std::shared_lock lock(mutex_);
    std::vector<FingerprintRecord> records;
    records.reserve(records_.size());
    for (const auto& [_, r] : records_) {
        records.push_back(r);
    }
    return StoreSnapshot(std::move(records));
}

std::size_t FingerprintStore::size() const
{
    std::shared_lock lock(mutex_);
    return records_.size();
}

void FingerprintStore::index_ssid_locked(const FingerprintRecord& record)
{
    by_ssid_.emplace(record.fingerprint.ssid, record.bssid());
}

void FingerprintStore::unindex_ssid_locked(const FingerprintRecord& record)
{
    auto [first, last] = by_ssid_.equal_range(record.fingerprint.ssid);
    for (auto it = first; it != last; ++it) {
        if (it->second == record.bssid()) {
            by_ssid_.erase(it);
            return;
        }
    }
}

namespace {

// Labels are free text; tab, newline, CR and '%' are percent-escaped.
std::string escape_label(const std::string& label)
{
    std::string out;
    for (char c : label) {
        if (c == '\t' || c == '\n' || c == '\r' || c == '%') {
            const auto b = static_cast<std::uint8_t>(c);
            out += "%" + to_hex(ByteView(&b, 1));
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string unescape_label(const std::string& text)
{
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '%') {
            if (i + 2 >= text.size()) {
                throw Error(Errc::MalformedRecord, "dangling escape in label");
            }
            const Bytes b = from_hex(text.substr(i + 1, 2));
            out.push_back(static_cast<char>(b.at(0)));
            i += 2;
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::vector<std::string> split_tabs(const std::string& line)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        parts.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) {
            break;
        }
        start = tab + 1;
    }
    return parts;
}

} // namespace

void FingerprintStore::save_to(std::ostream& out) const
{
    const StoreSnapshot snap = snapshot();
    out << "# etguard fingerprint store v1\n";
    out << "# label\tbssid\tmax_ssi_dbm\tenrolled_at_ms\tupdated_at_ms\tfingerprint\n";
    for (const auto& r : snap.records()) {
        out << escape_label(r.label) << '\t' << r.bssid().to_string() << '\t' << r.max_ssi_dbm << '\t'
            << r.enrolled_at_ms << '\t' << r.updated_at_ms << '\t' << to_hex(serialize(r.fingerprint)) << '\n';
    }
}

void FingerprintStore::persist(const std::filesystem::path& path) const
{
    // Write-then-rename so a crash never leaves a half-written store.
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw Error(Errc::Io, "cannot create " + tmp.string());
        }
        save_to(out);
        if (!out) {
            throw Error(Errc::Io, "write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void FingerprintStore::load_from(std::istream& in, const std::string& source_name)
{
    std::map<MacAddress, FingerprintRecord> loaded;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto fail = [&](const std::string& why) {
            return Error(Errc::CorruptStore, source_name + ":" + std::to_string(line_no) + ": " + why);
        };
        const auto parts = split_tabs(line);
        if (parts.size() != 6) {
            throw fail("expected 6 tab-separated fields, found " + std::to_string(parts.size()));
        }
        try {
            FingerprintRecord r;
            r.label = unescape_label(parts[0]);
            const MacAddress bssid = MacAddress::parse(parts[1]);
            std::size_t used = 0;
            r.max_ssi_dbm = std::stoi(parts[2], &used);
            if (used != parts[2].size()) {
                throw fail("bad max_ssi_dbm '" + parts[2] + "'");
            }
            r.enrolled_at_ms = std::stoll(parts[3]);
            r.updated_at_ms = std::stoll(parts[4]);
            r.fingerprint = parse_fingerprint(from_hex(parts[5]));
            if (r.fingerprint.bssid != bssid) {
                throw fail("BSSID column disagrees with the fingerprint");
            }
            if (loaded.count(bssid)) {
                throw fail("duplicate record for " + bssid.to_string());
            }
            loaded.emplace(bssid, std::move(r));
        } catch (const Error& e) {
            if (e.code() == Errc::CorruptStore) {
                throw;
            }
            throw fail(e.what());
        } catch (const std::exception& e) {
            throw fail(std::string("unparseable number: ") + e.what());
        }
    }

    std::unique_lock lock(mutex_);
    records_ = std::move(loaded);
    by_ssid_.clear();
    for (const auto& [_, r] : records_) {
        index_ssid_locked(r);
    }
}

void FingerprintStore::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open store " + path.string());
    }
    load_from(in, path.string());
}

} // namespace etguard
