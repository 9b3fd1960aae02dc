#include "etguard/http_server.hpp"

#include "etguard/error.hpp"
#include "etguard/request_queue.hpp"

#include <httplib.h>
#include <json.hpp>

#include <future>
#include <sstream>
#include <thread>

namespace etguard {

using nlohmann::json;

namespace {

int status_for(Errc code)
{
    switch (code) {
    case Errc::BadRequest:
    case Errc::MalformedRecord:
        return 400;
    case Errc::UnknownBssid:
        return 404;
    case Errc::Io:
    case Errc::BadMagic:
    case Errc::UnsupportedLinkType:
        return 422;
    default:
        return 500;
    }
}

void send_json(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, std::string_view message)
{
    send_json(res, status, {{"error", error}, {"message", message}});
}

json parse_body(const httplib::Request& req)
{
    try {
        return req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(Errc::BadRequest, std::string("invalid JSON body: ") + e.what());
    }
}

template <typename T>
T required(const json& body, const char* key)
{
    if (!body.contains(key)) {
        throw Error(Errc::BadRequest, std::string("missing '") + key + "'");
    }
    try {
        return body.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::BadRequest, std::string("wrong type for '") + key + "'");
    }
}

} // namespace

struct HttpServer::Impl {
    Impl(ScanService& s, HttpServerConfig c)
        : service(s), config(std::move(c)), queue(config.queue_capacity, config.workers)
    {
        // httplib's default also sets SO_REUSEPORT, which lets a second
        // server share the port instead of failing.
        http.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
    }

    ScanService& service;
    HttpServerConfig config;
    BoundedWorkQueue queue;
    httplib::Server http;
    std::thread listener;
    int bound_port = 0;

    bool authorized(const httplib::Request& req, httplib::Response& res) const
    {
        if (config.admin_token.empty()) {
            send_error(res, 401, "unauthorized", "admin token not configured on this server");
            return false;
        }
        if (req.get_header_value(kAdminTokenHeader) != config.admin_token) {
            send_error(res, 401, "unauthorized", std::string("missing or wrong ") + kAdminTokenHeader);
            return false;
        }
        return true;
    }

    /// Runs `fn` and turns thrown errors into JSON error responses.
    template <typename Fn>
    void guarded(httplib::Response& res, Fn&& fn)
    {
        try {
            fn();
        } catch (const Error& e) {
            send_error(res, status_for(e.code()), to_string(e.code()), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    }

    void scan(const httplib::Request& req, httplib::Response& res)
    {
        guarded(res, [&] {
            auto request = std::make_shared<ScanRequest>(scan_request_from_json(req.body));
            auto done = std::make_shared<std::promise<ScanResponse>>();
            auto result = done->get_future();
            const bool admitted = queue.try_submit([this, request, done] {
                try {
                    done->set_value(service.handle_scan(*request));
                } catch (...) {
                    done->set_exception(std::current_exception());
                }
            });
            if (!admitted) {
                res.set_header("Retry-After", "1");
                send_error(res, 503, "busy", "scan queue is full, retry later");
                return;
            }
            const auto response = result.get();
            res.status = 200;
            res.set_content(to_json(response), "application/json");
        });
    }

    void enroll(const httplib::Request& req, httplib::Response& res)
    {
        if (!authorized(req, res)) {
            return;
        }
        guarded(res, [&] {
            CaptureReadResult capture;
            std::string label;
            if (req.is_multipart_form_data()) {
                if (!req.has_file("capture")) {
                    throw Error(Errc::BadRequest, "multipart enroll needs a 'capture' part");
                }
                const auto file = req.get_file_value("capture");
                capture = read_capture_bytes(to_bytes(file.content),
                                             file.filename.empty() ? "upload" : file.filename);
                if (req.has_file("label")) {
                    label = req.get_file_value("label").content;
                }
            } else {
                const auto body = parse_body(req);
                capture = read_capture(std::filesystem::path(required<std::string>(body, "capture_path")));
                label = body.value("label", std::string());
            }
            const auto result = service.enroll_capture(capture, label);
            json records = json::array();
            for (const auto& r : result.records) {
                records.push_back(json::parse(record_to_json(r)));
            }
            send_json(res, 200, {{"enrolled", std::move(records)}, {"diagnostics", result.diagnostics}});
        });
    }

    void list_fingerprints(const httplib::Request& req, httplib::Response& res)
    {
        if (!authorized(req, res)) {
            return;
        }
        guarded(res, [&] {
            json records = json::array();
            for (const auto& r : service.fingerprints()) {
                records.push_back(json::parse(record_to_json(r)));
            }
            send_json(res, 200, {{"records", std::move(records)}});
        });
    }

    void ssi_reset(const httplib::Request& req, httplib::Response& res)
    {
        if (!authorized(req, res)) {
            return;
        }
        guarded(res, [&] {
            const auto body = parse_body(req);
            const auto bssid = MacAddress::parse(required<std::string>(body, "bssid"));
            const auto record = service.reset_ssi(bssid, required<int>(body, "max_ssi_dbm"));
            send_json(res, 200, {{"record", json::parse(record_to_json(record))}});
        });
    }

    void list_campaigns(httplib::Response& res)
    {
        guarded(res, [&] {
            json campaigns = json::array();
            for (const auto& c : service.campaigns()) {
                campaigns.push_back(json::parse(campaign_to_json(c)));
            }
            send_json(res, 200, {{"campaigns", std::move(campaigns)}});
        });
    }

    void stop_campaign(const httplib::Request& req, httplib::Response& res)
    {
        if (!authorized(req, res)) {
            return;
        }
        guarded(res, [&] {
            const auto bssid = MacAddress::parse(req.matches[1].str());
            const auto campaign = service.stop_deauth(bssid);
            send_json(res, 200, {{"campaign", campaign ? json::parse(campaign_to_json(*campaign)) : json(nullptr)}});
        });
    }

    void health(httplib::Response& res)
    {
        send_json(res, 200,
                  {{"status", "ok"},
                   {"records", service.store().size()},
                   {"queue",
                    {{"capacity", queue.capacity()}, {"in_flight", queue.in_flight()}, {"rejected", queue.rejected()}}}});
    }

    void routes()
    {
        // Intake threads must outnumber admitted scans so an overflowing
        // request still reaches the queue and gets its Busy answer.
        const std::size_t intake = config.queue_capacity + 8;
        http.new_task_queue = [intake] { return new httplib::ThreadPool(intake); };

        http.Post("/scan", [this](const httplib::Request& q, httplib::Response& r) { scan(q, r); });
        http.Post("/admin/enroll", [this](const httplib::Request& q, httplib::Response& r) { enroll(q, r); });
        http.Get("/admin/fingerprints",
                 [this](const httplib::Request& q, httplib::Response& r) { list_fingerprints(q, r); });
        http.Post("/admin/ssi-reset", [this](const httplib::Request& q, httplib::Response& r) { ssi_reset(q, r); });
        http.Get("/deauth", [this](const httplib::Request&, httplib::Response& r) { list_campaigns(r); });
        http.Post(R"(/deauth/([0-9A-Fa-f:\-]+)/stop)",
                  [this](const httplib::Request& q, httplib::Response& r) { stop_campaign(q, r); });
        http.Get("/healthz", [this](const httplib::Request&, httplib::Response& r) { health(r); });
        if (!config.ui_dir.empty()) {
            if (!http.set_mount_point("/ui", config.ui_dir.string())) {
                throw Error(Errc::Io, "dashboard directory " + config.ui_dir.string() + " does not exist");
            }
        }
    }
};

HttpServer::HttpServer(ScanService& service, HttpServerConfig config)
    : impl_(std::make_unique<Impl>(service, std::move(config)))
{
    impl_->routes();
}

HttpServer::~HttpServer()
{
    stop();
}

void HttpServer::start()
{
    auto& i = *impl_;
    if (i.config.port == 0) {
        i.bound_port = i.http.bind_to_any_port(i.config.host);
        if (i.bound_port < 0) {
            throw Error(Errc::Io, "cannot bind " + i.config.host + " on any port");
        }
    } else {
        if (!i.http.bind_to_port(i.config.host, i.config.port)) {
            throw Error(Errc::Io, "cannot bind " + i.config.host + ":" + std::to_string(i.config.port) +
                                      " (address in use or not permitted)");
        }
        i.bound_port = i.config.port;
    }
    i.listener = std::thread([&i] { i.http.listen_after_bind(); });
    i.http.wait_until_ready();
}

void HttpServer::stop()
{
    if (!impl_) {
        return;
    }
    impl_->http.stop();
    if (impl_->listener.joinable()) {
        impl_->listener.join();
    }
    impl_->queue.close();
}

bool HttpServer::running() const
{
    return impl_->http.is_running();
}

int HttpServer::port() const noexcept
{
    return impl_->bound_port;
}

std::size_t HttpServer::rejected_requests() const
{
    return impl_->queue.rejected();
}

} // namespace etguard
