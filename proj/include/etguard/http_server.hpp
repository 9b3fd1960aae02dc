#pragma once

#include "etguard/scan_service.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace etguard {

inline constexpr const char* kAdminTokenHeader = "X-ETGuard-Token";

struct HttpServerConfig {
    std::string host = "127.0.0.1";
    int port = 8470; // 0 picks a free port
    std::size_t queue_capacity = 64;
    std::size_t workers = 4;
    /// Shared secret for admin routes; when empty those routes always refuse.
    std::string admin_token;
    /// Static dashboard assets served under /ui when set.
    std::filesystem::path ui_dir;
};

/// HTTP/1.1 JSON front end. Scans pass through a bounded work queue; when it
/// is full the request is answered 503 Busy at once.
class HttpServer {
public:
    HttpServer(ScanService& service, HttpServerConfig config);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and starts serving on a background thread. Throws Error(Io) when
    /// the address cannot be bound.
    void start();
    /// Stops accepting, lets admitted scans finish, joins threads.
    void stop();
    bool running() const;
    int port() const noexcept;

    std::size_t rejected_requests() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace etguard
