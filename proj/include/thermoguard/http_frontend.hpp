#pragma once

#include <functional>
#include <memory>
#include <string>

#include "thermoguard/captcha_service.hpp"

namespace thermoguard {

using Clock = std::function<Timestamp()>;

/// Serves the JSON API for a CaptchaService:
///   POST /api/v1/capture, POST /api/v1/verify, POST /api/v1/sites,
///   GET /api/v1/health.
/// Failures answer with a 4xx/5xx status and {"error": "<name>"}.
class HttpFrontend {
public:
    HttpFrontend(CaptchaService& service, Clock clock = now_utc, std::size_t worker_threads = 16);
    ~HttpFrontend();

    HttpFrontend(const HttpFrontend&) = delete;
    HttpFrontend& operator=(const HttpFrontend&) = delete;

    /// Port 0 picks a free port. Returns the bound port; throws
    /// std::runtime_error when binding fails.
    int bind(const std::string& host, int port);

    /// Blocks until stop().
    void listen();

    /// listen() on a background thread; returns once the server accepts.
    void start();
    void stop();

    int port() const noexcept;
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace thermoguard
