#include "thermoguard/http_frontend.hpp"

#include <chrono>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "thermoguard/wire.hpp"

namespace thermoguard {

using nlohmann::json;

struct HttpFrontend::Impl {
    CaptchaService& service;
    Clock clock;
    httplib::Server server;
    std::thread thread;
    std::string host = "127.0.0.1";
    int port = -1;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    Impl(CaptchaService& s, Clock c, std::size_t workers) : service(s), clock(std::move(c)) {
        server.set_tcp_nodelay(true);
        server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
        routes();
    }

    static void reply(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    // Parses the body, runs `fn`, and maps any Error onto its wire form.
    template <typename Fn>
    void guarded(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
        try {
            json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
            if (body.is_discarded()) throw Error(Errc::BadRequest, "body is not JSON");
            fn(body);
        } catch (const Error& e) {
            reply(res, wire::http_status(e.code()), wire::error_body(e.code()));
        } catch (const std::exception&) {
            reply(res, 500, wire::error_body(Errc::StorageError));
        }
    }

    void routes() {
        server.Post(wire::kCapturePath, [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&](const json& body) {
                const TraceableToken token = service.handle_capture(wire::decode_capture(body), clock());
                reply(res, 200, {{"token", base64_encode(token.ciphertext)}});
            });
        });
        server.Post(wire::kVerifyPath, [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&](const json& body) {
                const Bytes sealed = service.handle_verify(wire::decode_verify(body), clock());
                reply(res, 200, {{"sealed_score", base64_encode(sealed)}});
            });
        });
        server.Post(wire::kSitesPath, [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&](const json& body) {
                service.register_site(wire::decode_site(body));
                reply(res, 201, {{"status", "registered"}});
            });
        });
        server.Get(wire::kHealthPath, [this](const httplib::Request&, httplib::Response& res) {
            const auto uptime = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            reply(res, 200, {{"status", "ok"}, {"uptime_ms", uptime.count()}});
        });
    }
};

HttpFrontend::HttpFrontend(CaptchaService& service, Clock clock, std::size_t worker_threads)
    : impl_(std::make_unique<Impl>(service, std::move(clock), worker_threads)) {}

HttpFrontend::~HttpFrontend() {
    stop();
}

int HttpFrontend::bind(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return impl_->port;
}

void HttpFrontend::listen() {
    impl_->started = std::chrono::steady_clock::now();
    impl_->server.listen_after_bind();
}

void HttpFrontend::start() {
    impl_->thread = std::thread([this] { listen(); });
    impl_->server.wait_until_ready();
}

void HttpFrontend::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpFrontend::port() const noexcept {
    return impl_->port;
}

std::string HttpFrontend::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

} // namespace thermoguard
