#include "thermoguard/client_sim.hpp"

#include <httplib.h>

#include "thermoguard/error.hpp"
#include "thermoguard/wire.hpp"

namespace thermoguard {

using nlohmann::json;

struct ApiClient::Impl {
    httplib::Client http;

    Impl(const std::string& base_url, bool keep_alive) : http(base_url) {
        http.set_keep_alive(keep_alive);
        http.set_tcp_nodelay(true);
        http.set_connection_timeout(5, 0);
        http.set_read_timeout(30, 0);
        http.set_write_timeout(30, 0);
    }

    json call(const char* path, const json* body) {
        auto result = body ? http.Post(path, body->dump(), "application/json") : http.Get(path);
        if (!result) throw Error(Errc::ServerUnreachable, httplib::to_string(result.error()));
        json parsed = json::parse(result->body, nullptr, false);
        if (result->status >= 200 && result->status < 300) {
            if (parsed.is_discarded()) throw Error(Errc::BadRequest, "unparseable response");
            return parsed;
        }
        if (!parsed.is_discarded() && parsed.contains("error") && parsed["error"].is_string()) {
            const std::string name = parsed["error"].get<std::string>();
            if (auto code = parse_error_name(name)) throw Error(*code);
            throw Error(Errc::BadRequest, "unknown server error " + name);
        }
        throw Error(Errc::BadRequest, "HTTP " + std::to_string(result->status));
    }

    static Bytes b64_field(const json& body, const char* name) {
        if (!body.contains(name) || !body[name].is_string()) throw Error(Errc::BadRequest, "response lacks field");
        auto decoded = base64_decode(body[name].get<std::string>());
        if (!decoded) throw Error(Errc::BadRequest, "response field is not base64");
        return std::move(*decoded);
    }
};

ApiClient::ApiClient(const std::string& base_url, bool keep_alive)
    : impl_(std::make_unique<Impl>(base_url, keep_alive)) {}
ApiClient::~ApiClient() = default;
ApiClient::ApiClient(ApiClient&&) noexcept = default;
ApiClient& ApiClient::operator=(ApiClient&&) noexcept = default;

TraceableToken ApiClient::capture(const CaptureSubmission& sub) {
    const json body = wire::encode(sub);
    return TraceableToken{Impl::b64_field(impl_->call(wire::kCapturePath, &body), "token")};
}

Bytes ApiClient::verify(const VerifyRequest& req) {
    const json body = wire::encode(req);
    return Impl::b64_field(impl_->call(wire::kVerifyPath, &body), "sealed_score");
}

void ApiClient::register_site(const SiteRegistration& site) {
    const json body = wire::encode(site);
    impl_->call(wire::kSitesPath, &body);
}

bool ApiClient::healthy() {
    try {
        const json health = impl_->call(wire::kHealthPath, nullptr);
        return health.value("status", "") == "ok";
    } catch (const Error&) {
        return false;
    }
}

ClientContext::ClientContext(std::string ip, KeyPair keys, std::int64_t offset_ms)
    : user_ip(std::move(ip)),
      keypair(std::move(keys)),
      public_pem(keypair.verification.to_pem()),
      clock_offset_ms(offset_ms) {}

WebsiteContext WebsiteContext::random(std::string domain) {
    WebsiteContext site;
    site.domain = std::move(domain);
    site.site_key = "site-" + to_hex(random_bytes(8));
    site.shared_key = random_key();
    return site;
}

CaptureSubmission prepare_submission(const ClientContext& client, const WebsiteContext& site, ByteView frame_bytes,
                                     const Nonce& nonce, Timestamp ts) {
    Bytes payload = append_trailer(frame_bytes, nonce, ts);
    Bytes signature = sign(digest(payload), client.keypair.signing);
    return CaptureSubmission{site.domain,        client.user_ip,        site.site_key,
                             std::move(payload), std::move(signature), client.public_pem};
}

CaptureSubmission prepare_submission(const ClientContext& client, const WebsiteContext& site, const ThermalFrame& frame) {
    return prepare_submission(client, site, encode_frame(frame), random_nonce(), client.clock());
}

SolveResult solve_captcha(const ClientContext& client, const WebsiteContext& site, const SceneKind& scene,
                          std::uint64_t scene_seed, ApiClient& api) {
    const CaptureSubmission sub = prepare_submission(client, site, generate_scene(scene, scene_seed));
    const auto t0 = std::chrono::steady_clock::now();
    TraceableToken token = api.capture(sub);
    const auto latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0);
    return SolveResult{std::move(token), latency};
}

RiskScore open_site_score(const WebsiteContext& site, ByteView sealed) {
    try {
        return open_score(sealed, site.shared_key);
    } catch (const Error& e) {
        throw Error(Errc::SealOpenFailure, e.what());
    }
}

VerifyDecision forward_and_verify(const WebsiteContext& site, const TraceableToken& token, const std::string& uid,
                                  const Digest& device_fp, ApiClient& api) {
    VerifyRequest req{site.site_key, site.shared_key, token, uid, device_fp};
    const RiskScore score = open_site_score(site, api.verify(req));
    return VerifyDecision{score.value() > site.accept_threshold, score.value()};
}

} // namespace thermoguard
