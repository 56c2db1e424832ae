#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "thermoguard/captcha_service.hpp"
#include "thermoguard/crypto.hpp"
#include "thermoguard/thermal_frame.hpp"
#include "thermoguard/token.hpp"

namespace thermoguard {

/// Thin JSON-over-HTTP client for the service API. Server-side failures are
/// rethrown as Error carrying the server's error name; transport failures as
/// Error(ServerUnreachable). Not thread-safe: use one instance per thread.
class ApiClient {
public:
    /// With keep_alive off every request uses its own connection, so an idle
    /// client never holds a server worker.
    explicit ApiClient(const std::string& base_url, bool keep_alive = true);
    ~ApiClient();
    ApiClient(ApiClient&&) noexcept;
    ApiClient& operator=(ApiClient&&) noexcept;

    TraceableToken capture(const CaptureSubmission& sub);
    Bytes verify(const VerifyRequest& req);
    void register_site(const SiteRegistration& site);
    bool healthy();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// The capturing user: network origin, signing keys and clock skew.
struct ClientContext {
    std::string user_ip;
    KeyPair keypair;
    std::string public_pem;
    std::int64_t clock_offset_ms = 0;

    ClientContext(std::string ip, KeyPair keys, std::int64_t offset_ms = 0);

    std::string uid() const { return compute_uid(user_ip, public_pem); }
    Digest device_fp(std::string_view site_key) const { return compute_device_fp(user_ip, public_pem, site_key); }
    Timestamp clock() const { return offset_by(now_utc(), clock_offset_ms); }
};

/// The relying website.
struct WebsiteContext {
    std::string domain;
    std::string site_key;
    Key256 shared_key{};
    double accept_threshold = 0.5;

    static WebsiteContext random(std::string domain);
    SiteRegistration registration() const { return {site_key, shared_key, domain}; }
};

/// Client procedure: append nonce and timestamp to the encoded frame, hash,
/// sign, and package with the site and origin details.
CaptureSubmission prepare_submission(const ClientContext& client, const WebsiteContext& site, ByteView frame_bytes,
                                     const Nonce& nonce, Timestamp ts);

/// Same, with a fresh nonce and the client's own clock.
CaptureSubmission prepare_submission(const ClientContext& client, const WebsiteContext& site, const ThermalFrame& frame);

struct SolveResult {
    TraceableToken token;
    std::chrono::microseconds latency{}; // submission to token
};

SolveResult solve_captcha(const ClientContext& client, const WebsiteContext& site, const SceneKind& scene,
                          std::uint64_t scene_seed, ApiClient& api);

struct VerifyDecision {
    bool accepted = false;
    double score = 0.0;
};

/// Throws Error(SealOpenFailure) when the score does not open under the
/// site's shared key.
RiskScore open_site_score(const WebsiteContext& site, ByteView sealed);

/// Website side: redeem the token for the given client context and apply
/// the local threshold.
VerifyDecision forward_and_verify(const WebsiteContext& site, const TraceableToken& token, const std::string& uid,
                                  const Digest& device_fp, ApiClient& api);

inline VerifyDecision forward_and_verify(const WebsiteContext& site, const TraceableToken& token,
                                         const ClientContext& client, ApiClient& api) {
    return forward_and_verify(site, token, client.uid(), client.device_fp(site.site_key), api);
}

} // namespace thermoguard
