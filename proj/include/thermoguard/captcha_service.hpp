#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <string_view>

#include "thermoguard/capture_payload.hpp"
#include "thermoguard/crypto.hpp"
#include "thermoguard/presence_detector.hpp"
#include "thermoguard/server_config.hpp"
#include "thermoguard/state_store.hpp"
#include "thermoguard/token.hpp"

namespace thermoguard {

/// What the client widget sends after signing its capture.
struct CaptureSubmission {
    std::string domain;
    std::string user_ip;
    std::string site_key;
    Bytes payload;          // assembled capture
    Bytes signature;        // over digest(payload)
    std::string public_key; // PEM
};

/// What a relying website sends to redeem a token.
struct VerifyRequest {
    std::string site_key;
    Key256 shared_key{};
    TraceableToken token;
    std::string uid;
    Digest device_fp{};
};

/// user_ip ":" first 8 hex digits of digest(public_key).
std::string compute_uid(std::string_view user_ip, std::string_view public_key_pem);

/// digest(user_ip || public_key || site_key).
Digest compute_device_fp(std::string_view user_ip, std::string_view public_key_pem, std::string_view site_key);

/// The verification service. Transport-agnostic: the HTTP frontend and the
/// in-process tests call the same entry points with an explicit `now`.
class CaptchaService {
public:
    CaptchaService(const ServerConfig& config, std::unique_ptr<StateStore> store,
                   std::unique_ptr<PresenceDetector> detector = nullptr);

    /// Idempotent for identical material; Error(DuplicateSiteKey) otherwise.
    void register_site(const SiteRegistration& site);

    /// Runs the capture pipeline in fixed order and returns a sealed token:
    /// site lookup, format, freshness, nonce, signature, detection, session.
    /// The first failing stage throws; only the nonce (stage 4) is ever
    /// consumed by a failed request.
    TraceableToken handle_capture(const CaptureSubmission& sub, Timestamp now);

    /// Redeems a token once and returns the risk score sealed under the
    /// site's shared key.
    Bytes handle_verify(const VerifyRequest& req, Timestamp now);

    /// Drops nonces and finished sessions older than twice the validity window.
    std::size_t purge_expired(Timestamp now);

    std::uint64_t tokens_issued() const noexcept { return tokens_issued_.load(); }
    std::uint64_t sessions_consumed() const noexcept { return sessions_consumed_.load(); }
    std::uint64_t validity_ms() const noexcept { return validity_ms_; }

    StateStore& store() noexcept { return *store_; }

private:
    std::uint64_t validity_ms_;
    std::uint64_t skew_ms_;
    Key256 server_key_;
    std::unique_ptr<StateStore> store_;
    std::unique_ptr<PresenceDetector> detector_;
    std::atomic<std::uint64_t> tokens_issued_{0};
    std::atomic<std::uint64_t> sessions_consumed_{0};
};

} // namespace thermoguard
