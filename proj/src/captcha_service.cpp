#include "thermoguard/captcha_service.hpp"

#include "thermoguard/error.hpp"

namespace thermoguard {

std::string compute_uid(std::string_view user_ip, std::string_view public_key_pem) {
    const Digest d = digest(as_bytes(public_key_pem));
    return std::string(user_ip) + ":" + to_hex(ByteView(d).first(4));
}

Digest compute_device_fp(std::string_view user_ip, std::string_view public_key_pem, std::string_view site_key) {
    Bytes material;
    material.reserve(user_ip.size() + public_key_pem.size() + site_key.size());
    for (auto part : {user_ip, public_key_pem, site_key}) material.insert(material.end(), part.begin(), part.end());
    return digest(material);
}

CaptchaService::CaptchaService(const ServerConfig& config, std::unique_ptr<StateStore> store,
                               std::unique_ptr<PresenceDetector> detector)
    : validity_ms_(config.validity_ms),
      skew_ms_(config.skew_ms),
      server_key_(config.server_secret_key),
      store_(std::move(store)),
      detector_(detector ? std::move(detector) : std::make_unique<HeuristicDetector>(config.detector)) {}

void CaptchaService::register_site(const SiteRegistration& site) {
    if (site.site_key.empty() || site.domain.empty()) throw Error(Errc::BadRequest, "site_key and domain required");
    if (store_->put_site(site) == SiteInsert::conflict) throw Error(Errc::DuplicateSiteKey);
}

TraceableToken CaptchaService::handle_capture(const CaptureSubmission& sub, Timestamp now) {
    // 1. relying site
    const auto site = store_->find_site(sub.site_key);
    if (!site) throw Error(Errc::UnknownSiteKey);

    // 2. format
    if (sub.domain.empty() || sub.user_ip.empty()) throw Error(Errc::InvalidFormat, "missing domain or user_ip");
    CapturePayload payload = [&] {
        try {
            return parse_capture(sub.payload);
        } catch (const Error& e) {
            throw Error(Errc::InvalidFormat, e.what());
        }
    }();

    // 3. freshness
    const std::uint64_t age = now.ms > payload.timestamp.ms ? now.ms - payload.timestamp.ms
                                                            : payload.timestamp.ms - now.ms;
    if (age > validity_ms_ + skew_ms_) throw Error(Errc::StaleTimestamp);

    // 4. nonce, burned from here on even if a later stage fails
    if (!store_->insert_nonce(payload.nonce, now)) throw Error(Errc::NonceReplayed);

    // 5. signature over the whole binary-with-metadata object
    if (!verify_sig(sub.signature, digest(sub.payload), sub.public_key)) throw Error(Errc::BadSignature);

    // 6. presence
    const Detection detection = detector_->detect(payload.frame);
    if (!decide(detection)) throw Error(Errc::NotHuman);

    // 7. session
    SessionRecord session;
    session.session_id = random_session_id();
    session.uid = compute_uid(sub.user_ip, sub.public_key);
    session.device_fp = compute_device_fp(sub.user_ip, sub.public_key, sub.site_key);
    session.risk_score = detection.confidence;
    session.nonce = payload.nonce;
    session.issued_at = now;
    session.exp = Timestamp{now.ms + validity_ms_};
    store_->put_session(session);

    // 8. token
    TokenFields fields{session.uid, session.session_id, session.device_fp, session.nonce, session.exp};
    TraceableToken token = seal_token(fields, server_key_, site->shared_key, now);
    tokens_issued_.fetch_add(1);
    return token;
}

Bytes CaptchaService::handle_verify(const VerifyRequest& req, Timestamp now) {
    // 1. site-key / shared-key pair
    const auto site = store_->find_site(req.site_key);
    if (!site) throw Error(Errc::UnknownSiteKey);
    if (!constant_time_equal(req.shared_key, site->shared_key)) throw Error(Errc::SharedKeyMismatch);

    // 2. both layers and the MAC
    TokenFields fields = [&] {
        try {
            return open_token(req.token, server_key_, site->shared_key);
        } catch (const Error& e) {
            throw Error(Errc::TokenAuthFailure, e.what());
        }
    }();

    // 3. expiry
    if (fields.exp <= now) throw Error(Errc::TokenExpired);

    // 4. session
    const auto session = store_->find_session(fields.session_id);
    if (!session) throw Error(Errc::UnknownSession);
    if (session->consumed) throw Error(Errc::TokenConsumed);

    // 5. binding: token vs. session record, and the MAC recomputed over the
    //    presenting context
    if (fields.uid != session->uid || fields.device_fp != session->device_fp || fields.nonce != session->nonce)
        throw Error(Errc::ContextMismatch);
    if (!token_bound_to(req.token, server_key_, site->shared_key, req.uid, fields.session_id, req.device_fp))
        throw Error(Errc::ContextMismatch);

    // 6. single use
    if (!store_->consume_session(fields.session_id)) throw Error(Errc::TokenConsumed);
    sessions_consumed_.fetch_add(1);

    // 7. score for the site
    return seal_score(RiskScore(session->risk_score), site->shared_key);
}

std::size_t CaptchaService::purge_expired(Timestamp now) {
    const std::uint64_t retention = 2 * validity_ms_;
    const Timestamp cutoff{now.ms > retention ? now.ms - retention : 0};
    return store_->purge(cutoff, now);
}

} // namespace thermoguard
