#include "thermoguard/wire.hpp"

namespace thermoguard::wire {

namespace {

using nlohmann::json;

std::string text_field(const json& body, const char* name) {
    auto it = body.find(name);
    if (it == body.end() || !it->is_string()) throw Error(Errc::BadRequest, std::string("missing field ") + name);
    return it->get<std::string>();
}

Bytes binary_field(const json& body, const char* name) {
    auto decoded = base64_decode(text_field(body, name));
    if (!decoded) throw Error(Errc::BadRequest, std::string("field is not base64: ") + name);
    return std::move(*decoded);
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_field(const json& body, const char* name) {
    Bytes raw = binary_field(body, name);
    if (raw.size() != N) throw Error(Errc::BadRequest, std::string("wrong length: ") + name);
    std::array<std::uint8_t, N> out;
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

void require_object(const json& body) {
    if (!body.is_object()) throw Error(Errc::BadRequest, "body must be a JSON object");
}

} // namespace

json encode(const CaptureSubmission& sub) {
    return {{"domain", sub.domain},
            {"user_ip", sub.user_ip},
            {"site_key", sub.site_key},
            {"payload", base64_encode(sub.payload)},
            {"signature", base64_encode(sub.signature)},
            {"public_key", sub.public_key}};
}

CaptureSubmission decode_capture(const json& body) {
    require_object(body);
    return CaptureSubmission{text_field(body, "domain"),      text_field(body, "user_ip"),
                             text_field(body, "site_key"),    binary_field(body, "payload"),
                             binary_field(body, "signature"), text_field(body, "public_key")};
}

json encode(const VerifyRequest& req) {
    return {{"site_key", req.site_key},
            {"shared_key", base64_encode(req.shared_key)},
            {"token", base64_encode(req.token.ciphertext)},
            {"uid", req.uid},
            {"device_fp", base64_encode(req.device_fp)}};
}

VerifyRequest decode_verify(const json& body) {
    require_object(body);
    VerifyRequest req;
    req.site_key = text_field(body, "site_key");
    req.shared_key = fixed_field<kKeySize>(body, "shared_key");
    req.token.ciphertext = binary_field(body, "token");
    req.uid = text_field(body, "uid");
    req.device_fp = fixed_field<kDigestSize>(body, "device_fp");
    return req;
}

json encode(const SiteRegistration& site) {
    return {{"domain", site.domain}, {"site_key", site.site_key}, {"shared_key", base64_encode(site.shared_key)}};
}

SiteRegistration decode_site(const json& body) {
    require_object(body);
    SiteRegistration site;
    site.domain = text_field(body, "domain");
    site.site_key = text_field(body, "site_key");
    site.shared_key = fixed_field<kKeySize>(body, "shared_key");
    return site;
}

int http_status(Errc code) noexcept {
    switch (code) {
    case Errc::BadRequest:
    case Errc::InvalidFormat:
    case Errc::StaleTimestamp:
        return 400;
    case Errc::BadSignature:
    case Errc::SharedKeyMismatch:
    case Errc::TokenAuthFailure:
    case Errc::ContextMismatch:
        return 401;
    case Errc::NotHuman:
        return 403;
    case Errc::UnknownSiteKey:
    case Errc::UnknownSession:
        return 404;
    case Errc::NonceReplayed:
    case Errc::TokenConsumed:
    case Errc::DuplicateSiteKey:
        return 409;
    case Errc::TokenExpired:
        return 410;
    default:
        return 500;
    }
}

} // namespace thermoguard::wire
