#pragma once

#include <json.hpp>

#include "thermoguard/captcha_service.hpp"
#include "thermoguard/error.hpp"

// JSON bodies of the HTTP API. Binary fields are base64, the public key is
// PEM text. Decoders throw Error(BadRequest) on missing or ill-typed fields.
namespace thermoguard::wire {

inline constexpr const char* kCapturePath = "/api/v1/capture";
inline constexpr const char* kVerifyPath = "/api/v1/verify";
inline constexpr const char* kSitesPath = "/api/v1/sites";
inline constexpr const char* kHealthPath = "/api/v1/health";

nlohmann::json encode(const CaptureSubmission& sub);
CaptureSubmission decode_capture(const nlohmann::json& body);

nlohmann::json encode(const VerifyRequest& req);
VerifyRequest decode_verify(const nlohmann::json& body);

nlohmann::json encode(const SiteRegistration& site);
SiteRegistration decode_site(const nlohmann::json& body);

int http_status(Errc code) noexcept;

inline nlohmann::json error_body(Errc code) {
    return {{"error", std::string(error_name(code))}};
}

} // namespace thermoguard::wire
