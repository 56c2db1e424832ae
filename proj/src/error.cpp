#include "thermoguard/error.hpp"

#include <array>
#include <utility>

namespace thermoguard {

namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 32> kNames{{
    {Errc::BadMagic, "BadMagic"},
    {Errc::BadVersion, "BadVersion"},
    {Errc::LengthMismatch, "LengthMismatch"},
    {Errc::DimensionOutOfRange, "DimensionOutOfRange"},
    {Errc::ParameterOutOfRange, "ParameterOutOfRange"},
    {Errc::InvalidFrame, "InvalidFrame"},
    {Errc::TooShort, "TooShort"},
    {Errc::ExpiredAtIssue, "ExpiredAtIssue"},
    {Errc::OuterLayerAuthFailure, "OuterLayerAuthFailure"},
    {Errc::InnerLayerAuthFailure, "InnerLayerAuthFailure"},
    {Errc::MacMismatch, "MacMismatch"},
    {Errc::MalformedPlaintext, "MalformedPlaintext"},
    {Errc::AuthFailure, "AuthFailure"},
    {Errc::DuplicateSiteKey, "DuplicateSiteKey"},
    {Errc::UnknownSiteKey, "UnknownSiteKey"},
    {Errc::InvalidFormat, "InvalidFormat"},
    {Errc::StaleTimestamp, "StaleTimestamp"},
    {Errc::NonceReplayed, "NonceReplayed"},
    {Errc::BadSignature, "BadSignature"},
    {Errc::NotHuman, "NotHuman"},
    {Errc::SharedKeyMismatch, "SharedKeyMismatch"},
    {Errc::TokenAuthFailure, "TokenAuthFailure"},
    {Errc::TokenExpired, "TokenExpired"},
    {Errc::UnknownSession, "UnknownSession"},
    {Errc::TokenConsumed, "TokenConsumed"},
    {Errc::ContextMismatch, "ContextMismatch"},
    {Errc::BadRequest, "BadRequest"},
    {Errc::SealOpenFailure, "SealOpenFailure"},
    {Errc::ServerUnreachable, "ServerUnreachable"},
    {Errc::InvalidKey, "InvalidKey"},
    {Errc::ConfigError, "ConfigError"},
    {Errc::StorageError, "StorageError"},
}};

} // namespace

std::string_view error_name(Errc code) noexcept {
    for (const auto& [c, name] : kNames) {
        if (c == code) return name;
    }
    return "Unknown";
}

std::optional<Errc> parse_error_name(std::string_view name) noexcept {
    for (const auto& [c, n] : kNames) {
        if (n == name) return c;
    }
    return std::nullopt;
}

Error::Error(Errc code) : std::runtime_error(std::string(error_name(code))), code_(code) {}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

} // namespace thermoguard
