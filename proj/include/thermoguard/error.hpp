#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace thermoguard {

// Every failure the system reports. The names returned by error_name() travel
// over the wire verbatim and are matched exactly by the attack harness.
enum class Errc {
    // frame codec
    BadMagic,
    BadVersion,
    LengthMismatch,
    DimensionOutOfRange,
    ParameterOutOfRange,
    // capture payload
    InvalidFrame,
    TooShort,
    // token / score sealing
    ExpiredAtIssue,
    OuterLayerAuthFailure,
    InnerLayerAuthFailure,
    MacMismatch,
    MalformedPlaintext,
    AuthFailure,
    // server
    DuplicateSiteKey,
    UnknownSiteKey,
    InvalidFormat,
    StaleTimestamp,
    NonceReplayed,
    BadSignature,
    NotHuman,
    SharedKeyMismatch,
    TokenAuthFailure,
    TokenExpired,
    UnknownSession,
    TokenConsumed,
    ContextMismatch,
    BadRequest,
    // clients
    SealOpenFailure,
    ServerUnreachable,
    // infrastructure
    InvalidKey,
    ConfigError,
    StorageError,
};

std::string_view error_name(Errc code) noexcept;
std::optional<Errc> parse_error_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
public:
    explicit Error(Errc code);
    Error(Errc code, const std::string& detail);

    Errc code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    Errc code_;
};

} // namespace thermoguard
