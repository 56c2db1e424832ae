#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "thermoguard/capture_payload.hpp"
#include "thermoguard/crypto.hpp"
#include "thermoguard/encoding.hpp"

namespace thermoguard {

inline constexpr std::size_t kSessionIdSize = 16;
using SessionId = std::array<std::uint8_t, kSessionIdSize>;

SessionId random_session_id();

/// What a traceable token binds together: who (uid), which session, which
/// device, which capture (nonce), and until when (exp).
struct TokenFields {
    std::string uid;
    SessionId session_id{};
    Digest device_fp{};
    Nonce nonce{};
    Timestamp exp{};

    friend bool operator==(const TokenFields&, const TokenFields&) = default;
};

/// uid_len(BE16) || uid || session_id || device_fp || nonce || exp(BE64).
/// Throws Error(ParameterOutOfRange) for a uid longer than 65535 bytes.
Bytes serialize_fields(const TokenFields& fields);

/// Exact inverse of serialize_fields; Error(MalformedPlaintext) otherwise.
TokenFields deserialize_fields(ByteView bytes);

/// HMAC-SHA256 over the canonical serialization.
Digest mac(const TokenFields& fields, const Key256& k_shared);

struct TraceableToken {
    Bytes ciphertext;

    friend bool operator==(const TraceableToken&, const TraceableToken&) = default;
};

/// Two AEAD layers over canonical(fields) || mac: the inner one under a key
/// derived from the server secret, the outer one under a key derived from
/// the relying site's shared key. Throws Error(ExpiredAtIssue) when
/// fields.exp <= now.
TraceableToken seal_token(const TokenFields& fields, const Key256& sk_server, const Key256& k_shared, Timestamp now);

/// Throws OuterLayerAuthFailure, InnerLayerAuthFailure, MalformedPlaintext
/// or MacMismatch, checked in that order.
TokenFields open_token(const TraceableToken& token, const Key256& sk_server, const Key256& k_shared);

/// Opens the token and recomputes the MAC over (uid, session_id, device_fp)
/// from the presented context together with the token's own nonce and exp.
/// True only when the presented context is the one the token was issued for.
bool token_bound_to(const TraceableToken& token, const Key256& sk_server, const Key256& k_shared,
                    std::string_view uid, const SessionId& session_id, const Digest& device_fp) noexcept;

/// Inner plaintext size for a given uid length.
inline constexpr std::size_t token_plaintext_size(std::size_t uid_len) {
    return 2 + uid_len + kSessionIdSize + kDigestSize + kNonceSize + kTimestampSize + kDigestSize;
}

namespace detail {
/// Seals an arbitrary inner plaintext with both layers; lets tests build
/// tokens whose MAC does not match their fields.
TraceableToken seal_plaintext(ByteView plaintext, const Key256& sk_server, const Key256& k_shared);
} // namespace detail

/// Detector confidence as reported to relying sites, in [0, 1].
class RiskScore {
public:
    /// Throws Error(ParameterOutOfRange) outside [0, 1].
    explicit RiskScore(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Single AEAD layer over an 8-byte plaintext: round(score * 10^4) as BE32
/// followed by four zero bytes.
Bytes seal_score(RiskScore score, const Key256& k_shared);

/// Throws AuthFailure or MalformedPlaintext.
RiskScore open_score(ByteView sealed, const Key256& k_shared);

} // namespace thermoguard
