#include "thermoguard/token.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <openssl/rand.h>

#include "thermoguard/error.hpp"

namespace thermoguard {

namespace {

constexpr std::string_view kInnerLabel = "thermoguard/token/server";
constexpr std::string_view kOuterLabel = "thermoguard/token/shared";
constexpr std::string_view kScoreLabel = "thermoguard/score/shared";
constexpr std::size_t kScorePlaintextSize = 8;
constexpr std::uint32_t kScoreScale = 10000;

template <std::size_t N>
void append(Bytes& out, const std::array<std::uint8_t, N>& a) {
    out.insert(out.end(), a.begin(), a.end());
}

template <std::size_t N>
void take(std::array<std::uint8_t, N>& dst, const std::uint8_t*& p) {
    std::copy_n(p, N, dst.begin());
    p += N;
}

} // namespace

SessionId random_session_id() {
    SessionId id;
    if (RAND_bytes(id.data(), static_cast<int>(id.size())) != 1) throw std::runtime_error("RAND_bytes failed");
    return id;
}

Bytes serialize_fields(const TokenFields& f) {
    if (f.uid.size() > std::numeric_limits<std::uint16_t>::max()) throw Error(Errc::ParameterOutOfRange, "uid too long");
    Bytes out;
    out.reserve(token_plaintext_size(f.uid.size()) - kDigestSize);
    put_u16_be(out, static_cast<std::uint16_t>(f.uid.size()));
    out.insert(out.end(), f.uid.begin(), f.uid.end());
    append(out, f.session_id);
    append(out, f.device_fp);
    append(out, f.nonce);
    put_u64_be(out, f.exp.ms);
    return out;
}

TokenFields deserialize_fields(ByteView bytes) {
    if (bytes.size() < 2) throw Error(Errc::MalformedPlaintext);
    const std::size_t uid_len = get_u16_be(bytes.data());
    if (bytes.size() != token_plaintext_size(uid_len) - kDigestSize) throw Error(Errc::MalformedPlaintext);

    TokenFields f;
    const std::uint8_t* p = bytes.data() + 2;
    f.uid.assign(reinterpret_cast<const char*>(p), uid_len);
    p += uid_len;
    take(f.session_id, p);
    take(f.device_fp, p);
    take(f.nonce, p);
    f.exp.ms = get_u64_be(p);
    return f;
}

Digest mac(const TokenFields& fields, const Key256& k_shared) {
    return hmac_sha256(k_shared, serialize_fields(fields));
}

namespace detail {

TraceableToken seal_plaintext(ByteView plaintext, const Key256& sk_server, const Key256& k_shared) {
    Bytes inner = aead_seal(derive_key(sk_server, kInnerLabel), plaintext);
    return TraceableToken{aead_seal(derive_key(k_shared, kOuterLabel), inner)};
}

} // namespace detail

TraceableToken seal_token(const TokenFields& fields, const Key256& sk_server, const Key256& k_shared, Timestamp now) {
    if (fields.exp <= now) throw Error(Errc::ExpiredAtIssue);
    Bytes plaintext = serialize_fields(fields);
    const Digest tag = mac(fields, k_shared);
    plaintext.insert(plaintext.end(), tag.begin(), tag.end());
    return detail::seal_plaintext(plaintext, sk_server, k_shared);
}

namespace {

struct OpenedToken {
    TokenFields fields;
    Digest tag;
};

OpenedToken open_layers(const TraceableToken& token, const Key256& sk_server, const Key256& k_shared) {
    auto inner = aead_open(derive_key(k_shared, kOuterLabel), token.ciphertext);
    if (!inner) throw Error(Errc::OuterLayerAuthFailure);
    auto plaintext = aead_open(derive_key(sk_server, kInnerLabel), *inner);
    if (!plaintext) throw Error(Errc::InnerLayerAuthFailure);
    if (plaintext->size() < kDigestSize + 2) throw Error(Errc::MalformedPlaintext);

    const ByteView all(*plaintext);
    OpenedToken out{deserialize_fields(all.first(all.size() - kDigestSize)), {}};
    std::copy_n(all.end() - static_cast<std::ptrdiff_t>(kDigestSize), kDigestSize, out.tag.begin());
    return out;
}

} // namespace

TokenFields open_token(const TraceableToken& token, const Key256& sk_server, const Key256& k_shared) {
    OpenedToken opened = open_layers(token, sk_server, k_shared);
    if (!constant_time_equal(mac(opened.fields, k_shared), opened.tag)) throw Error(Errc::MacMismatch);
    return std::move(opened.fields);
}

bool token_bound_to(const TraceableToken& token, const Key256& sk_server, const Key256& k_shared,
                    std::string_view uid, const SessionId& session_id, const Digest& device_fp) noexcept {
    try {
        const OpenedToken opened = open_layers(token, sk_server, k_shared);
        TokenFields presented{std::string(uid), session_id, device_fp, opened.fields.nonce, opened.fields.exp};
        return constant_time_equal(mac(presented, k_shared), opened.tag);
    } catch (...) {
        return false;
    }
}

RiskScore::RiskScore(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) throw Error(Errc::ParameterOutOfRange, "risk score outside [0, 1]");
}

Bytes seal_score(RiskScore score, const Key256& k_shared) {
    const auto fixed = static_cast<std::uint32_t>(std::lround(score.value() * kScoreScale));
    Bytes plaintext{static_cast<std::uint8_t>(fixed >> 24), static_cast<std::uint8_t>(fixed >> 16),
                    static_cast<std::uint8_t>(fixed >> 8), static_cast<std::uint8_t>(fixed), 0, 0, 0, 0};
    return aead_seal(derive_key(k_shared, kScoreLabel), plaintext);
}

RiskScore open_score(ByteView sealed, const Key256& k_shared) {
    auto plaintext = aead_open(derive_key(k_shared, kScoreLabel), sealed);
    if (!plaintext) throw Error(Errc::AuthFailure);
    if (plaintext->size() != kScorePlaintextSize) throw Error(Errc::MalformedPlaintext);
    const std::uint32_t fixed = get_u32_be(plaintext->data());
    const bool padded = std::all_of(plaintext->begin() + 4, plaintext->end(), [](auto b) { return b == 0; });
    if (!padded || fixed > kScoreScale) throw Error(Errc::MalformedPlaintext);
    return RiskScore(static_cast<double>(fixed) / kScoreScale);
}

} // namespace thermoguard
