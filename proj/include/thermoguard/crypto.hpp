#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "thermoguard/encoding.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace thermoguard {

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kRsaBits = 2048;

using Digest = std::array<std::uint8_t, kDigestSize>;
using Key256 = std::array<std::uint8_t, kKeySize>;

/// SHA-256.
Digest digest(ByteView data);

/// HMAC-SHA256 with an arbitrary-length key.
Digest hmac_sha256(ByteView key, ByteView data);

/// Examines every byte regardless of where the first difference is.
bool constant_time_equal(ByteView a, ByteView b) noexcept;

Key256 random_key();
Bytes random_bytes(std::size_t n);

namespace detail {
struct PkeyDeleter {
    void operator()(EVP_PKEY* k) const noexcept;
};
using PkeyPtr = std::shared_ptr<EVP_PKEY>;
} // namespace detail

class VerificationKey {
public:
    /// SubjectPublicKeyInfo PEM. Throws Error(InvalidKey).
    static VerificationKey from_pem(std::string_view pem);
    std::string to_pem() const;

    EVP_PKEY* get() const noexcept { return key_.get(); }

private:
    friend struct KeyPair;
    friend class SigningKey;
    explicit VerificationKey(detail::PkeyPtr key) : key_(std::move(key)) {}
    detail::PkeyPtr key_;
};

class SigningKey {
public:
    /// PKCS#8 PEM. Throws Error(InvalidKey).
    static SigningKey from_pem(std::string_view pem);
    std::string to_pem() const;
    VerificationKey verification_key() const;

    EVP_PKEY* get() const noexcept { return key_.get(); }

private:
    friend struct KeyPair;
    explicit SigningKey(detail::PkeyPtr key) : key_(std::move(key)) {}
    detail::PkeyPtr key_;
};

struct KeyPair {
    SigningKey signing;
    VerificationKey verification;

    static KeyPair from_pkey(detail::PkeyPtr key);
};

/// RSA-2048, e = 65537. A seed makes generation deterministic and is meant
/// for tests only; without one the OpenSSL CSPRNG is used.
KeyPair gen_keypair(std::optional<std::uint64_t> seed = std::nullopt);

/// RSASSA-PKCS1-v1_5 over a precomputed SHA-256 digest.
Bytes sign(const Digest& d, const SigningKey& key);

/// False for any invalid or malformed signature; never throws.
bool verify_sig(ByteView signature, const Digest& d, const VerificationKey& key) noexcept;
bool verify_sig(ByteView signature, const Digest& d, std::string_view public_key_pem) noexcept;

/// AES-256-GCM: nonce(12) || ciphertext || tag(16).
inline constexpr std::size_t kAeadNonceSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;
inline constexpr std::size_t kAeadOverhead = kAeadNonceSize + kAeadTagSize;

Bytes aead_seal(const Key256& key, ByteView plaintext);
std::optional<Bytes> aead_open(const Key256& key, ByteView sealed);

/// Purpose-bound subkey: HMAC-SHA256(key, label).
Key256 derive_key(const Key256& key, std::string_view label);

} // namespace thermoguard
