#include "thermoguard/crypto.hpp"

#include <random>
#include <stdexcept>

#include <openssl/bio.h>
#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>
#include <openssl/sha.h>

#include "thermoguard/error.hpp"

namespace thermoguard {

namespace detail {
void PkeyDeleter::operator()(EVP_PKEY* k) const noexcept {
    EVP_PKEY_free(k);
}
} // namespace detail

namespace {

template <typename T, void (*Free)(T*)>
struct OsslDeleter {
    void operator()(T* p) const noexcept { Free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, OsslDeleter<BIGNUM, BN_free>>;
using BnCtxPtr = std::unique_ptr<BN_CTX, OsslDeleter<BN_CTX, BN_CTX_free>>;
using BioPtr = std::unique_ptr<BIO, OsslDeleter<BIO, BIO_free_all>>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, OsslDeleter<EVP_PKEY_CTX, EVP_PKEY_CTX_free>>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, OsslDeleter<EVP_CIPHER_CTX, EVP_CIPHER_CTX_free>>;
using ParamBldPtr = std::unique_ptr<OSSL_PARAM_BLD, OsslDeleter<OSSL_PARAM_BLD, OSSL_PARAM_BLD_free>>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, OsslDeleter<OSSL_PARAM, OSSL_PARAM_free>>;

[[noreturn]] void openssl_failure(const char* what) {
    throw std::runtime_error(std::string("openssl: ") + what);
}

detail::PkeyPtr wrap(EVP_PKEY* k) {
    return detail::PkeyPtr(k, detail::PkeyDeleter{});
}

std::string bio_to_string(BIO* bio) {
    char* data = nullptr;
    long len = BIO_get_mem_data(bio, &data);
    return std::string(data, static_cast<std::size_t>(len));
}

BnPtr new_bn() {
    BnPtr bn(BN_new());
    if (!bn) openssl_failure("BN_new");
    return bn;
}

// Deterministic prime search for seeded test keys.
BnPtr seeded_prime(std::mt19937_64& rng, const BIGNUM* e, BN_CTX* ctx) {
    std::array<unsigned char, kRsaBits / 16> buf{};
    for (std::size_t i = 0; i < buf.size(); i += 8) {
        std::uint64_t v = rng();
        for (std::size_t j = 0; j < 8; ++j) buf[i + j] = static_cast<unsigned char>(v >> (8 * j));
    }
    buf.front() |= 0xC0; // n = p*q keeps the full 2048 bits
    buf.back() |= 0x01;

    BnPtr p(BN_bin2bn(buf.data(), static_cast<int>(buf.size()), nullptr));
    BnPtr pm1 = new_bn();
    BnPtr g = new_bn();
    for (;;) {
        if (BN_check_prime(p.get(), ctx, nullptr) == 1) {
            BN_copy(pm1.get(), p.get());
            BN_sub_word(pm1.get(), 1);
            BN_gcd(g.get(), pm1.get(), e, ctx);
            if (BN_is_one(g.get())) return p;
        }
        BN_add_word(p.get(), 2);
    }
}

detail::PkeyPtr seeded_rsa(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BnCtxPtr ctx(BN_CTX_new());
    BnPtr e = new_bn();
    BN_set_word(e.get(), RSA_F4);

    BnPtr p = seeded_prime(rng, e.get(), ctx.get());
    BnPtr q = seeded_prime(rng, e.get(), ctx.get());
    while (BN_cmp(p.get(), q.get()) == 0) q = seeded_prime(rng, e.get(), ctx.get());
    if (BN_cmp(p.get(), q.get()) < 0) std::swap(p, q);

    BnPtr n = new_bn(), pm1 = new_bn(), qm1 = new_bn(), phi = new_bn(), d = new_bn();
    BnPtr dmp1 = new_bn(), dmq1 = new_bn(), iqmp = new_bn();
    BN_mul(n.get(), p.get(), q.get(), ctx.get());
    BN_sub(pm1.get(), p.get(), BN_value_one());
    BN_sub(qm1.get(), q.get(), BN_value_one());
    BN_mul(phi.get(), pm1.get(), qm1.get(), ctx.get());
    if (!BN_mod_inverse(d.get(), e.get(), phi.get(), ctx.get())) openssl_failure("BN_mod_inverse(d)");
    BN_mod(dmp1.get(), d.get(), pm1.get(), ctx.get());
    BN_mod(dmq1.get(), d.get(), qm1.get(), ctx.get());
    if (!BN_mod_inverse(iqmp.get(), q.get(), p.get(), ctx.get())) openssl_failure("BN_mod_inverse(iqmp)");

    ParamBldPtr bld(OSSL_PARAM_BLD_new());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_D, d.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR1, p.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR2, q.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT1, dmp1.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT2, dmq1.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_COEFFICIENT1, iqmp.get());
    ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
    if (!params) openssl_failure("OSSL_PARAM_BLD_to_param");

    PkeyCtxPtr pctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    EVP_PKEY* raw = nullptr;
    if (!pctx || EVP_PKEY_fromdata_init(pctx.get()) <= 0 ||
        EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) <= 0)
        openssl_failure("EVP_PKEY_fromdata");
    return wrap(raw);
}

std::string public_pem(EVP_PKEY* key) {
    BioPtr bio(BIO_new(BIO_s_mem()));
    if (!bio || PEM_write_bio_PUBKEY(bio.get(), key) != 1) openssl_failure("PEM_write_bio_PUBKEY");
    return bio_to_string(bio.get());
}

detail::PkeyPtr read_public_pem(std::string_view pem) {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    if (!bio) return nullptr;
    EVP_PKEY* k = PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr);
    if (!k) return nullptr;
    if (EVP_PKEY_get_base_id(k) != EVP_PKEY_RSA) {
        EVP_PKEY_free(k);
        return nullptr;
    }
    return wrap(k);
}

} // namespace

Digest digest(ByteView data) {
    Digest out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Digest hmac_sha256(ByteView key, ByteView data) {
    Digest out;
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len))
        openssl_failure("HMAC");
    return out;
}

bool constant_time_equal(ByteView a, ByteView b) noexcept {
    if (a.size() != b.size()) return false;
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<std::uint8_t>(a[i] ^ b[i]);
    return diff == 0;
}

Bytes random_bytes(std::size_t n) {
    Bytes out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) openssl_failure("RAND_bytes");
    return out;
}

Key256 random_key() {
    Key256 k;
    if (RAND_bytes(k.data(), static_cast<int>(k.size())) != 1) openssl_failure("RAND_bytes");
    return k;
}

VerificationKey VerificationKey::from_pem(std::string_view pem) {
    auto k = read_public_pem(pem);
    if (!k) throw Error(Errc::InvalidKey, "not an RSA public key");
    return VerificationKey(std::move(k));
}

std::string VerificationKey::to_pem() const {
    return public_pem(key_.get());
}

SigningKey SigningKey::from_pem(std::string_view pem) {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    EVP_PKEY* k = bio ? PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr) : nullptr;
    if (!k) throw Error(Errc::InvalidKey, "not a private key");
    if (EVP_PKEY_get_base_id(k) != EVP_PKEY_RSA) {
        EVP_PKEY_free(k);
        throw Error(Errc::InvalidKey, "not an RSA key");
    }
    return SigningKey(wrap(k));
}

std::string SigningKey::to_pem() const {
    BioPtr bio(BIO_new(BIO_s_mem()));
    if (!bio || PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1)
        openssl_failure("PEM_write_bio_PrivateKey");
    return bio_to_string(bio.get());
}

VerificationKey SigningKey::verification_key() const {
    return VerificationKey(read_public_pem(public_pem(key_.get())));
}

KeyPair KeyPair::from_pkey(detail::PkeyPtr key) {
    SigningKey sk(std::move(key));
    VerificationKey vk = sk.verification_key();
    return KeyPair{std::move(sk), std::move(vk)};
}

KeyPair gen_keypair(std::optional<std::uint64_t> seed) {
    if (seed) return KeyPair::from_pkey(seeded_rsa(*seed));
    EVP_PKEY* k = EVP_RSA_gen(static_cast<unsigned int>(kRsaBits));
    if (!k) openssl_failure("EVP_RSA_gen");
    return KeyPair::from_pkey(wrap(k));
}

Bytes sign(const Digest& d, const SigningKey& key) {
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
    if (!ctx || EVP_PKEY_sign_init(ctx.get()) <= 0 ||
        EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_PADDING) <= 0 ||
        EVP_PKEY_CTX_set_signature_md(ctx.get(), EVP_sha256()) <= 0)
        openssl_failure("sign init");
    std::size_t len = 0;
    if (EVP_PKEY_sign(ctx.get(), nullptr, &len, d.data(), d.size()) <= 0) openssl_failure("sign size");
    Bytes sig(len);
    if (EVP_PKEY_sign(ctx.get(), sig.data(), &len, d.data(), d.size()) <= 0) openssl_failure("sign");
    sig.resize(len);
    return sig;
}

bool verify_sig(ByteView signature, const Digest& d, const VerificationKey& key) noexcept {
    if (!key.get() || signature.empty()) return false;
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
    if (!ctx || EVP_PKEY_verify_init(ctx.get()) <= 0 ||
        EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_PADDING) <= 0 ||
        EVP_PKEY_CTX_set_signature_md(ctx.get(), EVP_sha256()) <= 0)
        return false;
    return EVP_PKEY_verify(ctx.get(), signature.data(), signature.size(), d.data(), d.size()) == 1;
}

bool verify_sig(ByteView signature, const Digest& d, std::string_view public_key_pem) noexcept {
    try {
        return verify_sig(signature, d, VerificationKey::from_pem(public_key_pem));
    } catch (...) {
        return false;
    }
}

Bytes aead_seal(const Key256& key, ByteView plaintext) {
    Bytes out(kAeadNonceSize + plaintext.size() + kAeadTagSize);
    if (RAND_bytes(out.data(), static_cast<int>(kAeadNonceSize)) != 1) openssl_failure("RAND_bytes");

    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    int len = 0;
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), out.data()) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.data() + kAeadNonceSize, &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1 ||
        EVP_EncryptFinal_ex(ctx.get(), out.data() + kAeadNonceSize + len, &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(kAeadTagSize),
                            out.data() + kAeadNonceSize + plaintext.size()) != 1)
        openssl_failure("aes-256-gcm seal");
    return out;
}

std::optional<Bytes> aead_open(const Key256& key, ByteView sealed) {
    if (sealed.size() < kAeadOverhead) return std::nullopt;
    const std::size_t body = sealed.size() - kAeadOverhead;
    Bytes tag(sealed.end() - static_cast<std::ptrdiff_t>(kAeadTagSize), sealed.end());
    Bytes out(body);

    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    int len = 0;
    if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), sealed.data()) != 1 ||
        EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data() + kAeadNonceSize, static_cast<int>(body)) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(kAeadTagSize), tag.data()) != 1 ||
        EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len) != 1)
        return std::nullopt;
    return out;
}

Key256 derive_key(const Key256& key, std::string_view label) {
    return hmac_sha256(key, as_bytes(label));
}

} // namespace thermoguard
