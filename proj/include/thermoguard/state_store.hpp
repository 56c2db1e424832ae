#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "thermoguard/capture_payload.hpp"
#include "thermoguard/crypto.hpp"
#include "thermoguard/token.hpp"

namespace thermoguard {

struct SiteRegistration {
    std::string site_key;
    Key256 shared_key{};
    std::string domain;

    friend bool operator==(const SiteRegistration&, const SiteRegistration&) = default;
};

struct SessionRecord {
    SessionId session_id{};
    std::string uid;
    Digest device_fp{};
    double risk_score = 0.0;
    Nonce nonce{};
    Timestamp issued_at{};
    Timestamp exp{};
    bool consumed = false;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

enum class SiteInsert { inserted, identical, conflict };

/// Durable server state: site registrations, the nonce registry and the
/// session table. Implementations are safe for concurrent use; insert_nonce
/// and consume_session are linearizable check-and-set operations.
class StateStore {
public:
    virtual ~StateStore() = default;

    virtual SiteInsert put_site(const SiteRegistration& site) = 0;
    virtual std::optional<SiteRegistration> find_site(std::string_view site_key) const = 0;

    /// True iff the nonce was not present before this call.
    virtual bool insert_nonce(const Nonce& nonce, Timestamp seen_at) = 0;

    virtual void put_session(const SessionRecord& session) = 0;
    virtual std::optional<SessionRecord> find_session(const SessionId& id) const = 0;

    /// Flips consumed false -> true. False if missing or already consumed.
    virtual bool consume_session(const SessionId& id) = 0;

    /// Removes nonces seen before `cutoff` and sessions issued before it that
    /// are consumed or expired at `now`. Returns the number of records removed.
    virtual std::size_t purge(Timestamp cutoff, Timestamp now) = 0;

    virtual std::size_t session_count() const = 0;
    virtual std::size_t nonce_count() const = 0;
};

std::unique_ptr<StateStore> make_memory_store();

/// SQLite database in WAL mode. Throws Error(StorageError) if the file
/// cannot be opened or initialised.
std::unique_ptr<StateStore> open_sqlite_store(const std::string& path);

/// Empty path or ":memory:" gives the in-memory store, anything else SQLite.
std::unique_ptr<StateStore> open_store(const std::string& path);

} // namespace thermoguard
