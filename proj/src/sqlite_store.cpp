#include <algorithm>
#include <mutex>

#include <sqlite3.h>

#include "thermoguard/error.hpp"
#include "thermoguard/state_store.hpp"

namespace thermoguard {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS sites (
    site_key   TEXT PRIMARY KEY,
    shared_key BLOB NOT NULL,
    domain     TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS nonces (
    nonce   BLOB PRIMARY KEY,
    seen_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    session_id BLOB PRIMARY KEY,
    uid        TEXT NOT NULL,
    device_fp  BLOB NOT NULL,
    risk_score REAL NOT NULL,
    nonce      BLOB NOT NULL,
    issued_at  INTEGER NOT NULL,
    exp        INTEGER NOT NULL,
    consumed   INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX IF NOT EXISTS nonces_seen_at ON nonces(seen_at);
CREATE INDEX IF NOT EXISTS sessions_issued_at ON sessions(issued_at);
)sql";

struct StmtDeleter {
    void operator()(sqlite3_stmt* s) const noexcept { sqlite3_finalize(s); }
};
using Stmt = std::unique_ptr<sqlite3_stmt, StmtDeleter>;

template <std::size_t N>
void copy_blob(std::array<std::uint8_t, N>& dst, sqlite3_stmt* s, int col) {
    const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(s, col));
    if (!p || static_cast<std::size_t>(sqlite3_column_bytes(s, col)) != N) throw Error(Errc::StorageError, "corrupt blob");
    std::copy_n(p, N, dst.begin());
}

class SqliteStore final : public StateStore {
public:
    explicit SqliteStore(const std::string& path) {
        const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
        if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
            std::string msg = db_ ? sqlite3_errmsg(db_) : "sqlite3_open_v2";
            sqlite3_close(db_);
            throw Error(Errc::StorageError, msg);
        }
        try {
            init();
        } catch (...) {
            close();
            throw;
        }
    }

    ~SqliteStore() override { close(); }

    SqliteStore(const SqliteStore&) = delete;
    SqliteStore& operator=(const SqliteStore&) = delete;

    SiteInsert put_site(const SiteRegistration& site) override {
        std::lock_guard lock(mu_);
        Use u(insert_site_.get());
        bind_text(u.s, 1, site.site_key);
        bind_blob(u.s, 2, site.shared_key);
        bind_text(u.s, 3, site.domain);
        step_done(u.s);
        if (sqlite3_changes(db_) == 1) return SiteInsert::inserted;
        auto existing = find_site_locked(site.site_key);
        return existing && *existing == site ? SiteInsert::identical : SiteInsert::conflict;
    }

    std::optional<SiteRegistration> find_site(std::string_view site_key) const override {
        std::lock_guard lock(mu_);
        return find_site_locked(site_key);
    }

    bool insert_nonce(const Nonce& nonce, Timestamp seen_at) override {
        std::lock_guard lock(mu_);
        Use u(insert_nonce_.get());
        bind_blob(u.s, 1, nonce);
        sqlite3_bind_int64(u.s, 2, static_cast<sqlite3_int64>(seen_at.ms));
        step_done(u.s);
        return sqlite3_changes(db_) == 1;
    }

    void put_session(const SessionRecord& r) override {
        std::lock_guard lock(mu_);
        Use u(upsert_session_.get());
        bind_blob(u.s, 1, r.session_id);
        bind_text(u.s, 2, r.uid);
        bind_blob(u.s, 3, r.device_fp);
        sqlite3_bind_double(u.s, 4, r.risk_score);
        bind_blob(u.s, 5, r.nonce);
        sqlite3_bind_int64(u.s, 6, static_cast<sqlite3_int64>(r.issued_at.ms));
        sqlite3_bind_int64(u.s, 7, static_cast<sqlite3_int64>(r.exp.ms));
        sqlite3_bind_int(u.s, 8, r.consumed ? 1 : 0);
        step_done(u.s);
    }

    std::optional<SessionRecord> find_session(const SessionId& id) const override {
        std::lock_guard lock(mu_);
        Use u(select_session_.get());
        bind_blob(u.s, 1, id);
        if (step(u.s) != SQLITE_ROW) return std::nullopt;
        SessionRecord r;
        r.session_id = id;
        r.uid.assign(reinterpret_cast<const char*>(sqlite3_column_text(u.s, 0)),
                     static_cast<std::size_t>(sqlite3_column_bytes(u.s, 0)));
        copy_blob(r.device_fp, u.s, 1);
        r.risk_score = sqlite3_column_double(u.s, 2);
        copy_blob(r.nonce, u.s, 3);
        r.issued_at.ms = static_cast<std::uint64_t>(sqlite3_column_int64(u.s, 4));
        r.exp.ms = static_cast<std::uint64_t>(sqlite3_column_int64(u.s, 5));
        r.consumed = sqlite3_column_int(u.s, 6) != 0;
        return r;
    }

    bool consume_session(const SessionId& id) override {
        std::lock_guard lock(mu_);
        Use u(consume_.get());
        bind_blob(u.s, 1, id);
        step_done(u.s);
        return sqlite3_changes(db_) == 1;
    }

    std::size_t purge(Timestamp cutoff, Timestamp now) override {
        std::lock_guard lock(mu_);
        std::size_t removed = 0;
        {
            Use u(purge_nonces_.get());
            sqlite3_bind_int64(u.s, 1, static_cast<sqlite3_int64>(cutoff.ms));
            step_done(u.s);
            removed += static_cast<std::size_t>(sqlite3_changes(db_));
        }
        {
            Use u(purge_sessions_.get());
            sqlite3_bind_int64(u.s, 1, static_cast<sqlite3_int64>(cutoff.ms));
            sqlite3_bind_int64(u.s, 2, static_cast<sqlite3_int64>(now.ms));
            step_done(u.s);
            removed += static_cast<std::size_t>(sqlite3_changes(db_));
        }
        return removed;
    }

    std::size_t session_count() const override { return count(count_sessions_.get()); }
    std::size_t nonce_count() const override { return count(count_nonces_.get()); }

private:
    void init() {
        exec("PRAGMA journal_mode=WAL;");
        exec("PRAGMA synchronous=NORMAL;");
        exec("PRAGMA busy_timeout=5000;");
        exec(kSchema);

        insert_site_ = prepare("INSERT OR IGNORE INTO sites(site_key, shared_key, domain) VALUES(?, ?, ?)");
        select_site_ = prepare("SELECT shared_key, domain FROM sites WHERE site_key = ?");
        insert_nonce_ = prepare("INSERT OR IGNORE INTO nonces(nonce, seen_at) VALUES(?, ?)");
        upsert_session_ = prepare(
            "INSERT OR REPLACE INTO sessions(session_id, uid, device_fp, risk_score, nonce, issued_at, exp, consumed) "
            "VALUES(?, ?, ?, ?, ?, ?, ?, ?)");
        select_session_ = prepare(
            "SELECT uid, device_fp, risk_score, nonce, issued_at, exp, consumed FROM sessions WHERE session_id = ?");
        consume_ = prepare("UPDATE sessions SET consumed = 1 WHERE session_id = ? AND consumed = 0");
        purge_nonces_ = prepare("DELETE FROM nonces WHERE seen_at < ?");
        purge_sessions_ = prepare("DELETE FROM sessions WHERE issued_at < ? AND (consumed = 1 OR exp <= ?)");
        count_sessions_ = prepare("SELECT COUNT(*) FROM sessions");
        count_nonces_ = prepare("SELECT COUNT(*) FROM nonces");
    }

    void close() noexcept {
        // statements must be finalized before the connection closes
        for (Stmt* st : {&insert_site_, &select_site_, &insert_nonce_, &upsert_session_, &select_session_, &consume_,
                         &purge_nonces_, &purge_sessions_, &count_sessions_, &count_nonces_})
            st->reset();
        sqlite3_close(db_);
        db_ = nullptr;
    }

    // Resets and clears bindings when the statement goes out of scope.
    struct Use {
        sqlite3_stmt* s;
        explicit Use(sqlite3_stmt* stmt) : s(stmt) {}
        ~Use() {
            sqlite3_reset(s);
            sqlite3_clear_bindings(s);
        }
    };

    void exec(const char* sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "sqlite3_exec";
            sqlite3_free(err);
            throw Error(Errc::StorageError, msg);
        }
    }

    Stmt prepare(const char* sql) {
        sqlite3_stmt* s = nullptr;
        if (sqlite3_prepare_v2(db_, sql, -1, &s, nullptr) != SQLITE_OK) throw Error(Errc::StorageError, sqlite3_errmsg(db_));
        return Stmt(s);
    }

    int step(sqlite3_stmt* s) const {
        const int rc = sqlite3_step(s);
        if (rc != SQLITE_ROW && rc != SQLITE_DONE) throw Error(Errc::StorageError, sqlite3_errmsg(db_));
        return rc;
    }

    void step_done(sqlite3_stmt* s) const { step(s); }

    static void bind_text(sqlite3_stmt* s, int idx, std::string_view v) {
        sqlite3_bind_text(s, idx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    }

    template <std::size_t N>
    static void bind_blob(sqlite3_stmt* s, int idx, const std::array<std::uint8_t, N>& v) {
        sqlite3_bind_blob(s, idx, v.data(), static_cast<int>(N), SQLITE_TRANSIENT);
    }

    std::optional<SiteRegistration> find_site_locked(std::string_view site_key) const {
        Use u(select_site_.get());
        bind_text(u.s, 1, site_key);
        if (step(u.s) != SQLITE_ROW) return std::nullopt;
        SiteRegistration site;
        site.site_key = std::string(site_key);
        copy_blob(site.shared_key, u.s, 0);
        site.domain.assign(reinterpret_cast<const char*>(sqlite3_column_text(u.s, 1)),
                           static_cast<std::size_t>(sqlite3_column_bytes(u.s, 1)));
        return site;
    }

    std::size_t count(sqlite3_stmt* stmt) const {
        std::lock_guard lock(mu_);
        Use u(stmt);
        step(u.s);
        return static_cast<std::size_t>(sqlite3_column_int64(u.s, 0));
    }

    sqlite3* db_ = nullptr;
    mutable std::mutex mu_;
    Stmt insert_site_, select_site_, insert_nonce_, upsert_session_, select_session_, consume_;
    Stmt purge_nonces_, purge_sessions_, count_sessions_, count_nonces_;
};

} // namespace

std::unique_ptr<StateStore> open_sqlite_store(const std::string& path) {
    return std::make_unique<SqliteStore>(path);
}

} // namespace thermoguard
