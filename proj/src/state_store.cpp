#include "thermoguard/state_store.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace thermoguard {

namespace {

struct ArrayHash {
    template <std::size_t N>
    std::size_t operator()(const std::array<std::uint8_t, N>& a) const noexcept {
        // inputs are uniformly random already
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t) && i < N; ++i) h = (h << 8) | a[i];
        return h;
    }
};

class MemoryStore final : public StateStore {
public:
    SiteInsert put_site(const SiteRegistration& site) override {
        std::unique_lock lock(mu_);
        auto [it, inserted] = sites_.try_emplace(site.site_key, site);
        if (inserted) return SiteInsert::inserted;
        return it->second == site ? SiteInsert::identical : SiteInsert::conflict;
    }

    std::optional<SiteRegistration> find_site(std::string_view site_key) const override {
        std::shared_lock lock(mu_);
        auto it = sites_.find(std::string(site_key));
        if (it == sites_.end()) return std::nullopt;
        return it->second;
    }

    bool insert_nonce(const Nonce& nonce, Timestamp seen_at) override {
        std::unique_lock lock(mu_);
        return nonces_.try_emplace(nonce, seen_at).second;
    }

    void put_session(const SessionRecord& session) override {
        std::unique_lock lock(mu_);
        sessions_[session.session_id] = session;
    }

    std::optional<SessionRecord> find_session(const SessionId& id) const override {
        std::shared_lock lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return std::nullopt;
        return it->second;
    }

    bool consume_session(const SessionId& id) override {
        std::unique_lock lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end() || it->second.consumed) return false;
        it->second.consumed = true;
        return true;
    }

    std::size_t purge(Timestamp cutoff, Timestamp now) override {
        std::unique_lock lock(mu_);
        std::size_t removed = std::erase_if(nonces_, [&](const auto& kv) { return kv.second < cutoff; });
        removed += std::erase_if(sessions_, [&](const auto& kv) {
            const SessionRecord& s = kv.second;
            return s.issued_at < cutoff && (s.consumed || s.exp <= now);
        });
        return removed;
    }

    std::size_t session_count() const override {
        std::shared_lock lock(mu_);
        return sessions_.size();
    }

    std::size_t nonce_count() const override {
        std::shared_lock lock(mu_);
        return nonces_.size();
    }

private:
    mutable std::shared_mutex mu_;
    std::map<std::string, SiteRegistration> sites_;
    std::unordered_map<Nonce, Timestamp, ArrayHash> nonces_;
    std::unordered_map<SessionId, SessionRecord, ArrayHash> sessions_;
};

} // namespace

std::unique_ptr<StateStore> make_memory_store() {
    return std::make_unique<MemoryStore>();
}

std::unique_ptr<StateStore> open_store(const std::string& path) {
    if (path.empty() || path == ":memory:") return make_memory_store();
    return open_sqlite_store(path);
}

} // namespace thermoguard
