#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <latch>
#include <thread>

#include "thermoguard/error.hpp"
#include "thermoguard/state_store.hpp"

using namespace thermoguard;
namespace fs = std::filesystem;

namespace {

fs::path temp_db() {
    return fs::temp_directory_path() / ("thermoguard-" + to_hex(random_bytes(8)) + ".db");
}

void remove_db(const fs::path& p) {
    for (const char* suffix : {"", "-wal", "-shm"}) fs::remove(p.string() + suffix);
}

SessionRecord session(std::uint64_t issued_ms, std::uint64_t exp_ms, bool consumed = false) {
    SessionRecord s;
    s.session_id = random_session_id();
    s.uid = "203.0.113.9:abcdef01";
    s.device_fp = digest(random_bytes(8));
    s.risk_score = 0.875;
    s.nonce = random_nonce();
    s.issued_at = Timestamp{issued_ms};
    s.exp = Timestamp{exp_ms};
    s.consumed = consumed;
    return s;
}

class StoreTest : public ::testing::TestWithParam<bool> {
protected:
    void SetUp() override {
        if (GetParam()) {
            path_ = temp_db();
            store_ = open_sqlite_store(path_.string());
        } else {
            store_ = make_memory_store();
        }
    }
    void TearDown() override {
        store_.reset();
        if (!path_.empty()) remove_db(path_);
    }

    fs::path path_;
    std::unique_ptr<StateStore> store_;
};

} // namespace

TEST_P(StoreTest, Sites) {
    const SiteRegistration site{"site-1", random_key(), "shop.example"};
    EXPECT_EQ(store_->put_site(site), SiteInsert::inserted);
    EXPECT_EQ(store_->put_site(site), SiteInsert::identical);
    SiteRegistration other = site;
    other.shared_key = random_key();
    EXPECT_EQ(store_->put_site(other), SiteInsert::conflict);
    EXPECT_EQ(store_->find_site("site-1"), site);
    EXPECT_FALSE(store_->find_site("site-2"));
}

TEST_P(StoreTest, NonceRegistry) {
    const Nonce n = random_nonce();
    EXPECT_TRUE(store_->insert_nonce(n, Timestamp{1}));
    EXPECT_FALSE(store_->insert_nonce(n, Timestamp{2}));
    EXPECT_TRUE(store_->insert_nonce(random_nonce(), Timestamp{3}));
    EXPECT_EQ(store_->nonce_count(), 2u);
}

TEST_P(StoreTest, Sessions) {
    const SessionRecord s = session(1000, 121000);
    store_->put_session(s);
    EXPECT_EQ(store_->find_session(s.session_id), s);
    EXPECT_FALSE(store_->find_session(random_session_id()));
    EXPECT_TRUE(store_->consume_session(s.session_id));
    EXPECT_FALSE(store_->consume_session(s.session_id));
    EXPECT_FALSE(store_->consume_session(random_session_id()));
    EXPECT_TRUE(store_->find_session(s.session_id)->consumed);
    EXPECT_EQ(store_->session_count(), 1u);
}

TEST_P(StoreTest, PurgeRules) {
    const std::uint64_t now = 1'000'000;
    const std::uint64_t cutoff = now - 240'000;
    EXPECT_EQ(store_->purge(Timestamp{cutoff}, Timestamp{now}), 0u);

    store_->insert_nonce(random_nonce(), Timestamp{now - 300'000}); // old
    store_->insert_nonce(random_nonce(), Timestamp{now - 10'000});  // recent
    store_->put_session(session(now - 300'000, now - 180'000));        // old and expired
    store_->put_session(session(now - 300'000, now + 60'000, true));   // old and consumed
    const SessionRecord live = session(now - 300'000, now + 60'000);   // old but still valid
    store_->put_session(live);
    store_->put_session(session(now - 10'000, now - 1));               // recent

    EXPECT_EQ(store_->purge(Timestamp{cutoff}, Timestamp{now}), 3u);
    EXPECT_EQ(store_->nonce_count(), 1u);
    EXPECT_EQ(store_->session_count(), 2u);
    EXPECT_TRUE(store_->find_session(live.session_id));
}

TEST_P(StoreTest, ConcurrentNonceInsertIsAtomic) {
    constexpr int kThreads = 32;
    for (int trial = 0; trial < 10; ++trial) {
        const Nonce n = random_nonce();
        std::atomic<int> winners{0};
        std::latch go(kThreads);
        std::vector<std::thread> threads;
        for (int t = 0; t < kThreads; ++t)
            threads.emplace_back([&] {
                go.arrive_and_wait();
                if (store_->insert_nonce(n, Timestamp{1})) ++winners;
            });
        for (auto& t : threads) t.join();
        EXPECT_EQ(winners.load(), 1);
    }
}

TEST_P(StoreTest, ConcurrentConsumeIsAtomic) {
    constexpr int kThreads = 32;
    const SessionRecord s = session(1, 1000);
    store_->put_session(s);
    std::atomic<int> winners{0};
    std::latch go(kThreads);
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t)
        threads.emplace_back([&] {
            go.arrive_and_wait();
            if (store_->consume_session(s.session_id)) ++winners;
        });
    for (auto& t : threads) t.join();
    EXPECT_EQ(winners.load(), 1);
}

INSTANTIATE_TEST_SUITE_P(Backends, StoreTest, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "Sqlite" : "Memory"; });

TEST(SqliteStore, SurvivesReopen) {
    const fs::path path = temp_db();
    const SiteRegistration site{"persist", random_key(), "p.example"};
    const SessionRecord s = session(5, 500);
    const Nonce n = random_nonce();
    {
        auto store = open_sqlite_store(path.string());
        store->put_site(site);
        store->put_session(s);
        store->insert_nonce(n, Timestamp{5});
    }
    {
        auto store = open_sqlite_store(path.string());
        EXPECT_EQ(store->find_site("persist"), site);
        EXPECT_EQ(store->find_session(s.session_id), s);
        EXPECT_FALSE(store->insert_nonce(n, Timestamp{6}));
    }
    remove_db(path);
}

TEST(SqliteStore, UnopenablePathIsStorageError) {
    try {
        open_sqlite_store("/nonexistent-dir/for/sure/x.db");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::StorageError);
    }
}

TEST(OpenStore, PicksBackend) {
    EXPECT_TRUE(open_store(""));
    EXPECT_TRUE(open_store(":memory:"));
}
