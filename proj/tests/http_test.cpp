#include <gtest/gtest.h>

#include <atomic>

#include <httplib.h>

#include "support.hpp"
#include "thermoguard/error.hpp"
#include "thermoguard/wire.hpp"

using namespace thermoguard;
using thermoguard::testing::LiveServer;
using thermoguard::testing::test_key;

namespace {

template <typename Fn>
Errc error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::StorageError;
}

struct ShiftableClock {
    std::atomic<std::int64_t> shift_ms{0};
    Timestamp operator()() const { return offset_by(now_utc(), shift_ms.load()); }
};

} // namespace

TEST(Wire, CaptureRoundTrip) {
    const CaptureSubmission sub{"d.example", "192.0.2.1", "sk", Bytes{1, 2, 3}, Bytes{4, 5}, "PEM"};
    const CaptureSubmission back = wire::decode_capture(wire::encode(sub));
    EXPECT_EQ(back.domain, sub.domain);
    EXPECT_EQ(back.user_ip, sub.user_ip);
    EXPECT_EQ(back.site_key, sub.site_key);
    EXPECT_EQ(back.payload, sub.payload);
    EXPECT_EQ(back.signature, sub.signature);
    EXPECT_EQ(back.public_key, sub.public_key);
}

TEST(Wire, VerifyAndSiteRoundTrip) {
    VerifyRequest req{"sk", random_key(), TraceableToken{Bytes{9, 9}}, "uid", digest(as_bytes("x"))};
    const VerifyRequest back = wire::decode_verify(wire::encode(req));
    EXPECT_EQ(back.shared_key, req.shared_key);
    EXPECT_EQ(back.token, req.token);
    EXPECT_EQ(back.device_fp, req.device_fp);
    const SiteRegistration site{"k", random_key(), "d"};
    EXPECT_EQ(wire::decode_site(wire::encode(site)), site);
}

TEST(Wire, MalformedBodiesAreBadRequest) {
    using nlohmann::json;
    EXPECT_EQ(error_of([] { wire::decode_capture(json::array()); }), Errc::BadRequest);
    EXPECT_EQ(error_of([] { wire::decode_capture(json{{"domain", "x"}}); }), Errc::BadRequest);
    json body = wire::encode(VerifyRequest{"sk", random_key(), {}, "u", {}});
    body["shared_key"] = "AAAA";
    EXPECT_EQ(error_of([&] { wire::decode_verify(body); }), Errc::BadRequest);
    body["shared_key"] = "***";
    EXPECT_EQ(error_of([&] { wire::decode_verify(body); }), Errc::BadRequest);
    body["shared_key"] = 5;
    EXPECT_EQ(error_of([&] { wire::decode_verify(body); }), Errc::BadRequest);
}

TEST(Wire, StatusMapping) {
    EXPECT_EQ(wire::http_status(Errc::InvalidFormat), 400);
    EXPECT_EQ(wire::http_status(Errc::ContextMismatch), 401);
    EXPECT_EQ(wire::http_status(Errc::NotHuman), 403);
    EXPECT_EQ(wire::http_status(Errc::UnknownSession), 404);
    EXPECT_EQ(wire::http_status(Errc::NonceReplayed), 409);
    EXPECT_EQ(wire::http_status(Errc::DuplicateSiteKey), 409);
    EXPECT_EQ(wire::http_status(Errc::TokenExpired), 410);
    EXPECT_EQ(wire::http_status(Errc::StorageError), 500);
}

TEST(ErrorNames, RoundTrip) {
    for (int i = 0; i <= static_cast<int>(Errc::StorageError); ++i) {
        const auto code = static_cast<Errc>(i);
        EXPECT_EQ(parse_error_name(error_name(code)), code);
    }
    EXPECT_FALSE(parse_error_name("Nope"));
}

class LiveTest : public ::testing::Test {
protected:
    LiveTest()
        : server_(ServerConfig{}, [this] { return clock_(); }),
          api_(server_.url()),
          site_(WebsiteContext::random("live.example")),
          client_("192.0.2.44", test_key(0)) {
        api_.register_site(site_.registration());
    }

    ShiftableClock clock_;
    LiveServer server_;
    ApiClient api_;
    WebsiteContext site_;
    ClientContext client_;
};

TEST_F(LiveTest, Health) {
    EXPECT_TRUE(api_.healthy());
    httplib::Client raw(server_.url());
    auto res = raw.Get(wire::kHealthPath);
    ASSERT_TRUE(res);
    const auto body = nlohmann::json::parse(res->body);
    EXPECT_EQ(body["status"], "ok");
    EXPECT_TRUE(body["uptime_ms"].is_number_integer());
}

TEST_F(LiveTest, SiteRegistrationStatuses) {
    httplib::Client raw(server_.url());
    const WebsiteContext fresh = WebsiteContext::random("fresh.example");
    auto res = raw.Post(wire::kSitesPath, wire::encode(fresh.registration()).dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    SiteRegistration clash = fresh.registration();
    clash.shared_key = random_key();
    res = raw.Post(wire::kSitesPath, wire::encode(clash).dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 409);
    EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "DuplicateSiteKey");
    EXPECT_EQ(error_of([&] { api_.register_site(clash); }), Errc::DuplicateSiteKey);
}

TEST_F(LiveTest, MalformedJsonIsBadRequest) {
    httplib::Client raw(server_.url());
    auto res = raw.Post(wire::kCapturePath, "{not json", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "BadRequest");
}

TEST_F(LiveTest, SolveAndVerify) {
    const SolveResult solved = solve_captcha(client_, site_, SceneKind::human(), 7, api_);
    EXPECT_GT(solved.latency.count(), 0);
    const VerifyDecision d = forward_and_verify(site_, solved.token, client_, api_);
    EXPECT_TRUE(d.accepted);
    EXPECT_GT(d.score, 0.5);
    EXPECT_EQ(error_of([&] { forward_and_verify(site_, solved.token, client_, api_); }), Errc::TokenConsumed);
}

TEST_F(LiveTest, StricterSitePolicy) {
    WebsiteContext strict = site_;
    strict.accept_threshold = 0.99;
    const SolveResult solved = solve_captcha(client_, strict, SceneKind::human(), 8, api_);
    const VerifyDecision d = forward_and_verify(strict, solved.token, client_, api_);
    EXPECT_FALSE(d.accepted);
    EXPECT_GT(d.score, 0.5);
}

TEST_F(LiveTest, NonHumanAndStaleAreRejected) {
    EXPECT_EQ(error_of([&] { solve_captcha(client_, site_, SceneKind::of(SceneType::hot_object), 3, api_); }),
              Errc::NotHuman);
    const ClientContext skewed("192.0.2.45", test_key(0), -10 * 60'000);
    EXPECT_EQ(error_of([&] { solve_captcha(skewed, site_, SceneKind::human(), 3, api_); }), Errc::StaleTimestamp);
}

TEST_F(LiveTest, TokenExpiresOnServerClock) {
    const SolveResult solved = solve_captcha(client_, site_, SceneKind::human(), 9, api_);
    clock_.shift_ms = 120'001;
    EXPECT_EQ(error_of([&] { forward_and_verify(site_, solved.token, client_, api_); }), Errc::TokenExpired);
}

TEST_F(LiveTest, ForwardedTokenRejectedOverHttp) {
    const SolveResult solved = solve_captcha(client_, site_, SceneKind::human(), 10, api_);
    const ClientContext attacker("203.0.113.200", test_key(1));
    EXPECT_EQ(error_of([&] { forward_and_verify(site_, solved.token, attacker, api_); }), Errc::ContextMismatch);
    EXPECT_TRUE(forward_and_verify(site_, solved.token, client_, api_).accepted);
}

TEST_F(LiveTest, ScoreSealedForAnotherSite) {
    const WebsiteContext other = WebsiteContext::random("other.example");
    const Bytes sealed = seal_score(RiskScore(0.9), other.shared_key);
    EXPECT_EQ(error_of([&] { open_site_score(site_, sealed); }), Errc::SealOpenFailure);
    EXPECT_DOUBLE_EQ(open_site_score(other, sealed).value(), 0.9);
}

TEST_F(LiveTest, HundredHonestSolvesAllSucceed) {
    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ClientContext c("10.9.0." + std::to_string(seed), test_key(static_cast<int>(seed % 2)));
        const SolveResult solved = solve_captcha(c, site_, SceneKind::human(), seed, api_);
        accepted += forward_and_verify(site_, solved.token, c, api_).accepted ? 1 : 0;
    }
    EXPECT_EQ(accepted, 100);
    EXPECT_EQ(server_.service.tokens_issued(), 100u);
}

TEST(ApiClientTransport, UnreachableServer) {
    int port;
    {
        CaptchaService service(ServerConfig{}, make_memory_store());
        HttpFrontend frontend(service);
        port = frontend.bind("127.0.0.1", 0);
    }
    ApiClient api("http://127.0.0.1:" + std::to_string(port));
    EXPECT_FALSE(api.healthy());
    EXPECT_EQ(error_of([&] { api.register_site(WebsiteContext::random("x").registration()); }),
              Errc::ServerUnreachable);
}
