#include "thermoguard/attack_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <latch>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "thermoguard/error.hpp"

namespace thermoguard {

namespace {

constexpr std::size_t kKeyPoolSize = 4;
constexpr std::size_t kFramePoolSize = 8;
constexpr std::int64_t kMinuteMs = 60'000;

// Outcome of one attempt: no error means the server accepted.
struct Outcome {
    std::optional<Errc> error;
    bool control_ok = true;
};

// RSA generation dominates setup time, so one process-wide pool is shared by
// every campaign. Contexts stay distinct through their addresses.
const std::vector<KeyPair>& key_pool() {
    static const std::vector<KeyPair> pool = [] {
        std::vector<KeyPair> keys;
        for (std::size_t i = 0; i < kKeyPoolSize; ++i) keys.push_back(gen_keypair());
        return keys;
    }();
    return pool;
}

std::mt19937_64 attempt_rng(std::uint64_t seed, std::uint64_t salt, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

std::string address(unsigned net, std::size_t i) {
    return "10." + std::to_string(net) + "." + std::to_string((i >> 8) & 0xff) + "." + std::to_string(i & 0xff);
}

ClientContext client_for(unsigned net, std::size_t i, std::size_t key_shift = 0) {
    const auto& pool = key_pool();
    return ClientContext(address(net, i), pool[(i + key_shift) % pool.size()]);
}

std::vector<Bytes> human_frames(std::uint64_t seed) {
    std::vector<Bytes> frames;
    for (std::size_t j = 0; j < kFramePoolSize; ++j)
        frames.push_back(encode_frame(generate_scene(SceneKind::human(), seed * kFramePoolSize + j)));
    return frames;
}

Outcome submit(ApiClient& api, const CaptureSubmission& sub) {
    try {
        api.capture(sub);
        return {};
    } catch (const Error& e) {
        if (e.code() == Errc::ServerUnreachable) throw;
        return {e.code()};
    }
}

void flip_bit(Bytes& data, std::size_t offset, unsigned bit) {
    data.at(offset) ^= static_cast<std::uint8_t>(1u << (bit & 7u));
}

// Runs attempt(api, i) for i in [0, n) over `parallelism` threads, each with
// its own connection. Results land at their index so aggregation order is
// fixed regardless of scheduling.
template <typename Fn>
std::vector<Outcome> run_parallel(const std::string& url, std::size_t n, std::size_t parallelism, Fn attempt) {
    std::vector<Outcome> outcomes(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        ApiClient api(url);
        for (std::size_t i = next++; i < n && !abort; i = next++) {
            try {
                outcomes[i] = attempt(api, i);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                abort = true;
            }
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return outcomes;
}

AttackReport tally(std::string attack, std::uint64_t seed, const std::vector<Outcome>& outcomes, bool control_ok) {
    std::uint64_t accepted = 0;
    std::map<std::string, std::uint64_t> errors;
    for (const auto& o : outcomes) {
        control_ok = control_ok && o.control_ok;
        if (o.error)
            ++errors[std::string(error_name(*o.error))];
        else
            ++accepted;
    }
    return make_report(std::move(attack), seed, accepted, std::move(errors), !control_ok);
}

enum Salt : std::uint64_t { kSaltFrames = 1, kSaltAttempt, kSaltControl, kSaltMisuse };

} // namespace

std::string_view attack_class_name(AttackClass c) noexcept {
    switch (c) {
    case AttackClass::replay: return "replay";
    case AttackClass::stale_timestamp: return "stale_timestamp";
    case AttackClass::nonce_reuse: return "nonce_reuse";
    case AttackClass::modified_binary: return "modified_binary";
    case AttackClass::modified_metadata: return "modified_metadata";
    case AttackClass::token_forward: return "token_forward";
    case AttackClass::non_thermal_upload: return "non_thermal_upload";
    case AttackClass::tampered_client: return "tampered_client";
    case AttackClass::non_human_scene: return "non_human_scene";
    }
    return "unknown";
}

std::optional<AttackClass> parse_attack_class(std::string_view name) noexcept {
    for (int i = 0; i <= static_cast<int>(AttackClass::non_human_scene); ++i) {
        const auto c = static_cast<AttackClass>(i);
        if (attack_class_name(c) == name) return c;
    }
    return std::nullopt;
}

bool is_mitm(AttackClass c) noexcept {
    return std::find(std::begin(kMitmClasses), std::end(kMitmClasses), c) != std::end(kMitmClasses);
}

bool is_misuse(AttackClass c) noexcept {
    return std::find(std::begin(kMisuseClasses), std::end(kMisuseClasses), c) != std::end(kMisuseClasses);
}

AttackReport make_report(std::string attack, std::uint64_t seed, std::uint64_t accepted,
                         std::map<std::string, std::uint64_t> errors, bool inconclusive) {
    AttackReport r;
    r.attack = std::move(attack);
    r.accepted = accepted;
    for (const auto& [name, count] : errors) r.rejected += count;
    r.attempts = r.accepted + r.rejected;
    r.success_pct = r.attempts == 0 ? 0.0 : 100.0 * static_cast<double>(r.accepted) / static_cast<double>(r.attempts);
    r.errors = std::move(errors);
    r.seed = seed;
    r.inconclusive = inconclusive;
    return r;
}

AttackHarness::AttackHarness(std::string server_url, HarnessOptions options)
    : url_(std::move(server_url)), options_(std::move(options)), site_(WebsiteContext::random(options_.domain)) {
    ApiClient api(url_);
    api.register_site(site_.registration());
    key_pool();
}

AttackReport AttackHarness::run_mitm_campaign(AttackClass cls, std::size_t n, std::uint64_t seed, MitmOptions opts) {
    if (!is_mitm(cls)) throw Error(Errc::ParameterOutOfRange, "not a MITM class");
    const auto frames = human_frames(seed ^ kSaltFrames);
    ApiClient api(url_);

    // Honest control from a context of its own.
    const ClientContext control_client = client_for(200, 0);
    bool control_ok = !submit(api, prepare_submission(control_client, site_, frames[0], random_nonce(), now_utc())).error;

    const auto honest = [&](std::size_t i, std::mt19937_64& rng, const Nonce& nonce, Timestamp ts) {
        const ClientContext client = client_for(1, i);
        return prepare_submission(client, site_, frames[rng() % frames.size()], nonce, ts);
    };

    std::vector<Outcome> outcomes;
    switch (cls) {
    case AttackClass::replay: {
        // One canonical submission, observed once in transit and resent verbatim.
        auto rng = attempt_rng(seed, kSaltControl, 0);
        const CaptureSubmission original = honest(0, rng, random_nonce(), now_utc());
        control_ok = !submit(api, original).error && control_ok;
        outcomes = run_parallel(url_, n, options_.parallelism,
                                [&](ApiClient& c, std::size_t) { return submit(c, original); });
        break;
    }
    case AttackClass::stale_timestamp:
        outcomes = run_parallel(url_, n, options_.parallelism, [&](ApiClient& c, std::size_t i) {
            auto rng = attempt_rng(seed, kSaltAttempt, i);
            std::uniform_int_distribution<std::int64_t> age(3 * kMinuteMs, 60 * kMinuteMs);
            const std::int64_t back = age(rng);
            return submit(c, honest(i, rng, random_nonce(), offset_by(now_utc(), -back)));
        });
        break;
    case AttackClass::nonce_reuse: {
        const Nonce shared = random_nonce();
        if (opts.preconsume_nonce) {
            auto rng = attempt_rng(seed, kSaltControl, 0);
            control_ok = !submit(api, honest(0, rng, shared, now_utc())).error && control_ok;
        }
        outcomes = run_parallel(url_, n, options_.parallelism, [&](ApiClient& c, std::size_t i) {
            auto rng = attempt_rng(seed, kSaltAttempt, i);
            return submit(c, honest(i, rng, shared, now_utc()));
        });
        break;
    }
    case AttackClass::modified_binary:
    case AttackClass::modified_metadata:
        outcomes = run_parallel(url_, n, options_.parallelism, [&](ApiClient& c, std::size_t i) {
            auto rng = attempt_rng(seed, kSaltAttempt, i);
            CaptureSubmission sub = honest(i, rng, random_nonce(), now_utc());
            const std::size_t frame_len = sub.payload.size() - kTrailerSize;
            std::size_t offset;
            if (cls == AttackClass::modified_binary)
                offset = kFrameHeaderSize + rng() % (frame_len - kFrameHeaderSize);
            else
                offset = frame_len + rng() % kTrailerSize;
            flip_bit(sub.payload, offset, static_cast<unsigned>(rng() % 8));
            return submit(c, sub);
        });
        break;
    default:
        break;
    }
    return tally(std::string(attack_class_name(cls)), seed, outcomes, control_ok);
}

AttackReport AttackHarness::run_token_forward_campaign(std::size_t n, std::uint64_t seed, ForwardOptions opts) {
    const auto frames = human_frames(seed ^ kSaltFrames);
    const auto outcomes = run_parallel(url_, n, options_.parallelism, [&](ApiClient& api, std::size_t i) {
        auto rng = attempt_rng(seed, kSaltAttempt, i);
        const ClientContext worker = client_for(3, i);
        const ClientContext attacker = client_for(4, i, 1);

        const CaptureSubmission sub = prepare_submission(worker, site_, frames[rng() % frames.size()], random_nonce(),
                                                         worker.clock());
        TraceableToken token;
        try {
            token = api.capture(sub);
        } catch (const Error& e) {
            if (e.code() == Errc::ServerUnreachable) throw;
            return Outcome{e.code(), false};
        }

        const ClientContext& presenter = opts.verify_from_worker ? worker : attacker;
        Outcome out;
        try {
            forward_and_verify(site_, token, presenter, api);
        } catch (const Error& e) {
            if (e.code() == Errc::ServerUnreachable) throw;
            out.error = e.code();
        }
        if (!opts.verify_from_worker) {
            // The rightful holder must still be able to redeem.
            try {
                forward_and_verify(site_, token, worker, api);
            } catch (const Error& e) {
                if (e.code() == Errc::ServerUnreachable) throw;
                out.control_ok = false;
            }
        }
        return out;
    });
    return tally(std::string(attack_class_name(AttackClass::token_forward)), seed, outcomes, true);
}

AttackReport AttackHarness::run_misuse_campaign(AttackClass cls, std::size_t n_per_kind, std::uint64_t seed) {
    if (!is_misuse(cls)) throw Error(Errc::ParameterOutOfRange, "not a misuse class");
    const auto frames = human_frames(seed ^ kSaltFrames);
    ApiClient api(url_);
    const bool control_ok =
        !submit(api, prepare_submission(client_for(200, 1), site_, frames[0], random_nonce(), now_utc())).error;

    const std::size_t kinds = cls == AttackClass::non_thermal_upload ? 4 : cls == AttackClass::tampered_client ? 2 : 4;
    const auto outcomes = run_parallel(url_, kinds * n_per_kind, options_.parallelism, [&](ApiClient& c,
                                                                                          std::size_t i) {
        const std::size_t kind = i / n_per_kind;
        auto rng = attempt_rng(seed, kSaltMisuse + kind, i);
        const ClientContext client = client_for(5, i);

        if (cls == AttackClass::non_thermal_upload) {
            // Foreign image-like content with a correctly signed trailer.
            const std::size_t len = 1024 + rng() % 4096;
            Bytes body;
            auto noise = [&](std::size_t count) {
                for (std::size_t k = 0; k < count; ++k) body.push_back(static_cast<std::uint8_t>(rng()));
            };
            switch (kind) {
            case 0: { // RGB-like: PNG signature then interleaved channels
                for (int b : {0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a}) body.push_back(static_cast<std::uint8_t>(b));
                noise(len);
                break;
            }
            case 1: { // grayscale-like: binary PGM
                const std::string header = "P5\n64 64\n255\n";
                body.assign(header.begin(), header.end());
                noise(64 * 64);
                break;
            }
            case 2:
                noise(len);
                break;
            default: {
                static constexpr std::string_view kWords[] = {"the ", "quick ", "thermal ", "frame ", "is ",
                                                              "not ", "here ", "\n"};
                while (body.size() < len) {
                    const auto w = kWords[rng() % std::size(kWords)];
                    body.insert(body.end(), w.begin(), w.end());
                }
                break;
            }
            }
            return submit(c, prepare_submission(client, site_, body, random_nonce(), now_utc()));
        }

        if (cls == AttackClass::tampered_client) {
            CaptureSubmission sub = prepare_submission(client, site_, frames[rng() % frames.size()], random_nonce(),
                                                       now_utc());
            if (kind == 0) {
                // Re-encode: coarser quantisation of the signed frame.
                const std::size_t frame_len = sub.payload.size() - kTrailerSize;
                const ThermalFrame original = decode_frame(ByteView(sub.payload).first(frame_len));
                std::vector<std::uint16_t> px(original.pixels().begin(), original.pixels().end());
                for (auto& p : px) p = static_cast<std::uint16_t>((p + 5) / 10 * 10);
                if (std::equal(px.begin(), px.end(), original.pixels().begin())) px[0] ^= 1;
                const Bytes reencoded = encode_frame(ThermalFrame(original.width(), original.height(), std::move(px)));
                std::copy(reencoded.begin(), reencoded.end(), sub.payload.begin());
            } else {
                // Strip metadata: the signed trailer is dropped and replaced
                // by a fresh one the signature never covered.
                const Bytes fresh = append_trailer({}, random_nonce(), now_utc());
                std::copy(fresh.begin(), fresh.end(), sub.payload.end() - kTrailerSize);
            }
            return submit(c, sub);
        }

        const SceneType scene = kNonHumanScenes[kind];
        const ThermalFrame frame = generate_scene(SceneKind::of(scene), rng());
        return submit(c, prepare_submission(client, site_, encode_frame(frame), random_nonce(), now_utc()));
    });
    return tally(std::string(attack_class_name(cls)), seed, outcomes, control_ok);
}

AttackReport AttackHarness::run_nonce_burst(std::size_t width, std::uint64_t seed) {
    const auto frames = human_frames(seed ^ kSaltFrames);
    const Nonce shared = random_nonce();
    std::vector<CaptureSubmission> subs;
    for (std::size_t i = 0; i < width; ++i) {
        auto rng = attempt_rng(seed, kSaltAttempt, i);
        subs.push_back(prepare_submission(client_for(6, i), site_, frames[rng() % frames.size()], shared, now_utc()));
    }

    std::vector<Outcome> outcomes(width);
    std::vector<std::optional<ApiClient>> clients(width);
    for (auto& c : clients) c.emplace(url_, false);
    std::latch go(static_cast<std::ptrdiff_t>(width));
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < width; ++i) {
        threads.emplace_back([&, i] {
            go.arrive_and_wait();
            try {
                outcomes[i] = submit(*clients[i], subs[i]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    AttackReport report = tally("nonce_reuse:burst", seed, outcomes, true);
    report.inconclusive = report.accepted == 0;
    return report;
}

AttackReport AttackHarness::run(AttackClass cls, std::size_t n, std::uint64_t seed) {
    if (cls == AttackClass::token_forward) return run_token_forward_campaign(n, seed);
    if (is_misuse(cls)) return run_misuse_campaign(cls, n, seed);
    return run_mitm_campaign(cls, n, seed);
}

std::string render_report(const std::vector<AttackReport>& reports, ReportFormat format) {
    if (format == ReportFormat::json) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& r : reports) {
            nlohmann::ordered_json errors = nlohmann::ordered_json::object();
            for (const auto& [name, count] : r.errors) errors[name] = count;
            out.push_back({{"class", r.attack},
                           {"attempts", r.attempts},
                           {"accepted", r.accepted},
                           {"rejected", r.rejected},
                           {"success_pct", r.success_pct},
                           {"errors", errors},
                           {"seed", r.seed},
                           {"inconclusive", r.inconclusive}});
        }
        return out.dump(2) + "\n";
    }

    std::size_t name_width = std::string_view("Attack Type").size();
    for (const auto& r : reports) name_width = std::max(name_width, r.attack.size());
    std::string text;
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %8s  %8s  %8s  %11s\n", static_cast<int>(name_width), "Attack Type",
                  "Attempts", "Accepted", "Rejected", "Success (%)");
    text += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-*s  %8llu  %8llu  %8llu  %11.1f%s\n", static_cast<int>(name_width),
                      r.attack.c_str(), static_cast<unsigned long long>(r.attempts),
                      static_cast<unsigned long long>(r.accepted), static_cast<unsigned long long>(r.rejected),
                      r.success_pct, r.inconclusive ? "  (inconclusive)" : "");
        text += line;
    }
    return text;
}

std::vector<AttackReport> parse_reports(std::string_view json_text) {
    using nlohmann::json;
    const json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::BadRequest, "report is not JSON");

    auto one = [](const json& j) {
        try {
            AttackReport r;
            r.attack = j.at("class").get<std::string>();
            r.attempts = j.at("attempts").get<std::uint64_t>();
            r.accepted = j.at("accepted").get<std::uint64_t>();
            r.rejected = j.at("rejected").get<std::uint64_t>();
            r.success_pct = j.at("success_pct").get<double>();
            r.errors = j.at("errors").get<std::map<std::string, std::uint64_t>>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.inconclusive = j.value("inconclusive", false);
            if (r.attempts != r.accepted + r.rejected) throw Error(Errc::BadRequest, "attempts != accepted + rejected");
            return r;
        } catch (const json::exception& e) {
            throw Error(Errc::BadRequest, e.what());
        }
    };

    std::vector<AttackReport> out;
    if (doc.is_array()) {
        for (const auto& j : doc) out.push_back(one(j));
    } else {
        out.push_back(one(doc));
    }
    return out;
}

} // namespace thermoguard
