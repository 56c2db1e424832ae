#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <random>

#include "thermoguard/error.hpp"
#include "thermoguard/thermal_frame.hpp"

using namespace thermoguard;

namespace {

ThermalFrame random_frame(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(kMinFrameDim, 64);
    const auto w = static_cast<std::uint16_t>(dim(rng));
    const auto h = static_cast<std::uint16_t>(dim(rng));
    std::vector<std::uint16_t> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) p = static_cast<std::uint16_t>(rng());
    return ThermalFrame(w, h, std::move(px));
}

Errc decode_error(const Bytes& bytes) {
    try {
        decode_frame(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode succeeded";
    return Errc::StorageError;
}

// Flood fill written independently of the library: explicit queue, largest
// component by size, first seed in scan order on ties.
struct OracleBlob {
    std::size_t area = 0;
    int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    std::uint16_t max_ck = 0;
};

OracleBlob oracle_blob(const ThermalFrame& f) {
    std::vector<std::uint16_t> sorted(f.pixels().begin(), f.pixels().end());
    std::sort(sorted.begin(), sorted.end());
    const int threshold = sorted[sorted.size() / 2] + 500;
    const int w = f.width(), h = f.height();
    std::vector<char> seen(sorted.size(), 0);
    OracleBlob best;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (seen[sy * w + sx] || f.at(sx, sy) < threshold) continue;
            OracleBlob cur{0, sx, sx, sy, sy, 0};
            std::deque<std::pair<int, int>> q{{sx, sy}};
            seen[sy * w + sx] = 1;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop_front();
                ++cur.area;
                cur.min_x = std::min(cur.min_x, x);
                cur.max_x = std::max(cur.max_x, x);
                cur.min_y = std::min(cur.min_y, y);
                cur.max_y = std::max(cur.max_y, y);
                cur.max_ck = std::max(cur.max_ck, f.at(x, y));
                const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int nx = x + dx[k], ny = y + dy[k];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (seen[ny * w + nx] || f.at(nx, ny) < threshold) continue;
                    seen[ny * w + nx] = 1;
                    q.emplace_back(nx, ny);
                }
            }
            if (cur.area > best.area) best = cur;
        }
    }
    return best;
}

} // namespace

TEST(FrameCodec, Uniform8x8Encoding) {
    const Bytes bytes = encode_frame(ThermalFrame::uniform(8, 8, 29500));
    ASSERT_EQ(bytes.size(), 137u);
    const Bytes head{0x54, 0x48, 0x52, 0x4D, 0x01, 0x00, 0x08, 0x00, 0x08};
    EXPECT_TRUE(std::equal(head.begin(), head.end(), bytes.begin()));
    // 29500 = 0x733C, big-endian
    EXPECT_EQ(bytes[9], 0x73);
    EXPECT_EQ(bytes[10], 0x3C);
    EXPECT_EQ(decode_frame(bytes), ThermalFrame::uniform(8, 8, 29500));
}

TEST(FrameCodec, DefaultSizeEncoding) {
    EXPECT_EQ(encode_frame(ThermalFrame::uniform(160, 120, 29500)).size(), 38409u);
}

TEST(FrameCodec, RejectsPng) {
    Bytes png{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n', 0, 0, 0, 13, 'I', 'H', 'D', 'R'};
    png.resize(200, 0x42);
    EXPECT_EQ(decode_error(png), Errc::BadMagic);
}

TEST(FrameCodec, RejectsBadVersion) {
    Bytes bytes = encode_frame(ThermalFrame::uniform(8, 8, 29500));
    bytes[4] = 0x02;
    EXPECT_EQ(decode_error(bytes), Errc::BadVersion);
}

TEST(FrameCodec, RejectsShortPixelBody) {
    Bytes bytes = encode_frame(ThermalFrame::uniform(8, 8, 29500));
    bytes.resize(9 + 10);
    EXPECT_EQ(decode_error(bytes), Errc::LengthMismatch);
    bytes.resize(5);
    EXPECT_EQ(decode_error(bytes), Errc::LengthMismatch);
}

TEST(FrameCodec, RejectsTrailingBytes) {
    Bytes bytes = encode_frame(ThermalFrame::uniform(8, 8, 29500));
    bytes.push_back(0);
    EXPECT_EQ(decode_error(bytes), Errc::LengthMismatch);
}

TEST(FrameCodec, RejectsDimensionsOutOfRange) {
    Bytes bytes{0x54, 0x48, 0x52, 0x4D, 0x01, 0x00, 0x07, 0x00, 0x08};
    bytes.resize(9 + 2 * 56, 0);
    EXPECT_EQ(decode_error(bytes), Errc::DimensionOutOfRange);
    EXPECT_THROW(ThermalFrame(8, 2000, std::vector<std::uint16_t>(16000)), Error);
    EXPECT_THROW(ThermalFrame(8, 8, std::vector<std::uint16_t>(63)), Error);
}

TEST(FrameCodec, RoundTripRandomFrames) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const ThermalFrame f = random_frame(rng);
        const Bytes bytes = encode_frame(f);
        ASSERT_EQ(bytes.size(), 9 + 2 * f.pixel_count());
        ASSERT_EQ(decode_frame(bytes), f);
    }
}

TEST(FrameCodec, GarbageYieldsTypedErrors) {
    std::mt19937_64 rng(99);
    const Bytes valid = encode_frame(ThermalFrame::uniform(8, 8, 30000));
    for (int i = 0; i < 20000; ++i) {
        Bytes b;
        if (i % 2 == 0) {
            b.resize(rng() % 300);
            for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        } else {
            // mostly-valid prefixes are the interesting garbage
            b = valid;
            b.resize(rng() % (valid.size() + 8), 0);
            if (!b.empty()) b[rng() % b.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        }
        try {
            const ThermalFrame f = decode_frame(b);
            EXPECT_EQ(encode_frame(f), b);
        } catch (const Error&) {
        }
    }
}

TEST(SceneGenerator, Deterministic) {
    for (auto type : {SceneType::human, SceneType::hot_object, SceneType::cold_object, SceneType::vacuum_robot,
                      SceneType::pet, SceneType::ambient_empty}) {
        const SceneKind kind = SceneKind::of(type);
        EXPECT_EQ(generate_scene(kind, 11), generate_scene(kind, 11)) << scene_type_name(type);
        EXPECT_NE(generate_scene(kind, 11), generate_scene(kind, 12)) << scene_type_name(type);
    }
}

TEST(SceneGenerator, FrozenDigestOfHumanScene) {
    // Regression anchor for cross-platform bit-identity.
    const ThermalFrame f = generate_scene(SceneKind::human(), 7);
    std::uint64_t h = 1469598103934665603ull;
    for (auto p : f.pixels()) h = (h ^ p) * 1099511628211ull;
    const FrameStats s = frame_stats(f);
    EXPECT_EQ(s.hottest_blob_area, 2442u);
    EXPECT_EQ(h, 6472657114266590926ull);
}

TEST(SceneGenerator, AmbientHasNoBlob) {
    const FrameStats s = frame_stats(generate_scene(SceneKind::of(SceneType::ambient_empty), 1));
    EXPECT_LT(s.max_ck, 29800);
    EXPECT_EQ(s.hottest_blob_area, 0u);
}

TEST(SceneGenerator, HumanPostConditions) {
    const FrameStats s = frame_stats(generate_scene(SceneKind::human(90, 3, 90), 7));
    EXPECT_GE(s.hottest_blob_max_ck, celsius_to_ck(36.5));
    EXPECT_LE(s.hottest_blob_max_ck, celsius_to_ck(37.5));
    EXPECT_GE(s.hottest_blob_aspect, 1.2);
    EXPECT_LE(s.hottest_blob_aspect, 3.0);
}

TEST(SceneGenerator, HotObjectPostConditions) {
    const FrameStats s = frame_stats(generate_scene(SceneKind::of(SceneType::hot_object), 3));
    EXPECT_GE(s.hottest_blob_max_ck, celsius_to_ck(60.0));
    EXPECT_GT(s.hottest_blob_area, 0u);
    EXPECT_LT(static_cast<double>(s.hottest_blob_area), 0.05 * 160 * 120);
}

TEST(SceneGenerator, BlobAreaShrinksWithDistance) {
    for (std::uint64_t seed : {1u, 7u, 19u, 42u}) {
        std::size_t previous = SIZE_MAX;
        for (double d : {3.0, 4.0, 5.0, 6.0}) {
            const std::size_t area = frame_stats(generate_scene(SceneKind::human(90, d, 90), seed)).hottest_blob_area;
            EXPECT_LT(area, previous) << "seed " << seed << " distance " << d;
            previous = area;
        }
    }
}

TEST(SceneGenerator, RejectsOutOfRangePose) {
    EXPECT_THROW(generate_scene(SceneKind::human(20, 3, 90), 1), Error);
    EXPECT_THROW(generate_scene(SceneKind::human(90, 12, 90), 1), Error);
    EXPECT_THROW(generate_scene(SceneKind::human(90, 3, 60), 1), Error);
}

TEST(SceneGenerator, SceneNamesRoundTrip) {
    for (auto type : {SceneType::human, SceneType::hot_object, SceneType::cold_object, SceneType::vacuum_robot,
                      SceneType::pet, SceneType::ambient_empty})
        EXPECT_EQ(parse_scene_type(scene_type_name(type)), type);
    EXPECT_FALSE(parse_scene_type("toaster"));
}

TEST(FrameStatistics, UniformField) {
    const FrameStats s = frame_stats(ThermalFrame::uniform(16, 16, 29500));
    EXPECT_EQ(s.min_ck, 29500);
    EXPECT_EQ(s.max_ck, 29500);
    EXPECT_DOUBLE_EQ(s.mean_ck, 29500.0);
    EXPECT_EQ(s.hottest_blob_area, 0u);
}

TEST(FrameStatistics, SingleHotPixel) {
    std::vector<std::uint16_t> px(32 * 32, celsius_to_ck(22.0));
    px[10 * 32 + 5] = celsius_to_ck(37.0);
    const FrameStats s = frame_stats(ThermalFrame(32, 32, std::move(px)));
    EXPECT_EQ(s.hottest_blob_area, 1u);
    EXPECT_DOUBLE_EQ(s.hottest_blob_aspect, 1.0);
    EXPECT_EQ(s.hottest_blob_max_ck, celsius_to_ck(37.0));
}

TEST(FrameStatistics, MatchesFloodFillOracle) {
    std::vector<SceneKind> kinds{SceneKind::human(), SceneKind::human(60, 5, 85), SceneKind::of(SceneType::pet),
                                 SceneKind::of(SceneType::hot_object), SceneKind::of(SceneType::vacuum_robot),
                                 SceneKind::of(SceneType::cold_object)};
    for (const auto& kind : kinds) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const ThermalFrame f = generate_scene(kind, seed);
            const FrameStats s = frame_stats(f);
            const OracleBlob o = oracle_blob(f);

            const auto [lo, hi] = std::minmax_element(f.pixels().begin(), f.pixels().end());
            double sum = 0;
            for (auto p : f.pixels()) sum += p;
            EXPECT_EQ(s.min_ck, *lo);
            EXPECT_EQ(s.max_ck, *hi);
            EXPECT_NEAR(s.mean_ck, sum / static_cast<double>(f.pixel_count()), 1e-9);
            ASSERT_EQ(s.hottest_blob_area, o.area) << scene_type_name(kind.type) << " seed " << seed;
            if (o.area > 0) {
                const double aspect = static_cast<double>(o.max_y - o.min_y + 1) / (o.max_x - o.min_x + 1);
                EXPECT_DOUBLE_EQ(s.hottest_blob_aspect, aspect);
                EXPECT_EQ(s.hottest_blob_max_ck, o.max_ck);
            }
        }
    }
}
