#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "thermoguard/capture_payload.hpp"
#include "thermoguard/error.hpp"

using namespace thermoguard;

namespace {

Nonce nonce_of(std::uint8_t fill) {
    Nonce n;
    n.fill(fill);
    return n;
}

} // namespace

TEST(CapturePayload, AddsExactly72Bytes) {
    const Bytes frame = encode_frame(ThermalFrame::uniform(160, 120, 30000));
    ASSERT_EQ(frame.size(), 38409u);
    EXPECT_EQ(assemble_capture(frame, random_nonce(), now_utc()).size(), 38481u);
}

TEST(CapturePayload, OverheadIsConstantForEveryFrameSize) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto w = static_cast<std::uint16_t>(8 + rng() % 200);
        const auto h = static_cast<std::uint16_t>(8 + rng() % 200);
        const Bytes frame = encode_frame(ThermalFrame::uniform(w, h, static_cast<std::uint16_t>(rng())));
        EXPECT_EQ(assemble_capture(frame, random_nonce(), Timestamp{rng()}).size() - frame.size(), kTrailerSize);
    }
}

TEST(CapturePayload, ParseInvertsAssemble) {
    const ThermalFrame f = generate_scene(SceneKind::human(), 3);
    const Nonce n = random_nonce();
    const Timestamp t{1'700'000'000'123};
    const CapturePayload p = parse_capture(assemble_capture(encode_frame(f), n, t));
    EXPECT_EQ(p.frame, f);
    EXPECT_EQ(p.frame_bytes, encode_frame(f));
    EXPECT_EQ(p.nonce, n);
    EXPECT_EQ(p.timestamp, t);
}

TEST(CapturePayload, TimestampIsBigEndianTail) {
    const Bytes frame = encode_frame(ThermalFrame::uniform(8, 8, 30000));
    const Bytes payload = assemble_capture(frame, nonce_of(0xAB), Timestamp{0x0102030405060708});
    const Bytes tail(payload.end() - 8, payload.end());
    EXPECT_EQ(tail, (Bytes{1, 2, 3, 4, 5, 6, 7, 8}));
    EXPECT_TRUE(std::all_of(payload.begin() + 137, payload.begin() + 137 + 64, [](auto b) { return b == 0xAB; }));
}

TEST(CapturePayload, DistinctNoncesDifferOnlyInNonceBytes) {
    const Bytes frame = encode_frame(generate_scene(SceneKind::human(), 1));
    const Timestamp t = now_utc();
    const Bytes a = assemble_capture(frame, nonce_of(0x00), t);
    const Bytes b = assemble_capture(frame, nonce_of(0xFF), t);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool in_nonce = i >= frame.size() && i < frame.size() + kNonceSize;
        EXPECT_EQ(a[i] != b[i], in_nonce) << "byte " << i;
    }
}

TEST(CapturePayload, TooShort) {
    try {
        parse_capture(Bytes(80, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooShort);
    }
}

TEST(CapturePayload, ForeignImageIsInvalidFrame) {
    Bytes jpeg{0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 'J', 'F', 'I', 'F'};
    jpeg.resize(4000, 0x7F);
    try {
        parse_capture(append_trailer(jpeg, random_nonce(), now_utc()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidFrame);
    }
    EXPECT_THROW(assemble_capture(jpeg, random_nonce(), now_utc()), Error);
}

TEST(Nonce, NoDuplicatesInAMillion) {
    constexpr std::size_t kCount = 1'000'000;
    // A 16-byte prefix collision would already be astronomically unlikely,
    // so comparing prefixes keeps memory small without weakening the check.
    std::vector<std::array<std::uint8_t, 16>> prefixes(kCount);
    for (auto& p : prefixes) {
        const Nonce n = random_nonce();
        std::copy_n(n.begin(), 16, p.begin());
    }
    std::sort(prefixes.begin(), prefixes.end());
    EXPECT_EQ(std::adjacent_find(prefixes.begin(), prefixes.end()), prefixes.end());
}

TEST(Timestamp, OffsetAndOrdering) {
    const Timestamp t{1'000'000};
    EXPECT_EQ(offset_by(t, -600'000).ms, 400'000u);
    EXPECT_LT(offset_by(t, -1), t);
    const auto now = now_utc().ms;
    EXPECT_GT(now, 1'600'000'000'000u); // after Sep 2020: a millisecond clock
}
