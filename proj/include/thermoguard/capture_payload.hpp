#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "thermoguard/encoding.hpp"
#include "thermoguard/thermal_frame.hpp"

namespace thermoguard {

inline constexpr std::size_t kNonceSize = 64;
inline constexpr std::size_t kTimestampSize = 8;
inline constexpr std::size_t kTrailerSize = kNonceSize + kTimestampSize; // 72

using Nonce = std::array<std::uint8_t, kNonceSize>;

/// Fresh nonce from the OpenSSL CSPRNG.
Nonce random_nonce();

/// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
    std::uint64_t ms = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

Timestamp now_utc();

inline Timestamp offset_by(Timestamp t, std::int64_t delta_ms) {
    return Timestamp{static_cast<std::uint64_t>(static_cast<std::int64_t>(t.ms) + delta_ms)};
}

/// frame_bytes || nonce || timestamp(BE64). Throws Error(InvalidFrame) if
/// frame_bytes is not a valid encoded frame.
Bytes assemble_capture(ByteView frame_bytes, const Nonce& nonce, Timestamp ts);

/// Same layout without validating `body`; for building malformed inputs.
Bytes append_trailer(ByteView body, const Nonce& nonce, Timestamp ts);

struct CapturePayload {
    Bytes frame_bytes;
    ThermalFrame frame;
    Nonce nonce{};
    Timestamp timestamp{};
};

/// Splits off the 72-byte trailer and validates the embedded frame. Throws
/// Error(TooShort) below the minimum payload size and Error(InvalidFrame)
/// otherwise; timestamp freshness is left to the caller.
CapturePayload parse_capture(ByteView bytes);

/// Anything shorter cannot even hold a frame header and the trailer.
inline constexpr std::size_t kMinCaptureSize = kFrameHeaderSize + kTrailerSize; // 81

} // namespace thermoguard
