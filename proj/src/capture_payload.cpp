#include "thermoguard/capture_payload.hpp"

#include <algorithm>
#include <chrono>

#include <openssl/rand.h>

#include "thermoguard/error.hpp"

namespace thermoguard {

Nonce random_nonce() {
    Nonce n;
    if (RAND_bytes(n.data(), static_cast<int>(n.size())) != 1) throw std::runtime_error("RAND_bytes failed");
    return n;
}

Timestamp now_utc() {
    using namespace std::chrono;
    return Timestamp{static_cast<std::uint64_t>(
        duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count())};
}

Bytes assemble_capture(ByteView frame_bytes, const Nonce& nonce, Timestamp ts) {
    try {
        (void)decode_frame(frame_bytes);
    } catch (const Error& e) {
        throw Error(Errc::InvalidFrame, e.what());
    }
    return append_trailer(frame_bytes, nonce, ts);
}

Bytes append_trailer(ByteView body, const Nonce& nonce, Timestamp ts) {
    Bytes out;
    out.reserve(body.size() + kTrailerSize);
    out.insert(out.end(), body.begin(), body.end());
    out.insert(out.end(), nonce.begin(), nonce.end());
    put_u64_be(out, ts.ms);
    return out;
}

CapturePayload parse_capture(ByteView bytes) {
    if (bytes.size() < kMinCaptureSize) throw Error(Errc::TooShort);
    const std::size_t frame_len = bytes.size() - kTrailerSize;
    const ByteView frame_part = bytes.first(frame_len);

    auto frame = [&] {
        try {
            return decode_frame(frame_part);
        } catch (const Error& e) {
            throw Error(Errc::InvalidFrame, e.what());
        }
    }();

    CapturePayload out{Bytes(frame_part.begin(), frame_part.end()), std::move(frame), {}, {}};
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(frame_len), kNonceSize, out.nonce.begin());
    out.timestamp.ms = get_u64_be(bytes.data() + frame_len + kNonceSize);
    return out;
}

} // namespace thermoguard
