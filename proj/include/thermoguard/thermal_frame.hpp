#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "thermoguard/encoding.hpp"

namespace thermoguard {

inline constexpr std::uint16_t kMinFrameDim = 8;
inline constexpr std::uint16_t kMaxFrameDim = 1024;
inline constexpr std::uint16_t kDefaultFrameWidth = 160;
inline constexpr std::uint16_t kDefaultFrameHeight = 120;

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'T', 'H', 'R', 'M'};
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 9;

// Generator output range, -73 C .. +177 C.
inline constexpr std::uint16_t kSceneMinCk = 20000;
inline constexpr std::uint16_t kSceneMaxCk = 45000;

inline std::uint16_t celsius_to_ck(double celsius) {
    return static_cast<std::uint16_t>(std::lround((celsius + 273.15) * 100.0));
}

inline double ck_to_celsius(double centi_kelvin) {
    return centi_kelvin / 100.0 - 273.15;
}

/// Rectangular grid of absolute temperatures in centi-kelvin, row-major.
/// Immutable once constructed; the constructor enforces the dimension
/// bounds and the pixel count.
class ThermalFrame {
public:
    ThermalFrame(std::uint16_t width, std::uint16_t height, std::vector<std::uint16_t> pixels);

    static ThermalFrame uniform(std::uint16_t width, std::uint16_t height, std::uint16_t value_ck);

    std::uint16_t width() const noexcept { return width_; }
    std::uint16_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return pixels_.size(); }
    std::span<const std::uint16_t> pixels() const noexcept { return pixels_; }
    std::uint16_t at(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }

    friend bool operator==(const ThermalFrame&, const ThermalFrame&) = default;

private:
    std::uint16_t width_;
    std::uint16_t height_;
    std::vector<std::uint16_t> pixels_;
};

/// "THRM" | version | width BE16 | height BE16 | pixels BE16 ...
Bytes encode_frame(const ThermalFrame& frame);

/// Strict inverse of encode_frame. Throws Error with BadMagic, BadVersion,
/// LengthMismatch or DimensionOutOfRange; never reads out of bounds.
ThermalFrame decode_frame(ByteView bytes);

enum class SceneType { human, hot_object, cold_object, vacuum_robot, pet, ambient_empty };

inline constexpr std::array<SceneType, 4> kNonHumanScenes{
    SceneType::vacuum_robot, SceneType::hot_object, SceneType::cold_object, SceneType::pet};

struct HumanPose {
    double angle_deg = 90.0;  // horizontal viewing angle, [50, 130]
    double distance_ft = 3.0; // [3, 6]
    double tilt_deg = 90.0;   // camera tilt, [80, 100]
};

struct SceneKind {
    SceneType type = SceneType::ambient_empty;
    HumanPose pose{};

    static SceneKind human(double angle_deg = 90.0, double distance_ft = 3.0, double tilt_deg = 90.0) {
        return {SceneType::human, {angle_deg, distance_ft, tilt_deg}};
    }
    static SceneKind of(SceneType type) { return {type, {}}; }
};

std::string_view scene_type_name(SceneType type) noexcept;
std::optional<SceneType> parse_scene_type(std::string_view name) noexcept;

/// Deterministic synthetic capture for (kind, seed). Throws
/// Error(ParameterOutOfRange) for poses or dimensions outside the tested ranges.
ThermalFrame generate_scene(const SceneKind& kind, std::uint64_t seed,
                            std::uint16_t width = kDefaultFrameWidth,
                            std::uint16_t height = kDefaultFrameHeight);

struct BoundingBox {
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint16_t w = 0;
    std::uint16_t h = 0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Largest 4-connected component of pixels at or above median + 5 C.
struct HotBlob {
    std::vector<std::uint32_t> pixels; // row-major indices, ascending
    BoundingBox bbox{};
    std::uint16_t threshold_ck = 0;
    std::uint16_t max_ck = 0;

    bool empty() const noexcept { return pixels.empty(); }
    double aspect() const noexcept {
        return bbox.w == 0 ? 0.0 : static_cast<double>(bbox.h) / static_cast<double>(bbox.w);
    }
};

inline constexpr std::uint16_t kBlobThresholdAboveMedianCk = 500;

/// Upper median (element n/2 of the sorted samples).
std::uint16_t median_ck(const ThermalFrame& frame);

/// Ties between equally large components go to the one whose first pixel
/// comes first in row-major order.
HotBlob find_hottest_blob(const ThermalFrame& frame);

struct FrameStats {
    std::uint16_t min_ck = 0;
    std::uint16_t max_ck = 0;
    double mean_ck = 0.0;
    std::size_t hottest_blob_area = 0;
    double hottest_blob_aspect = 0.0; // height / width, 0 without a blob
    std::uint16_t hottest_blob_max_ck = 0;
};

FrameStats frame_stats(const ThermalFrame& frame);

} // namespace thermoguard
