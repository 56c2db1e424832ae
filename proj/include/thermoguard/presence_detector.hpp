#pragma once

#include <memory>
#include <optional>

#include "thermoguard/thermal_frame.hpp"

namespace thermoguard {

inline constexpr double kHumanThreshold = 0.50;

struct DetectorConfig {
    double core_temp_low_c = 34.0;
    double core_temp_high_c = 39.0;
    double min_area_frac = 0.01;
    double aspect_low = 1.1;
    double aspect_high = 3.5;
    double gradient_min = 0.5; // C per pixel

    /// Throws Error(ParameterOutOfRange) on inverted bands or bad fractions.
    void validate() const;
};

struct Detection {
    bool human_present = false;
    double confidence = 0.0;
    std::optional<BoundingBox> bbox; // present iff confidence > 0

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// The four factors whose product is the confidence.
struct ScoreBreakdown {
    double temperature = 0.0;
    double area = 0.0;
    double aspect = 0.0;
    double gradient = 0.0;

    double product() const noexcept { return temperature * area * aspect * gradient; }
};

/// Scores computed on the frame's hottest blob; all zero when there is none.
ScoreBreakdown score_components(const ThermalFrame& frame, const DetectorConfig& cfg);

Detection detect(const ThermalFrame& frame, const DetectorConfig& cfg);

/// Strictly greater than 0.50.
inline bool decide(const Detection& d) noexcept {
    return d.confidence > kHumanThreshold;
}

/// Seam for swapping the heuristic out for a learned model.
class PresenceDetector {
public:
    virtual ~PresenceDetector() = default;
    virtual Detection detect(const ThermalFrame& frame) const = 0;
};

class HeuristicDetector final : public PresenceDetector {
public:
    explicit HeuristicDetector(DetectorConfig cfg = {});
    Detection detect(const ThermalFrame& frame) const override;
    const DetectorConfig& config() const noexcept { return cfg_; }

private:
    DetectorConfig cfg_;
};

} // namespace thermoguard
