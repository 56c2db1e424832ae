#include "thermoguard/presence_detector.hpp"

#include <algorithm>
#include <cmath>

#include "thermoguard/error.hpp"

namespace thermoguard {

void DetectorConfig::validate() const {
    auto band_ok = [](double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; };
    if (!band_ok(core_temp_low_c, core_temp_high_c)) throw Error(Errc::ParameterOutOfRange, "core temperature band");
    if (!band_ok(aspect_low, aspect_high) || aspect_low <= 0.0) throw Error(Errc::ParameterOutOfRange, "aspect band");
    if (!(min_area_frac > 0.0 && min_area_frac < 1.0)) throw Error(Errc::ParameterOutOfRange, "min_area_frac");
    if (!(gradient_min > 0.0) || !std::isfinite(gradient_min)) throw Error(Errc::ParameterOutOfRange, "gradient_min");
}

namespace {

ScoreBreakdown score_blob(const ThermalFrame& frame, const HotBlob& blob, const DetectorConfig& cfg) {
    if (blob.empty()) return {};

    const auto px = frame.pixels();
    const std::size_t w = frame.width();
    const std::size_t h = frame.height();
    const double area = static_cast<double>(blob.pixels.size());

    ScoreBreakdown s;

    const std::uint16_t band_lo = celsius_to_ck(cfg.core_temp_low_c);
    const std::uint16_t band_hi = celsius_to_ck(cfg.core_temp_high_c);
    const auto in_band = std::count_if(blob.pixels.begin(), blob.pixels.end(),
                                       [&](std::uint32_t i) { return px[i] >= band_lo && px[i] <= band_hi; });
    s.temperature = static_cast<double>(in_band) / area;

    const double frac = area / static_cast<double>(px.size());
    s.area = 1.0 / (1.0 + std::exp(-8.0 * (frac / cfg.min_area_frac - 1.0)));

    const double aspect = blob.aspect();
    if (aspect < cfg.aspect_low) {
        s.aspect = aspect / cfg.aspect_low;
    } else if (aspect > cfg.aspect_high) {
        s.aspect = std::max(0.0, 1.0 - (aspect - cfg.aspect_high) / cfg.aspect_high);
    } else {
        s.aspect = 1.0;
    }

    // Boundary steepness: for each blob pixel with an in-frame neighbour
    // outside the blob, the largest drop towards such a neighbour.
    std::vector<std::uint8_t> member(px.size(), 0);
    for (auto i : blob.pixels) member[i] = 1;
    double steep_sum = 0.0;
    std::size_t boundary = 0;
    for (auto i : blob.pixels) {
        const std::size_t x = i % w;
        const std::size_t y = i / w;
        double steepest = -1.0;
        auto consider = [&](std::size_t j) {
            if (!member[j]) steepest = std::max(steepest, (static_cast<double>(px[i]) - static_cast<double>(px[j])) / 100.0);
        };
        if (x > 0) consider(i - 1);
        if (x + 1 < w) consider(i + 1);
        if (y > 0) consider(i - w);
        if (y + 1 < h) consider(i + w);
        if (steepest >= 0.0) {
            steep_sum += steepest;
            ++boundary;
        }
    }
    if (boundary > 0) s.gradient = std::min(1.0, (steep_sum / static_cast<double>(boundary)) / cfg.gradient_min);
    return s;
}

} // namespace

ScoreBreakdown score_components(const ThermalFrame& frame, const DetectorConfig& cfg) {
    return score_blob(frame, find_hottest_blob(frame), cfg);
}

Detection detect(const ThermalFrame& frame, const DetectorConfig& cfg) {
    const HotBlob blob = find_hottest_blob(frame);
    if (blob.empty()) return {};
    const double confidence = std::clamp(score_blob(frame, blob, cfg).product(), 0.0, 1.0);
    Detection d;
    d.confidence = confidence;
    d.human_present = confidence > kHumanThreshold;
    if (confidence > 0.0) d.bbox = blob.bbox;
    return d;
}

HeuristicDetector::HeuristicDetector(DetectorConfig cfg) : cfg_(cfg) {
    cfg_.validate();
}

Detection HeuristicDetector::detect(const ThermalFrame& frame) const {
    return thermoguard::detect(frame, cfg_);
}

} // namespace thermoguard
