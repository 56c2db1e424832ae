#include "thermoguard/thermal_frame.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "thermoguard/error.hpp"

namespace thermoguard {

namespace {

bool dimension_ok(std::uint32_t d) noexcept {
    return d >= kMinFrameDim && d <= kMaxFrameDim;
}

} // namespace

ThermalFrame::ThermalFrame(std::uint16_t width, std::uint16_t height, std::vector<std::uint16_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (!dimension_ok(width) || !dimension_ok(height)) throw Error(Errc::DimensionOutOfRange);
    if (pixels_.size() != std::size_t{width} * height) throw Error(Errc::LengthMismatch);
}

ThermalFrame ThermalFrame::uniform(std::uint16_t width, std::uint16_t height, std::uint16_t value_ck) {
    return ThermalFrame(width, height, std::vector<std::uint16_t>(std::size_t{width} * height, value_ck));
}

Bytes encode_frame(const ThermalFrame& frame) {
    Bytes out;
    out.reserve(kFrameHeaderSize + 2 * frame.pixel_count());
    for (auto b : kFrameMagic) out.push_back(b);
    out.push_back(kFrameVersion);
    put_u16_be(out, frame.width());
    put_u16_be(out, frame.height());
    for (auto px : frame.pixels()) put_u16_be(out, px);
    return out;
}

ThermalFrame decode_frame(ByteView bytes) {
    if (bytes.size() < kFrameMagic.size() || !std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin()))
        throw Error(Errc::BadMagic);
    if (bytes.size() < 5 || bytes[4] != kFrameVersion) throw Error(Errc::BadVersion);
    if (bytes.size() < kFrameHeaderSize) throw Error(Errc::LengthMismatch, "truncated header");

    const std::uint16_t width = get_u16_be(bytes.data() + 5);
    const std::uint16_t height = get_u16_be(bytes.data() + 7);
    if (!dimension_ok(width) || !dimension_ok(height)) throw Error(Errc::DimensionOutOfRange);

    const std::size_t count = std::size_t{width} * height;
    if (bytes.size() != kFrameHeaderSize + 2 * count) throw Error(Errc::LengthMismatch);

    std::vector<std::uint16_t> pixels(count);
    const std::uint8_t* p = bytes.data() + kFrameHeaderSize;
    for (std::size_t i = 0; i < count; ++i, p += 2) pixels[i] = get_u16_be(p);
    return ThermalFrame(width, height, std::move(pixels));
}

std::string_view scene_type_name(SceneType type) noexcept {
    switch (type) {
    case SceneType::human: return "human";
    case SceneType::hot_object: return "hot_object";
    case SceneType::cold_object: return "cold_object";
    case SceneType::vacuum_robot: return "vacuum_robot";
    case SceneType::pet: return "pet";
    case SceneType::ambient_empty: return "ambient_empty";
    }
    return "unknown";
}

std::optional<SceneType> parse_scene_type(std::string_view name) noexcept {
    for (auto t : {SceneType::human, SceneType::hot_object, SceneType::cold_object, SceneType::vacuum_robot,
                   SceneType::pet, SceneType::ambient_empty}) {
        if (scene_type_name(t) == name) return t;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scene synthesis
//
// Only IEEE-exact operations (+ - * / sqrt) and the raw mt19937_64 stream are
// used below, so frames are bit-identical across platforms and libms.

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEdgePx = 2.5;

// Taylor series; arguments here never exceed 40 degrees.
double portable_cos(double x) {
    const double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -x2 / static_cast<double>((2 * k - 1) * (2 * k));
        sum += term;
    }
    return sum;
}

class SceneRng {
public:
    explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 engine_;
};

double smoothstep(double edge0, double edge1, double x) {
    double t = (x - edge0) / (edge1 - edge0);
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// A warm or cold body composited over the background.
struct Contribution {
    double temp_c = 0.0;
    double weight = 0.0; // 1 inside, smooth falloff to 0 over kEdgePx outside
};

struct Ellipse {
    double cx, cy, ax, ay;
    double peak_c;
    double radial_drop_c; // temperature lost between centre and rim

    Contribution at(double px, double py) const {
        const double dx = (px - cx) / ax;
        const double dy = (py - cy) / ay;
        const double r2 = dx * dx + dy * dy;
        if (r2 <= 1.0) return {peak_c - radial_drop_c * r2, 1.0};
        const double r = std::sqrt(r2);
        const double ex = px - cx;
        const double ey = py - cy;
        const double dist = std::sqrt(ex * ex + ey * ey);
        const double outside_px = dist * (1.0 - 1.0 / r);
        return {peak_c - radial_drop_c, 1.0 - smoothstep(0.0, kEdgePx, outside_px)};
    }
};

struct Rect {
    double cx, cy, hw, hh;
    double temp_c;

    Contribution at(double px, double py) const {
        const double dx = std::max(std::abs(px - cx) - hw, 0.0);
        const double dy = std::max(std::abs(py - cy) - hh, 0.0);
        const double d = std::sqrt(dx * dx + dy * dy);
        return {temp_c, 1.0 - smoothstep(0.0, kEdgePx, d)};
    }
};

class Canvas {
public:
    Canvas(std::uint16_t w, std::uint16_t h, SceneRng& rng) : w_(w), h_(h), rng_(rng) {
        base_c_ = rng_.uniform(20.8, 23.2);
        gradient_c_ = rng_.uniform(-0.15, 0.15);
    }

    template <typename Shape>
    void add(const Shape& s) {
        shapes_.push_back([s](double x, double y) { return s.at(x, y); });
    }

    ThermalFrame render() {
        std::vector<std::uint16_t> px(std::size_t{w_} * h_);
        for (std::uint16_t y = 0; y < h_; ++y) {
            const double bg = base_c_ + gradient_c_ * (2.0 * (y + 0.5) / h_ - 1.0);
            for (std::uint16_t x = 0; x < w_; ++x) {
                double value = bg;
                double weight = 0.0;
                for (const auto& shape : shapes_) {
                    const Contribution c = shape(x + 0.5, y + 0.5);
                    if (c.weight <= 0.0) continue;
                    const double blended = bg + (c.temp_c - bg) * c.weight;
                    // warm bodies composite by max, cold bodies by min
                    value = c.temp_c >= bg ? std::max(value, blended) : std::min(value, blended);
                    weight = std::max(weight, c.weight);
                }
                const double amp = 0.45 * (1.0 - weight) + 0.1 * weight;
                value += amp * (2.0 * rng_.unit() - 1.0);
                const double ck = (value + 273.15) * 100.0;
                const double clamped = std::clamp(ck, double{kSceneMinCk}, double{kSceneMaxCk});
                px[std::size_t{y} * w_ + x] = static_cast<std::uint16_t>(std::floor(clamped + 0.5));
            }
        }
        return ThermalFrame(w_, h_, std::move(px));
    }

private:
    std::uint16_t w_, h_;
    SceneRng& rng_;
    double base_c_ = 22.0;
    double gradient_c_ = 0.0;
    std::vector<std::function<Contribution(double, double)>> shapes_;
};

bool in_range(double v, double lo, double hi) {
    return v >= lo && v <= hi; // false for NaN
}

void add_human(Canvas& canvas, const HumanPose& pose, SceneRng& rng, double w, double h) {
    const double unit = h / 120.0;
    const double scale = 3.0 / pose.distance_ft;
    const double width_factor = portable_cos(std::abs(pose.angle_deg - 90.0) * kPi / 180.0);
    const double height_factor = portable_cos(std::abs(pose.tilt_deg - 90.0) * kPi / 180.0);

    const double head_ax = 9.0 * scale * width_factor * unit;
    const double head_ay = 11.0 * scale * height_factor * unit;
    const double torso_ax = 20.0 * scale * width_factor * unit;
    const double torso_ay = 30.0 * scale * height_factor * unit;
    const double neck_overlap = 0.3 * head_ay;

    const double cx = w / 2.0 + rng.uniform(-6.0, 6.0) * unit;
    const double figure_h = 2.0 * head_ay + 2.0 * torso_ay - neck_overlap;
    const double shift = (pose.tilt_deg - 90.0) * 0.4 * unit + rng.uniform(-3.0, 3.0) * unit;
    const double top = h / 2.0 - figure_h / 2.0 + shift;

    const double head_peak = 37.0 + rng.uniform(-0.2, 0.2);
    const double torso_peak = 35.2 + rng.uniform(-0.3, 0.3);

    canvas.add(Ellipse{cx, top + head_ay, head_ax, head_ay, head_peak, 0.6});
    canvas.add(Ellipse{cx, top + 2.0 * head_ay - neck_overlap + torso_ay, torso_ax, torso_ay, torso_peak, 0.6});
}

} // namespace

ThermalFrame generate_scene(const SceneKind& kind, std::uint64_t seed, std::uint16_t width, std::uint16_t height) {
    if (!dimension_ok(width) || !dimension_ok(height)) throw Error(Errc::ParameterOutOfRange, "frame dimensions");
    if (kind.type == SceneType::human) {
        const auto& p = kind.pose;
        if (!in_range(p.angle_deg, 50.0, 130.0) || !in_range(p.tilt_deg, 80.0, 100.0) ||
            !in_range(p.distance_ft, 3.0, 6.0))
            throw Error(Errc::ParameterOutOfRange, "human pose");
    }

    SceneRng rng(seed);
    Canvas canvas(width, height, rng);
    const double w = width;
    const double h = height;
    const double unit = h / 120.0;

    switch (kind.type) {
    case SceneType::human:
        add_human(canvas, kind.pose, rng, w, h);
        break;
    case SceneType::hot_object: {
        const double r = rng.uniform(4.5, 6.5) * unit;
        const double cx = rng.uniform(0.2, 0.8) * w;
        const double cy = rng.uniform(0.3, 0.8) * h;
        canvas.add(Ellipse{cx, cy, r, r, rng.uniform(62.0, 85.0), 2.0});
        break;
    }
    case SceneType::cold_object: {
        const double r = rng.uniform(6.0, 10.0) * unit;
        const double cx = rng.uniform(0.2, 0.8) * w;
        const double cy = rng.uniform(0.3, 0.8) * h;
        // rim warmer than the core
        canvas.add(Ellipse{cx, cy, r, r * 1.2, rng.uniform(4.0, 8.0), -1.5});
        break;
    }
    case SceneType::vacuum_robot: {
        const double hw = rng.uniform(20.0, 28.0) * unit;
        const double hh = rng.uniform(5.0, 7.0) * unit;
        const double cx = rng.uniform(0.3, 0.7) * w;
        const double cy = h - rng.uniform(2.0, 6.0) * unit - hh;
        canvas.add(Rect{cx, cy, hw, hh, rng.uniform(29.5, 31.0)});
        break;
    }
    case SceneType::pet: {
        const double ax = rng.uniform(9.0, 12.0) * unit;
        const double ay = rng.uniform(5.0, 7.0) * unit;
        const double cx = rng.uniform(0.3, 0.7) * w;
        const double cy = rng.uniform(0.55, 0.8) * h;
        const double temp = rng.uniform(31.5, 33.0);
        const double side = rng.unit() < 0.5 ? -1.0 : 1.0;
        canvas.add(Ellipse{cx, cy, ax, ay, temp, 0.5});
        // head sits beside the body, level with it
        canvas.add(Ellipse{cx + side * (ax + 2.5 * unit), cy - 0.5 * ay, 4.0 * unit, 3.5 * unit, temp + 0.3, 0.5});
        break;
    }
    case SceneType::ambient_empty:
        break;
    }
    return canvas.render();
}

// ---------------------------------------------------------------------------
// Statistics

std::uint16_t median_ck(const ThermalFrame& frame) {
    std::vector<std::uint16_t> samples(frame.pixels().begin(), frame.pixels().end());
    auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    return *mid;
}

HotBlob find_hottest_blob(const ThermalFrame& frame) {
    const std::size_t w = frame.width();
    const std::size_t h = frame.height();
    const auto px = frame.pixels();

    HotBlob best;
    best.threshold_ck = static_cast<std::uint16_t>(
        std::min<std::uint32_t>(std::uint32_t{median_ck(frame)} + kBlobThresholdAboveMedianCk, 65535));

    std::vector<std::uint8_t> visited(px.size(), 0);
    std::vector<std::uint32_t> component;
    std::vector<std::uint32_t> stack;

    for (std::size_t start = 0; start < px.size(); ++start) {
        if (visited[start] || px[start] < best.threshold_ck) continue;
        component.clear();
        stack.assign(1, static_cast<std::uint32_t>(start));
        visited[start] = 1;
        while (!stack.empty()) {
            const std::uint32_t i = stack.back();
            stack.pop_back();
            component.push_back(i);
            const std::size_t x = i % w;
            const std::size_t y = i / w;
            auto visit = [&](std::size_t j) {
                if (!visited[j] && px[j] >= best.threshold_ck) {
                    visited[j] = 1;
                    stack.push_back(static_cast<std::uint32_t>(j));
                }
            };
            if (x > 0) visit(i - 1);
            if (x + 1 < w) visit(i + 1);
            if (y > 0) visit(i - w);
            if (y + 1 < h) visit(i + w);
        }
        if (component.size() > best.pixels.size()) best.pixels = component;
    }

    if (best.pixels.empty()) return best;

    std::sort(best.pixels.begin(), best.pixels.end());
    std::size_t x0 = w, x1 = 0, y0 = h, y1 = 0;
    for (auto i : best.pixels) {
        const std::size_t x = i % w;
        const std::size_t y = i / w;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        best.max_ck = std::max(best.max_ck, px[i]);
    }
    best.bbox = {static_cast<std::uint16_t>(x0), static_cast<std::uint16_t>(y0),
                 static_cast<std::uint16_t>(x1 - x0 + 1), static_cast<std::uint16_t>(y1 - y0 + 1)};
    return best;
}

FrameStats frame_stats(const ThermalFrame& frame) {
    const auto px = frame.pixels();
    FrameStats s;
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    s.min_ck = *lo;
    s.max_ck = *hi;
    const std::uint64_t sum = std::accumulate(px.begin(), px.end(), std::uint64_t{0});
    s.mean_ck = static_cast<double>(sum) / static_cast<double>(px.size());

    const HotBlob blob = find_hottest_blob(frame);
    s.hottest_blob_area = blob.pixels.size();
    s.hottest_blob_aspect = blob.aspect();
    s.hottest_blob_max_ck = blob.max_ck;
    return s;
}

} // namespace thermoguard
