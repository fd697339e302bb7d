#include "echogan/dataio/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "echogan/dataio/study.hpp"

namespace echogan::dataio {

namespace {

struct Ellipse {
    double cy;
    double cx;
    double ry;
    double rx;

    bool contains(double y, double x) const {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        return dy * dy + dx * dx <= 1.0;
    }
};

constexpr float kOutsideFan = 0.10f;
constexpr float kTissue = 0.50f;
constexpr float kVentricle = 0.06f;
constexpr float kMyocardium = 0.80f;
constexpr float kAtrium = 0.10f;
constexpr double kSpeckle = 0.15;
constexpr double kFanHalfAngle = 42.0 * std::numbers::pi / 180.0;

StudyRecord draw_record(int index, std::uint64_t seed, int size) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    auto uniform = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    const double s = size;
    const Ellipse ventricle{s * uniform(0.38, 0.46), s * uniform(0.46, 0.54), s * uniform(0.17, 0.23),
                            s * uniform(0.09, 0.13)};
    const double wall = s * uniform(0.035, 0.055);
    const Ellipse ring{ventricle.cy, ventricle.cx, ventricle.ry + wall, ventricle.rx + wall};
    const Ellipse atrium{ventricle.cy + ventricle.ry + wall + s * uniform(0.08, 0.11),
                         ventricle.cx + s * uniform(-0.03, 0.03), s * uniform(0.08, 0.11),
                         s * uniform(0.09, 0.12)};
    const double apex_y = s * 0.02;
    const double apex_x = s * 0.5;
    const double fan_radius = s * 0.98;

    StudyRecord record;
    char id[32];
    std::snprintf(id, sizeof id, "synthetic%04d", index);
    record.patient_id = id;
    record.frame = FrameTag::ED;
    record.mask = LabelMap(size, size);
    record.image = EchoFrame(size, size);

    std::uniform_real_distribution<float> speckle(static_cast<float>(-kSpeckle),
                                                  static_cast<float>(kSpeckle));
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double py = y + 0.5;
            const double px = x + 0.5;
            std::uint8_t label = 0;
            if (ventricle.contains(py, px)) {
                label = 1;
            } else if (ring.contains(py, px)) {
                label = 2;
            } else if (atrium.contains(py, px)) {
                label = 3;
            }
            record.mask.at(y, x) = label;

            float base = kTissue;
            switch (label) {
                case 1: base = kVentricle; break;
                case 2: base = kMyocardium; break;
                case 3: base = kAtrium; break;
                default: {
                    const double dy = py - apex_y;
                    const double dx = px - apex_x;
                    const bool in_fan = dy > 0.0 && std::hypot(dy, dx) <= fan_radius &&
                                        std::abs(std::atan2(dx, dy)) <= kFanHalfAngle;
                    base = in_fan ? kTissue : kOutsideFan;
                }
            }
            record.image.at(y, x) = std::clamp(base * (1.0f + speckle(rng)), 0.0f, 1.0f);
        }
    }
    return record;
}

}  // namespace

std::vector<StudyRecord> make_synthetic_fixture(int count, std::uint64_t seed, int size) {
    if (size < kMinFixtureSize) {
        throw InvalidDimensions("fixture size " + std::to_string(size) + " is below " +
                                std::to_string(kMinFixtureSize));
    }
    if (count < 1) throw InvalidConfig("fixture count must be at least 1");
    std::vector<StudyRecord> records;
    records.reserve(count);
    for (int i = 0; i < count; ++i) records.push_back(draw_record(i, seed, size));
    return records;
}

std::vector<StudyRecord> write_synthetic_dataset(const std::filesystem::path& root, int count,
                                                 std::uint64_t seed, int size) {
    auto records = make_synthetic_fixture(count, seed, size);
    for (const auto& r : records) write_study(root, r);
    return records;
}

}  // namespace echogan::dataio
