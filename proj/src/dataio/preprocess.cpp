#include "echogan/dataio/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace echogan::dataio {

namespace {

void require_positive(int height, int width, const char* what) {
    if (height <= 0 || width <= 0) {
        throw InvalidDimensions(std::string(what) + " has zero extent (" + std::to_string(height) +
                                "x" + std::to_string(width) + ")");
    }
}

struct Tap {
    int lo;
    int hi;
    float frac;
};

std::vector<Tap> bilinear_taps(int in, int out) {
    std::vector<Tap> taps(out);
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
        const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
        const int lo = static_cast<int>(std::floor(src));
        taps[i] = Tap{lo, std::min(lo + 1, in - 1), static_cast<float>(src - lo)};
    }
    return taps;
}

std::vector<int> nearest_taps(int in, int out) {
    std::vector<int> taps(out);
    for (int i = 0; i < out; ++i) {
        const auto src = static_cast<long long>(i) * 2 * in + in;  // (i + 0.5) * in / out, scaled by 2*out
        taps[i] = std::min(static_cast<int>(src / (2LL * out)), in - 1);
    }
    return taps;
}

}  // namespace

EchoFrame resize_bilinear(const EchoFrame& frame, int height, int width) {
    require_positive(frame.height, frame.width, "image");
    require_positive(height, width, "target");
    if (frame.height == height && frame.width == width) return frame;

    const auto rows = bilinear_taps(frame.height, height);
    const auto cols = bilinear_taps(frame.width, width);
    EchoFrame out(height, width);
    for (int y = 0; y < height; ++y) {
        const Tap& r = rows[y];
        for (int x = 0; x < width; ++x) {
            const Tap& c = cols[x];
            const float top = frame.at(r.lo, c.lo) * (1.0f - c.frac) + frame.at(r.lo, c.hi) * c.frac;
            const float bottom = frame.at(r.hi, c.lo) * (1.0f - c.frac) + frame.at(r.hi, c.hi) * c.frac;
            out.at(y, x) = std::clamp(top * (1.0f - r.frac) + bottom * r.frac, 0.0f, 1.0f);
        }
    }
    return out;
}

LabelMap resize_nearest(const LabelMap& mask, int height, int width) {
    require_positive(mask.height, mask.width, "mask");
    require_positive(height, width, "target");
    if (mask.height == height && mask.width == width) return mask;

    const auto rows = nearest_taps(mask.height, height);
    const auto cols = nearest_taps(mask.width, width);
    LabelMap out(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) out.at(y, x) = mask.at(rows[y], cols[x]);
    }
    return out;
}

StudyRecord preprocess(const StudyRecord& record, int size) {
    require_positive(record.image.height, record.image.width, "image");
    require_positive(record.mask.height, record.mask.width, "mask");
    if (record.image.height != record.mask.height || record.image.width != record.mask.width) {
        throw InvalidDimensions("image and mask of " + record.patient_id + " differ in size");
    }
    StudyRecord out;
    out.patient_id = record.patient_id;
    out.frame = record.frame;
    out.image = resize_bilinear(record.image, size, size);
    out.mask = resize_nearest(record.mask, size, size);
    return out;
}

LabelMap filter_condition(const LabelMap& mask, const ConditionSpec& spec) {
    LabelMap out = mask;
    for (std::uint8_t& v : out.pixels) {
        if (!spec.contains(v)) v = 0;
    }
    return out;
}

nn::Tensor condition_tensor(const LabelMap& mask) {
    nn::Tensor t(nn::Shape{1, 1, mask.height, mask.width});
    std::transform(mask.pixels.begin(), mask.pixels.end(), t.data(),
                   [](std::uint8_t v) { return static_cast<float>(v); });
    return t;
}

nn::Tensor image_tensor(const EchoFrame& frame) {
    return nn::Tensor(nn::Shape{1, 1, frame.height, frame.width}, frame.pixels);
}

EchoFrame frame_from_tensor(const nn::Tensor& t, int sample) {
    const nn::Shape& s = t.shape();
    if (s.c != 1 || sample < 0 || sample >= s.n) {
        throw ShapeError("expected a single-channel image batch, got " + s.to_string());
    }
    EchoFrame frame(s.h, s.w);
    std::copy_n(t.sample(sample), s.plane_size(), frame.pixels.data());
    return frame;
}

}  // namespace echogan::dataio
