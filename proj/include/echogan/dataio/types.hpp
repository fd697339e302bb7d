#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "echogan/error.hpp"

namespace echogan::dataio {

inline constexpr std::uint8_t kMaxLabel = 3;

enum class Label : std::uint8_t { background = 0, ventricle = 1, myocardium = 2, atrium = 3 };

/// Row-major single-channel raster.
template <typename T>
struct Raster {
    int height = 0;
    int width = 0;
    std::vector<T> pixels;

    Raster() = default;
    Raster(int h, int w, T fill = T{})
        : height(h), width(w), pixels(static_cast<std::size_t>(checked(h)) * checked(w), fill) {}

    T& at(int row, int col) noexcept { return pixels[static_cast<std::size_t>(row) * width + col]; }
    const T& at(int row, int col) const noexcept {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    std::size_t size() const noexcept { return pixels.size(); }
    bool empty() const noexcept { return pixels.empty(); }

    bool operator==(const Raster&) const = default;

private:
    static int checked(int v) {
        if (v < 0) throw InvalidDimensions("negative raster extent");
        return v;
    }
};

using GrayImage8 = Raster<std::uint8_t>;

/// Segmentation raster: 0 background, 1 ventricle, 2 myocardium, 3 atrium.
struct LabelMap : Raster<std::uint8_t> {
    using Raster::Raster;

    /// Validates the alphabet; throws CorruptLabel naming the first bad value.
    static LabelMap from_raster(GrayImage8 raster, const std::string& where = {});

    std::set<std::uint8_t> value_set() const;
};

/// Grayscale frame with intensities in [0, 1].
struct EchoFrame : Raster<float> {
    using Raster::Raster;
};

/// Which anatomical labels survive into the generator's condition.
class ConditionSpec {
public:
    /// One of the five experiments: a={1}, b={3}, c={1,2}, d={1,3}, e={1,2,3}.
    static ConditionSpec from_name(char name);
    static ConditionSpec from_name(const std::string& name);
    static const std::array<char, 5>& names();

    char name() const noexcept { return name_; }
    const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
    bool contains(std::uint8_t label) const noexcept {
        return label < mask_.size() && mask_[label];
    }

    bool operator==(const ConditionSpec& other) const noexcept { return name_ == other.name_; }

private:
    ConditionSpec(char name, std::vector<std::uint8_t> labels);

    char name_;
    std::vector<std::uint8_t> labels_;
    std::array<bool, 4> mask_{};
};

enum class FrameTag { ED };

struct StudyRecord {
    std::string patient_id;
    FrameTag frame = FrameTag::ED;
    EchoFrame image;
    LabelMap mask;
};

struct SplitManifest {
    std::uint64_t seed = 0;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;

    bool operator==(const SplitManifest&) const = default;
};

}  // namespace echogan::dataio
