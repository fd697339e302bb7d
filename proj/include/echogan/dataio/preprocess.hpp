#pragma once

#include "echogan/dataio/types.hpp"
#include "echogan/nn/tensor.hpp"

namespace echogan::dataio {

inline constexpr int kWorkingResolution = 256;

/// Half-pixel-centered bilinear resampling.
EchoFrame resize_bilinear(const EchoFrame& frame, int height, int width);
/// Nearest-neighbor resampling; never introduces a label absent from the input.
LabelMap resize_nearest(const LabelMap& mask, int height, int width);

/// Resizes image (bilinear) and mask (nearest) to `size` x `size`. Intensities
/// stay in [0, 1]. No other transformation is applied.
StudyRecord preprocess(const StudyRecord& record, int size = kWorkingResolution);

/// Zeroes every pixel whose label is not in the spec; kept labels keep their raw value.
LabelMap filter_condition(const LabelMap& mask, const ConditionSpec& spec);

/// Single-channel condition tensor holding the raw label values 0..3 as reals.
nn::Tensor condition_tensor(const LabelMap& mask);
nn::Tensor image_tensor(const EchoFrame& frame);
EchoFrame frame_from_tensor(const nn::Tensor& t, int sample = 0);

}  // namespace echogan::dataio
