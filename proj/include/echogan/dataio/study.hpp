#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "echogan/dataio/types.hpp"

namespace echogan::dataio {

/// File names of the native per-patient layout: <root>/<id>/ED_image.png, ED_mask.png.
inline constexpr const char* kImageStem = "ED_image";
inline constexpr const char* kMaskStem = "ED_mask";

/// Loads the end-diastolic frame and mask of one study.
///
/// Accepts the native layout (PNG or PGM) and the CAMUS release layout
/// <root>/<id>/<id>_4CH_ED.mhd with <id>_4CH_ED_gt.mhd. The returned record
/// is unresized; intensities are mapped to [0, 1] by v / 255.
StudyRecord load_study(const std::filesystem::path& root, const std::string& patient_id);

/// Patient directories under `root` that contain a loadable study, sorted.
std::vector<std::string> list_studies(const std::filesystem::path& root);

/// Writes a record in the native layout (8-bit PNGs).
void write_study(const std::filesystem::path& root, const StudyRecord& record);

}  // namespace echogan::dataio
