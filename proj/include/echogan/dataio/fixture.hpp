#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "echogan/dataio/types.hpp"

namespace echogan::dataio {

inline constexpr int kMinFixtureSize = 32;

/// Procedurally drawn four-chamber-like studies for self-contained tests.
///
/// Each mask has an elliptical ventricle (1) wrapped by a myocardial ring (2)
/// above an elliptical atrium (3). The matching image is a fan-shaped
/// pseudo-echo: dark blood pools, bright myocardium, mid-gray tissue, with
/// multiplicative speckle. Bit-reproducible from (count, seed, size).
std::vector<StudyRecord> make_synthetic_fixture(int count, std::uint64_t seed, int size);

/// Generates a fixture and writes it in the native on-disk layout. Ids are
/// "synthetic0000", "synthetic0001", ...
std::vector<StudyRecord> write_synthetic_dataset(const std::filesystem::path& root, int count,
                                                 std::uint64_t seed, int size);

}  // namespace echogan::dataio
