#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "echogan/dataio/types.hpp"

namespace echogan::dataio {

inline constexpr int kDefaultTestCount = 22;

/// Seeded shuffle of `ids`; the first `test_count` become the held-out set.
/// Both lists are stored sorted. Throws InvalidSplit when test_count >= ids.size().
SplitManifest make_split(const std::vector<std::string>& ids, std::uint64_t seed,
                         int test_count = kDefaultTestCount);

/// JSON text; identical manifests serialize to identical bytes.
std::string serialize_manifest(const SplitManifest& manifest);
SplitManifest parse_manifest(const std::string& text);

void save_manifest(const std::filesystem::path& path, const SplitManifest& manifest);
SplitManifest load_manifest(const std::filesystem::path& path);

/// Reads the manifest at `path` if present, otherwise creates it from `ids`.
/// Every experiment pointed at the same file therefore shares one split.
SplitManifest load_or_create_manifest(const std::filesystem::path& path,
                                      const std::vector<std::string>& ids, std::uint64_t seed,
                                      int test_count = kDefaultTestCount);

}  // namespace echogan::dataio
