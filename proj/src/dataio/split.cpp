#include "echogan/dataio/split.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "echogan/dataio/image_io.hpp"

namespace echogan::dataio {

namespace fs = std::filesystem;

SplitManifest make_split(const std::vector<std::string>& ids, std::uint64_t seed, int test_count) {
    if (test_count < 0 || static_cast<std::size_t>(test_count) >= ids.size()) {
        throw InvalidSplit("cannot hold out " + std::to_string(test_count) + " of " +
                           std::to_string(ids.size()) + " studies");
    }
    if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
        throw InvalidSplit("duplicate study ids");
    }
    std::vector<std::string> order = ids;
    std::sort(order.begin(), order.end());
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    SplitManifest manifest;
    manifest.seed = seed;
    manifest.test_ids.assign(order.begin(), order.begin() + test_count);
    manifest.train_ids.assign(order.begin() + test_count, order.end());
    std::sort(manifest.test_ids.begin(), manifest.test_ids.end());
    std::sort(manifest.train_ids.begin(), manifest.train_ids.end());
    return manifest;
}

std::string serialize_manifest(const SplitManifest& manifest) {
    const nlohmann::ordered_json j{{"seed", manifest.seed},
                                   {"test_ids", manifest.test_ids},
                                   {"train_ids", manifest.train_ids}};
    return j.dump(2) + "\n";
}

SplitManifest parse_manifest(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SplitManifest manifest;
        manifest.seed = j.at("seed").get<std::uint64_t>();
        manifest.test_ids = j.at("test_ids").get<std::vector<std::string>>();
        manifest.train_ids = j.at("train_ids").get<std::vector<std::string>>();
        return manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed split manifest: ") + e.what());
    }
}

void save_manifest(const fs::path& path, const SplitManifest& manifest) {
    write_file(path, serialize_manifest(manifest));
}

SplitManifest load_manifest(const fs::path& path) { return parse_manifest(read_file(path)); }

SplitManifest load_or_create_manifest(const fs::path& path, const std::vector<std::string>& ids,
                                      std::uint64_t seed, int test_count) {
    if (fs::exists(path)) return load_manifest(path);
    SplitManifest manifest = make_split(ids, seed, test_count);
    save_manifest(path, manifest);
    return manifest;
}

}  // namespace echogan::dataio
