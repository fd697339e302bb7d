#include "echogan/dataio/types.hpp"

namespace echogan::dataio {

LabelMap LabelMap::from_raster(GrayImage8 raster, const std::string& where) {
    for (const std::uint8_t v : raster.pixels) {
        if (v > kMaxLabel) throw CorruptLabel(v, where);
    }
    LabelMap out;
    out.height = raster.height;
    out.width = raster.width;
    out.pixels = std::move(raster.pixels);
    return out;
}

std::set<std::uint8_t> LabelMap::value_set() const {
    std::array<bool, 256> seen{};
    for (const std::uint8_t v : pixels) seen[v] = true;
    std::set<std::uint8_t> out;
    for (int v = 0; v < 256; ++v) {
        if (seen[v]) out.insert(static_cast<std::uint8_t>(v));
    }
    return out;
}

ConditionSpec::ConditionSpec(char name, std::vector<std::uint8_t> labels)
    : name_(name), labels_(std::move(labels)) {
    for (const std::uint8_t l : labels_) mask_[l] = true;
}

const std::array<char, 5>& ConditionSpec::names() {
    static constexpr std::array<char, 5> kNames{'a', 'b', 'c', 'd', 'e'};
    return kNames;
}

ConditionSpec ConditionSpec::from_name(char name) {
    switch (name) {
        case 'a': return ConditionSpec('a', {1});
        case 'b': return ConditionSpec('b', {3});
        case 'c': return ConditionSpec('c', {1, 2});
        case 'd': return ConditionSpec('d', {1, 3});
        case 'e': return ConditionSpec('e', {1, 2, 3});
        default: break;
    }
    throw InvalidConfig(std::string("unknown condition spec '") + name + "' (expected a-e)");
}

ConditionSpec ConditionSpec::from_name(const std::string& name) {
    if (name.size() != 1) throw InvalidConfig("unknown condition spec '" + name + "' (expected a-e)");
    return from_name(name.front());
}

}  // namespace echogan::dataio
