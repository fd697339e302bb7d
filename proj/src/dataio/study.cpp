#include "echogan/dataio/study.hpp"

#include <algorithm>
#include <optional>

#include "echogan/dataio/image_io.hpp"

namespace echogan::dataio {

namespace fs = std::filesystem;

namespace {

struct StudyFiles {
    fs::path image;
    fs::path mask;
};

std::optional<fs::path> first_existing(const fs::path& dir, const std::string& stem,
                                       std::initializer_list<const char*> extensions) {
    for (const char* ext : extensions) {
        fs::path candidate = dir / (stem + ext);
        if (fs::is_regular_file(candidate)) return candidate;
    }
    return std::nullopt;
}

std::optional<StudyFiles> locate(const fs::path& dir, const std::string& id) {
    const auto native_image = first_existing(dir, kImageStem, {".png", ".pgm"});
    const auto native_mask = first_existing(dir, kMaskStem, {".png", ".pgm"});
    if (native_image && native_mask) return StudyFiles{*native_image, *native_mask};

    const auto camus_image = first_existing(dir, id + "_4CH_ED", {".mhd", ".mha"});
    const auto camus_mask = first_existing(dir, id + "_4CH_ED_gt", {".mhd", ".mha"});
    if (camus_image && camus_mask) return StudyFiles{*camus_image, *camus_mask};
    return std::nullopt;
}

}  // namespace

StudyRecord load_study(const fs::path& root, const std::string& patient_id) {
    const fs::path dir = root / patient_id;
    if (!fs::is_directory(dir)) throw NotFound("no study directory " + dir.string());
    const auto files = locate(dir, patient_id);
    if (!files) throw NotFound("no ED image/mask pair in " + dir.string());

    const GrayImage8 image = read_gray_image(files->image);
    StudyRecord record;
    record.patient_id = patient_id;
    record.frame = FrameTag::ED;
    record.mask = LabelMap::from_raster(read_gray_image(files->mask), files->mask.string());
    record.image = to_echo_frame(image);
    if (image.height != record.mask.height || image.width != record.mask.width) {
        throw InvalidDimensions("image and mask of " + patient_id + " differ in size");
    }
    return record;
}

std::vector<std::string> list_studies(const fs::path& root) {
    if (!fs::is_directory(root)) throw NotFound("no data directory " + root.string());
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const std::string id = entry.path().filename().string();
        if (locate(entry.path(), id)) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void write_study(const fs::path& root, const StudyRecord& record) {
    const fs::path dir = root / record.patient_id;
    fs::create_directories(dir);
    write_gray_image(dir / (std::string(kImageStem) + ".png"), quantize(record.image));
    write_gray_image(dir / (std::string(kMaskStem) + ".png"), record.mask);
}

}  // namespace echogan::dataio
