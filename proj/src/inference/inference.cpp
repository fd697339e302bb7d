#include "echogan/inference.hpp"

#include <algorithm>
#include <chrono>

#include "echogan/dataio/image_io.hpp"
#include "echogan/dataio/preprocess.hpp"
#include "echogan/trainer.hpp"

namespace echogan::inference {

namespace fs = std::filesystem;

LoadedModel::LoadedModel(std::string id, networks::Generator generator, dataio::ConditionSpec spec)
    : id_(std::move(id)), generator_(std::move(generator)), spec_(std::move(spec)) {}

LoadedModel load_model(const fs::path& checkpoint, std::string id) {
    trainer::TrainingState state = trainer::load_checkpoint(checkpoint);
    if (id.empty()) id = checkpoint.stem().string();
    return LoadedModel(std::move(id), std::move(state.generator), state.spec);
}

GenerationResponse generate_from_mask(const GenerationRequest& request, const LoadedModel* model) {
    const auto start = std::chrono::steady_clock::now();
    if (model == nullptr) throw ModelNotLoaded("no model loaded for '" + request.checkpoint_id + "'");
    if (request.mask.empty()) throw InvalidDimensions("empty mask");
    if (request.output_size < 1) throw InvalidDimensions("output size must be positive");
    for (const std::uint8_t v : request.mask.pixels) {
        if (v > dataio::kMaxLabel) throw CorruptLabel(v, "request mask");
    }

    const int size = model->input_size();
    const dataio::LabelMap resized = dataio::resize_nearest(request.mask, size, size);
    const dataio::LabelMap condition = dataio::filter_condition(resized, model->spec());
    const nn::Tensor output = networks::generate(model->generator(), dataio::condition_tensor(condition));
    dataio::EchoFrame frame = dataio::frame_from_tensor(output);
    if (request.output_size != size) {
        frame = dataio::resize_bilinear(frame, request.output_size, request.output_size);
    }

    GenerationResponse response;
    response.image = std::move(frame);
    response.checkpoint_id = model->id();
    response.condition_spec = model->spec().name();
    response.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return response;
}

void ModelRegistry::add(std::shared_ptr<const LoadedModel> model) {
    const std::string id = model->id();
    if (!models_.emplace(id, std::move(model)).second) {
        throw InvalidConfig("duplicate checkpoint id '" + id + "'");
    }
}

std::size_t ModelRegistry::load_all(const std::vector<fs::path>& checkpoints,
                                    std::vector<std::string>* errors) {
    std::size_t loaded = 0;
    for (const auto& path : checkpoints) {
        try {
            add(std::make_shared<const LoadedModel>(load_model(path)));
            ++loaded;
        } catch (const Error& e) {
            if (errors) errors->push_back(path.string() + ": " + e.what());
        }
    }
    return loaded;
}

const LoadedModel* ModelRegistry::find(const std::string& id) const {
    const auto it = models_.find(id);
    return it == models_.end() ? nullptr : it->second.get();
}

std::vector<std::shared_ptr<const LoadedModel>> ModelRegistry::models() const {
    std::vector<std::shared_ptr<const LoadedModel>> out;
    for (const auto& [id, model] : models_) out.push_back(model);
    return out;
}

std::vector<fs::path> find_checkpoints(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw NotFound("no models directory " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ckpt") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string encode_frame_png(const dataio::EchoFrame& frame) {
    return dataio::encode_png(dataio::quantize(frame));
}

}  // namespace echogan::inference
