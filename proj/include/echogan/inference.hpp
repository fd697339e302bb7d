#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "echogan/dataio/types.hpp"
#include "echogan/networks.hpp"

namespace httplib {
class Server;
}

namespace echogan::inference {

struct GenerationRequest {
    dataio::LabelMap mask;  // any size
    int output_size = 256;
    std::string checkpoint_id;
};

struct GenerationResponse {
    dataio::EchoFrame image;  // output_size x output_size, values in [0,1]
    std::string checkpoint_id;
    char condition_spec = 'e';
    double latency_ms = 0.0;
};

/// A trained generator frozen for evaluation. Immutable after construction.
class LoadedModel {
public:
    LoadedModel(std::string id, networks::Generator generator, dataio::ConditionSpec spec);

    const std::string& id() const noexcept { return id_; }
    const dataio::ConditionSpec& spec() const noexcept { return spec_; }
    int input_size() const noexcept { return generator_.config().image_size; }
    const networks::Generator& generator() const noexcept { return generator_; }

private:
    std::string id_;
    networks::Generator generator_;
    dataio::ConditionSpec spec_;
};

/// Reads the generator and condition spec out of a training checkpoint.
/// The id defaults to the file stem.
LoadedModel load_model(const std::filesystem::path& checkpoint, std::string id = {});

/// Resize (nearest) -> filter through the model's own spec -> eval-mode
/// forward -> bilinear resize to the requested size. Throws ModelNotLoaded
/// when `model` is null and CorruptLabel on labels outside {0,1,2,3}.
GenerationResponse generate_from_mask(const GenerationRequest& request, const LoadedModel* model);

/// Set of models served by one process, keyed by checkpoint id.
class ModelRegistry {
public:
    void add(std::shared_ptr<const LoadedModel> model);
    /// Loads every path; unloadable ones are reported through `errors` and skipped.
    std::size_t load_all(const std::vector<std::filesystem::path>& checkpoints,
                         std::vector<std::string>* errors = nullptr);

    const LoadedModel* find(const std::string& id) const;
    std::vector<std::shared_ptr<const LoadedModel>> models() const;
    bool empty() const noexcept { return models_.empty(); }

private:
    std::map<std::string, std::shared_ptr<const LoadedModel>> models_;
};

/// Every *.ckpt file directly inside `dir`, sorted.
std::vector<std::filesystem::path> find_checkpoints(const std::filesystem::path& dir);

/// HTTP front end: GET /health, GET /models, POST /generate.
class InferenceServer {
public:
    explicit InferenceServer(const ModelRegistry& registry);
    ~InferenceServer();
    InferenceServer(const InferenceServer&) = delete;
    InferenceServer& operator=(const InferenceServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port, throws IoError on failure.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop() is called.
    void listen();
    /// Blocks until a concurrent listen() is accepting connections.
    void wait_until_ready() const;
    void stop();

    std::uint64_t requests_served() const noexcept { return served_.load(); }

private:
    void install_routes();

    const ModelRegistry& registry_;
    std::unique_ptr<httplib::Server> server_;
    std::atomic<std::uint64_t> served_{0};
};

/// Encodes a frame as an 8-bit PNG (round-half-up quantization).
std::string encode_frame_png(const dataio::EchoFrame& frame);

}  // namespace echogan::inference
