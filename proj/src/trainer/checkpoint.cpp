#include <bit>
#include <cstring>
#include <type_traits>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "echogan/dataio/image_io.hpp"
#include "echogan/trainer.hpp"

// Layout (little-endian):
//   "ECHOGANC"                 8 bytes
//   format version             u32
//   header length              u64
//   header                     JSON: configs, spec, manifest, iteration, tensor table
//   tensor payload             float32, in tensor-table order
//   crc32 of all bytes above   u32

namespace echogan::trainer {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'E', 'C', 'H', 'O', 'G', 'A', 'N', 'C'};

template <typename TensorPtr>
struct NamedTensor {
    std::string name;
    TensorPtr tensor;
};

// Every tensor a checkpoint carries, in a fixed order. Saving walks a const
// state, loading writes through the same table of a mutable one.
template <typename State>
auto tensor_table(State& s) {
    using TensorPtr =
        std::conditional_t<std::is_const_v<State>, const nn::Tensor*, nn::Tensor*>;
    std::vector<NamedTensor<TensorPtr>> table;
    auto add_params = [&](const std::string& prefix, const auto& params) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            table.push_back({prefix + ".param" + std::to_string(i) + "." + params[i]->name,
                             &params[i]->value});
        }
    };
    auto add_tensors = [&](const std::string& prefix, const auto& tensors) {
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            table.push_back({prefix + std::to_string(i), tensors[i]});
        }
    };
    auto add_moments = [&](const std::string& prefix, auto& opt) {
        for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
            table.push_back({prefix + ".m" + std::to_string(i), &opt.first_moments()[i]});
        }
        for (std::size_t i = 0; i < opt.second_moments().size(); ++i) {
            table.push_back({prefix + ".v" + std::to_string(i), &opt.second_moments()[i]});
        }
    };
    add_params("generator", s.generator.parameters());
    add_tensors("generator.buffer", s.generator.buffers());
    add_params("discriminator", s.discriminator.parameters());
    add_tensors("discriminator.buffer", s.discriminator.buffers());
    add_moments("generator_optimizer", s.generator_optimizer);
    add_moments("discriminator_optimizer", s.discriminator_optimizer);
    return table;
}

template <typename T>
void put(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t offset) {
    T value;
    std::memcpy(&value, in.data() + offset, sizeof(T));
    return value;
}

std::uint32_t checksum(const char* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

nlohmann::json shape_json(const nn::Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path) {
    const auto table = tensor_table(state);

    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : table) {
        tensors.push_back({{"name", t.name}, {"shape", shape_json(t.tensor->shape())}});
    }
    const nlohmann::json header{
        {"train", state.train},
        {"model", state.model},
        {"condition_spec", std::string(1, state.spec.name())},
        {"condition_labels", state.spec.labels()},
        {"manifest",
         {{"seed", state.manifest.seed},
          {"train_ids", state.manifest.train_ids},
          {"test_ids", state.manifest.test_ids}}},
        {"iteration", state.iteration},
        {"generator_optimizer_steps", state.generator_optimizer.steps()},
        {"discriminator_optimizer_steps", state.discriminator_optimizer.steps()},
        {"tensors", tensors}};
    const std::string header_text = header.dump();

    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, header_text.size());
    out += header_text;
    for (const auto& t : table) {
        out.append(reinterpret_cast<const char*>(t.tensor->data()), t.tensor->size() * sizeof(float));
    }
    put<std::uint32_t>(out, checksum(out.data(), out.size()));

    // Write-then-rename so an interrupted save never leaves a torn checkpoint.
    const std::filesystem::path tmp = path.string() + ".tmp";
    dataio::write_file(tmp, out);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
    const std::string bytes = dataio::read_file(path);
    const std::string where = path.string();
    constexpr std::size_t kPrefix = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t);
    if (bytes.size() < kPrefix + sizeof(std::uint32_t) ||
        std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw IoError(where + " is not a checkpoint");
    }
    const auto version = get<std::uint32_t>(bytes, sizeof kMagic);
    if (version != kCheckpointVersion) {
        throw IncompatibleCheckpoint(where + " has format version " + std::to_string(version) +
                                     ", expected " + std::to_string(kCheckpointVersion));
    }
    const std::size_t body = bytes.size() - sizeof(std::uint32_t);
    if (checksum(bytes.data(), body) != get<std::uint32_t>(bytes, body)) {
        throw IoError(where + " is corrupted (checksum mismatch)");
    }
    const auto header_size = get<std::uint64_t>(bytes, sizeof kMagic + sizeof(std::uint32_t));
    if (header_size > body - kPrefix) throw IoError(where + " has a truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(kPrefix, header_size));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(where + ": malformed header: " + e.what());
    }

    try {
        dataio::SplitManifest manifest;
        const auto& m = header.at("manifest");
        manifest.seed = m.at("seed").get<std::uint64_t>();
        manifest.train_ids = m.at("train_ids").get<std::vector<std::string>>();
        manifest.test_ids = m.at("test_ids").get<std::vector<std::string>>();

        TrainingState state(header.at("train").get<TrainConfig>(),
                            header.at("model").get<ModelConfig>(), std::move(manifest));
        if (header.at("condition_spec").get<std::string>() != std::string(1, state.spec.name())) {
            throw IncompatibleCheckpoint(where + ": condition spec disagrees with its config");
        }
        state.iteration = header.at("iteration").get<std::int64_t>();
        state.generator_optimizer.set_steps(header.at("generator_optimizer_steps").get<std::int64_t>());
        state.discriminator_optimizer.set_steps(
            header.at("discriminator_optimizer_steps").get<std::int64_t>());

        const auto table = tensor_table(state);
        const auto& stored = header.at("tensors");
        if (stored.size() != table.size()) {
            throw IncompatibleCheckpoint(where + " stores " + std::to_string(stored.size()) +
                                         " tensors, architecture needs " + std::to_string(table.size()));
        }
        std::size_t offset = kPrefix + header_size;
        for (std::size_t i = 0; i < table.size(); ++i) {
            nn::Tensor& t = *table[i].tensor;
            if (stored[i].at("name").get<std::string>() != table[i].name ||
                stored[i].at("shape") != shape_json(t.shape())) {
                throw IncompatibleCheckpoint(where + ": tensor " + table[i].name + " does not match");
            }
            const std::size_t n = t.size() * sizeof(float);
            if (offset + n > body) throw IoError(where + " has a truncated payload");
            std::memcpy(t.data(), bytes.data() + offset, n);
            offset += n;
        }
        if (offset != body) throw IoError(where + " has trailing bytes");
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(where + ": malformed header: " + e.what());
    }
}

}  // namespace echogan::trainer
