#include <nlohmann/json.hpp>

#include "echogan/dataio/image_io.hpp"
#include "echogan/trainer.hpp"

namespace echogan::trainer {

void TrainConfig::validate() const {
    if (!(lr_generator > 0.0) || !(lr_discriminator > 0.0)) {
        throw InvalidConfig("learning rates must be positive");
    }
    if (batch_size < 1) throw InvalidConfig("batch size must be at least 1");
    if (total_iterations < 1) throw InvalidConfig("total iterations must be at least 1");
    if (!(lambda >= 0.0)) throw InvalidConfig("adversarial weight must be non-negative");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw InvalidConfig("Adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw InvalidConfig("Adam epsilon must be positive");
    if (checkpoint_interval < 0) throw InvalidConfig("checkpoint interval must be non-negative");
    dataio::ConditionSpec::from_name(experiment);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"lr_generator", c.lr_generator},
                       {"lr_discriminator", c.lr_discriminator},
                       {"batch_size", c.batch_size},
                       {"total_iterations", c.total_iterations},
                       {"lambda", c.lambda},
                       {"adam_beta1", c.adam_beta1},
                       {"adam_beta2", c.adam_beta2},
                       {"adam_epsilon", c.adam_epsilon},
                       {"checkpoint_interval", c.checkpoint_interval},
                       {"seed", c.seed},
                       {"experiment", c.experiment}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    const TrainConfig d;
    c.lr_generator = j.value("lr_generator", d.lr_generator);
    c.lr_discriminator = j.value("lr_discriminator", d.lr_discriminator);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.total_iterations = j.value("total_iterations", d.total_iterations);
    c.lambda = j.value("lambda", d.lambda);
    c.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", d.adam_epsilon);
    c.checkpoint_interval = j.value("checkpoint_interval", d.checkpoint_interval);
    c.seed = j.value("seed", d.seed);
    c.experiment = j.value("experiment", d.experiment);
}

void to_json(nlohmann::json& j, const SplitConfig& c) {
    j = nlohmann::json{{"seed", c.seed}, {"test_count", c.test_count}};
}

void from_json(const nlohmann::json& j, SplitConfig& c) {
    const SplitConfig d;
    c.seed = j.value("seed", d.seed);
    c.test_count = j.value("test_count", d.test_count);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"model", c.model}, {"train", c.train}, {"split", c.split}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c = ExperimentConfig{};
    if (j.contains("model")) c.model = j.at("model").get<ModelConfig>();
    if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
    if (j.contains("split")) c.split = j.at("split").get<SplitConfig>();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = dataio::read_file(path);
    ExperimentConfig config;
    try {
        config = nlohmann::json::parse(text).get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    config.model.validate();
    config.train.validate();
    return config;
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
    dataio::write_file(path, nlohmann::json(config).dump(2) + "\n");
}

ExperimentConfig desk_preset() {
    ExperimentConfig c;
    c.model.image_size = 128;
    c.model.generator_base_channels = 16;
    c.model.discriminator_base_channels = 16;
    c.train.batch_size = 4;
    c.train.total_iterations = 2000;
    c.train.checkpoint_interval = 500;
    c.split.test_count = 2;
    return c;
}

}  // namespace echogan::trainer
