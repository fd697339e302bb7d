#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "echogan/dataio/batch.hpp"
#include "echogan/dataio/types.hpp"
#include "echogan/networks.hpp"
#include "echogan/nn/adam.hpp"
#include "echogan/objectives.hpp"

namespace echogan::trainer {

using networks::ModelConfig;
using objectives::LossReport;

/// Optimization hyperparameters. Defaults are the published training setup;
/// the Adam betas follow the DCGAN convention.
struct TrainConfig {
    double lr_generator = 0.00013;
    double lr_discriminator = 0.00015;
    int batch_size = 8;
    std::int64_t total_iterations = 100000;
    double lambda = objectives::kDefaultAdversarialWeight;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::int64_t checkpoint_interval = 10000;  // 0 disables periodic checkpoints
    std::uint64_t seed = 0;
    std::string experiment = "e";

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct SplitConfig {
    std::uint64_t seed = 2019;
    int test_count = 22;

    bool operator==(const SplitConfig&) const = default;
};

/// Everything an experiment config file holds.
struct ExperimentConfig {
    ModelConfig model;
    TrainConfig train;
    SplitConfig split;

    bool operator==(const ExperimentConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const SplitConfig& c);
void from_json(const nlohmann::json& j, SplitConfig& c);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Missing fields take their defaults. Malformed files raise IoError,
/// out-of-range values InvalidConfig.
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Reduced-cost setup for desk-scale runs: 128x128 inputs through the full
/// seven-stage generator with narrower layers, batch 4, 2000 iterations.
ExperimentConfig desk_preset();

/// Mutable state of one adversarial training run; this is what a checkpoint stores.
struct TrainingState {
    TrainConfig train;
    ModelConfig model;
    dataio::ConditionSpec spec;
    dataio::SplitManifest manifest;
    networks::Generator generator;
    networks::Discriminator discriminator;
    nn::Adam generator_optimizer;
    nn::Adam discriminator_optimizer;
    std::int64_t iteration = 0;

    TrainingState(const TrainConfig& train_config, const ModelConfig& model_config,
                  dataio::SplitManifest split);
};

/// One discriminator update followed by one generator update.
///
/// D minimizes the least-squares criterion with the generated batch treated
/// as a constant; G then minimizes lambda * adversarial + reconstruction
/// against the freshly updated D. Gradients that reach D during the
/// generator phase are discarded. Throws DivergenceError on a non-finite term.
LossReport train_step(TrainingState& state, const dataio::Batch& batch);

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path);
/// Throws IncompatibleCheckpoint on a version or architecture mismatch and
/// IoError on a truncated or corrupted file.
TrainingState load_checkpoint(const std::filesystem::path& path);

/// CSV training log with header `iteration,d_loss,g_adv,g_recon,g_total`.
class LossLog {
public:
    /// Starts a fresh log, or when `resume_at` is set keeps exactly the first
    /// `*resume_at` rows of an existing one.
    explicit LossLog(const std::filesystem::path& path,
                     std::optional<std::int64_t> resume_at = std::nullopt);

    void append(std::int64_t iteration, const LossReport& report);

    static std::vector<std::pair<std::int64_t, LossReport>> read(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline constexpr const char* kLossLogName = "loss_log.csv";

std::string checkpoint_name(const std::string& experiment, std::optional<std::int64_t> iteration);

/// Batch order seed derived from the training seed.
std::uint64_t data_seed(std::uint64_t seed);

/// Weight initialization seed; each experiment letter gets its own stream.
std::uint64_t init_seed(const TrainConfig& config);

/// Loads and preprocesses the studies listed in `ids`.
std::vector<dataio::StudyRecord> load_training_records(const std::filesystem::path& data_root,
                                                       const std::vector<std::string>& ids,
                                                       int image_size);

struct RunOptions {
    std::filesystem::path data_root;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> resume;
    /// Called after every step; used by the CLI for progress output.
    std::function<void(std::int64_t, const LossReport&)> on_step;
};

/// Trains one condition-set experiment on the manifest's training ids, writing
/// periodic checkpoints, the loss log and a final checkpoint into out_dir.
TrainingState run_experiment(const ExperimentConfig& config,
                             const dataio::SplitManifest& manifest, const RunOptions& options);

/// Runs each named experiment into out_root/<name> against one shared manifest.
std::vector<std::filesystem::path> run_experiments(const ExperimentConfig& config,
                                                   const std::vector<char>& names,
                                                   const dataio::SplitManifest& manifest,
                                                   const RunOptions& options);

}  // namespace echogan::trainer
