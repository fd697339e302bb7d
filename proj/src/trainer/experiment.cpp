#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "echogan/dataio/preprocess.hpp"
#include "echogan/dataio/study.hpp"
#include "echogan/trainer.hpp"

namespace echogan::trainer {

namespace fs = std::filesystem;

namespace {

constexpr const char* kLogHeader = "iteration,d_loss,g_adv,g_recon,g_total";

std::string format_row(std::int64_t iteration, const LossReport& r) {
    std::ostringstream row;
    row << iteration << std::setprecision(9) << ',' << r.d_loss << ',' << r.g_adversarial << ','
        << r.g_reconstruction << ',' << r.g_total;
    return row.str();
}

}  // namespace

LossLog::LossLog(const fs::path& path, std::optional<std::int64_t> resume_at) : path_(path) {
    std::vector<std::string> kept;
    if (resume_at && fs::exists(path)) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        while (static_cast<std::int64_t>(kept.size()) < *resume_at && std::getline(in, line)) {
            if (!line.empty()) kept.push_back(line);
        }
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    out_.open(path, std::ios::trunc);
    if (!out_) throw IoError("cannot open loss log " + path.string());
    out_ << kLogHeader << '\n';
    for (const auto& line : kept) out_ << line << '\n';
    out_.flush();
}

void LossLog::append(std::int64_t iteration, const LossReport& report) {
    out_ << format_row(iteration, report) << '\n';
    out_.flush();
    if (!out_) throw IoError("failed writing loss log " + path_.string());
}

std::vector<std::pair<std::int64_t, LossReport>> LossLog::read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("no loss log at " + path.string());
    std::vector<std::pair<std::int64_t, LossReport>> rows;
    std::string line;
    std::getline(in, line);
    if (line != kLogHeader) throw IoError(path.string() + " has an unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::int64_t iteration = 0;
        LossReport r;
        if (!(fields >> iteration >> r.d_loss >> r.g_adversarial >> r.g_reconstruction >> r.g_total)) {
            throw IoError(path.string() + ": malformed row");
        }
        rows.emplace_back(iteration, r);
    }
    return rows;
}

std::string checkpoint_name(const std::string& experiment, std::optional<std::int64_t> iteration) {
    if (!iteration) return "experiment-" + experiment + ".ckpt";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "-iter%07lld.ckpt", static_cast<long long>(*iteration));
    return "experiment-" + experiment + buffer;
}

std::uint64_t data_seed(std::uint64_t seed) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t init_seed(const TrainConfig& config) {
    const auto letter = static_cast<std::uint64_t>(config.experiment.empty() ? 0 : config.experiment.front());
    return data_seed(config.seed ^ (letter << 32));
}

std::vector<dataio::StudyRecord> load_training_records(const fs::path& data_root,
                                                       const std::vector<std::string>& ids,
                                                       int image_size) {
    std::vector<dataio::StudyRecord> records;
    records.reserve(ids.size());
    for (const auto& id : ids) {
        records.push_back(dataio::preprocess(dataio::load_study(data_root, id), image_size));
    }
    return records;
}

TrainingState run_experiment(const ExperimentConfig& config, const dataio::SplitManifest& manifest,
                             const RunOptions& options) {
    config.model.validate();
    config.train.validate();
    if (manifest.train_ids.empty()) throw EmptyDataset("the split has no training studies");

    TrainingState state = [&] {
        if (!options.resume) return TrainingState(config.train, config.model, manifest);
        TrainingState resumed = load_checkpoint(*options.resume);
        if (resumed.spec.name() != config.train.experiment.front() || resumed.model != config.model) {
            throw IncompatibleCheckpoint(options.resume->string() +
                                         " was trained with a different experiment or architecture");
        }
        if (resumed.manifest != manifest) {
            throw IncompatibleCheckpoint(options.resume->string() + " was trained on a different split");
        }
        // Allow extending a run by raising the iteration budget.
        resumed.train.total_iterations = config.train.total_iterations;
        resumed.train.checkpoint_interval = config.train.checkpoint_interval;
        return resumed;
    }();

    const auto records = load_training_records(options.data_root, manifest.train_ids,
                                               config.model.image_size);
    dataio::BatchIterator batches(records, state.spec, state.train.batch_size,
                                  data_seed(state.train.seed));
    batches.seek(state.iteration);

    try {
        fs::create_directories(options.out_dir);
    } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
    }
    LossLog log(options.out_dir / kLossLogName,
                options.resume ? std::optional<std::int64_t>(state.iteration) : std::nullopt);

    const std::string name = state.train.experiment;
    const std::int64_t interval = state.train.checkpoint_interval;
    while (state.iteration < state.train.total_iterations) {
        const LossReport report = train_step(state, batches.next());
        log.append(state.iteration, report);
        if (options.on_step) options.on_step(state.iteration, report);
        if (interval > 0 && state.iteration % interval == 0 &&
            state.iteration != state.train.total_iterations) {
            save_checkpoint(state, options.out_dir / checkpoint_name(name, state.iteration));
        }
    }
    save_checkpoint(state, options.out_dir / checkpoint_name(name, std::nullopt));
    return state;
}

std::vector<fs::path> run_experiments(const ExperimentConfig& config, const std::vector<char>& names,
                                      const dataio::SplitManifest& manifest,
                                      const RunOptions& options) {
    std::vector<fs::path> finals;
    for (const char name : names) {
        ExperimentConfig experiment = config;
        experiment.train.experiment = std::string(1, name);
        RunOptions per_run = options;
        per_run.out_dir = options.out_dir / std::string(1, name);
        per_run.resume.reset();
        run_experiment(experiment, manifest, per_run);
        finals.push_back(per_run.out_dir / checkpoint_name(experiment.train.experiment, std::nullopt));
    }
    return finals;
}

}  // namespace echogan::trainer
