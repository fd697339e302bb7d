#include <algorithm>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "echogan/dataio/fixture.hpp"
#include "echogan/dataio/image_io.hpp"
#include "echogan/dataio/split.hpp"
#include "echogan/dataio/study.hpp"
#include "echogan/inference.hpp"
#include "echogan/trainer.hpp"

namespace fs = std::filesystem;
using namespace echogan;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBadInput = 2;

struct TrainArgs {
    std::optional<fs::path> config;
    bool desk = false;
    std::string experiment = "e";
    fs::path data;
    fs::path out;
    std::optional<fs::path> resume;
    std::optional<fs::path> manifest;
    std::optional<std::int64_t> iterations;
    int log_every = 100;
};

struct GenerateArgs {
    fs::path mask;
    fs::path checkpoint;
    fs::path out;
    int size = 256;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::vector<fs::path> checkpoints;
    std::optional<fs::path> models_dir;
};

struct SummaryArgs {
    std::optional<fs::path> config;
    bool desk = false;
};

struct ConfigArgs {
    std::optional<fs::path> out;
    bool desk = false;
};

struct FixtureArgs {
    fs::path out;
    int count = 8;
    std::uint64_t seed = 0;
    int size = 128;
};

struct SplitArgs {
    fs::path data;
    fs::path out;
    std::uint64_t seed = 2019;
    int test_count = dataio::kDefaultTestCount;
};

trainer::ExperimentConfig resolve_config(const std::optional<fs::path>& path, bool desk) {
    if (path) return trainer::load_config(*path);
    return desk ? trainer::desk_preset() : trainer::ExperimentConfig{};
}

int run_train(const TrainArgs& args) {
    trainer::ExperimentConfig config = resolve_config(args.config, args.desk);
    if (args.iterations) config.train.total_iterations = *args.iterations;

    std::vector<char> names;
    if (args.experiment == "all") {
        const auto all = dataio::ConditionSpec::names();
        names.assign(all.begin(), all.end());
    } else {
        names.push_back(dataio::ConditionSpec::from_name(args.experiment).name());
    }
    if (args.resume && names.size() != 1) {
        throw InvalidConfig("--resume needs a single --experiment");
    }

    const auto ids = dataio::list_studies(args.data);
    const fs::path manifest_path = args.manifest.value_or(args.out / "split.json");
    const dataio::SplitManifest manifest = dataio::load_or_create_manifest(
        manifest_path, ids, config.split.seed, config.split.test_count);
    std::cerr << "split: " << manifest.train_ids.size() << " train / " << manifest.test_ids.size()
              << " test (" << manifest_path.string() << ")\n";

    trainer::RunOptions options;
    options.data_root = args.data;
    options.out_dir = args.out;
    options.resume = args.resume;
    const std::int64_t total = config.train.total_iterations;
    const int every = args.log_every;
    options.on_step = [total, every](std::int64_t it, const trainer::LossReport& r) {
        if (every > 0 && (it % every == 0 || it == total)) {
            std::cerr << "iter " << it << "/" << total << "  d " << r.d_loss << "  g_adv "
                      << r.g_adversarial << "  g_recon " << r.g_reconstruction << "  g_total "
                      << r.g_total << '\n';
        }
    };

    if (names.size() == 1) {
        config.train.experiment = std::string(1, names.front());
        trainer::run_experiment(config, manifest, options);
        std::cout << (args.out / trainer::checkpoint_name(config.train.experiment, std::nullopt)).string()
                  << '\n';
    } else {
        for (const auto& path : trainer::run_experiments(config, names, manifest, options)) {
            std::cout << path.string() << '\n';
        }
    }
    return kOk;
}

int generate_one(const inference::LoadedModel& model, const fs::path& mask_path,
                 const fs::path& out_path, int size) {
    inference::GenerationRequest request;
    request.mask = dataio::LabelMap::from_raster(dataio::read_gray_image(mask_path), mask_path.string());
    request.output_size = size;
    request.checkpoint_id = model.id();
    const auto response = inference::generate_from_mask(request, &model);
    dataio::write_gray_image(out_path, dataio::quantize(response.image));
    std::cerr << mask_path.string() << " -> " << out_path.string() << " (" << response.latency_ms
              << " ms)\n";
    return kOk;
}

int run_generate(const GenerateArgs& args) {
    if (!fs::is_regular_file(args.checkpoint)) {
        std::cerr << "error: checkpoint not found: " << args.checkpoint.string() << '\n';
        return kBadInput;
    }
    if (!fs::exists(args.mask)) {
        std::cerr << "error: mask not found: " << args.mask.string() << '\n';
        return kBadInput;
    }
    std::optional<inference::LoadedModel> model;
    try {
        model.emplace(inference::load_model(args.checkpoint));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    }

    if (!fs::is_directory(args.mask)) {
        try {
            return generate_one(*model, args.mask, args.out, args.size);
        } catch (const NotFound& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kBadInput;
        } catch (const IoError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kBadInput;
        } catch (const CorruptLabel& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kBadInput;
        }
    }

    // Batch mode: every raster in the directory, written under --out with the same name.
    std::vector<fs::path> masks;
    for (const auto& entry : fs::directory_iterator(args.mask)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm" || ext == ".mhd")) {
            masks.push_back(entry.path());
        }
    }
    std::sort(masks.begin(), masks.end());
    int status = kOk;
    for (const auto& mask : masks) {
        fs::path target = args.out / mask.filename();
        target.replace_extension(".png");
        try {
            generate_one(*model, mask, target, args.size);
        } catch (const Error& e) {
            std::cerr << "error: " << mask.string() << ": " << e.what() << '\n';
            status = kBadInput;
        }
    }
    return status;
}

inference::InferenceServer* active_server = nullptr;

void handle_signal(int) {
    if (active_server) active_server->stop();
}

int run_serve(const ServeArgs& args) {
    std::vector<fs::path> paths = args.checkpoints;
    if (args.models_dir) {
        const auto found = inference::find_checkpoints(*args.models_dir);
        paths.insert(paths.end(), found.begin(), found.end());
    }
    inference::ModelRegistry registry;
    std::vector<std::string> errors;
    registry.load_all(paths, &errors);
    for (const auto& e : errors) std::cerr << "skipped " << e << '\n';
    if (registry.empty()) {
        std::cerr << "error: no loadable checkpoints\n";
        return kFailure;
    }
    for (const auto& model : registry.models()) {
        std::cerr << "loaded " << model->id() << " (experiment " << model->spec().name() << ", "
                  << model->input_size() << "px)\n";
    }

    inference::InferenceServer server(registry);
    const int port = server.bind(args.host, args.port);
    std::cout << "listening on http://" << args.host << ":" << port << std::endl;
    active_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    server.listen();
    active_server = nullptr;
    return kOk;
}

int run_summary(const SummaryArgs& args) {
    const trainer::ExperimentConfig config = resolve_config(args.config, args.desk);
    config.model.validate();
    const networks::Generator g(config.model, 0);
    const networks::Discriminator d(config.model, 0);
    std::cout << networks::format_summary("generator", g.summary()) << '\n'
              << networks::format_summary("discriminator", d.summary());
    return kOk;
}

int run_config(const ConfigArgs& args) {
    const trainer::ExperimentConfig config = resolve_config(std::nullopt, args.desk);
    if (!args.out) {
        std::cout << nlohmann::json(config).dump(2) << '\n';
        return kOk;
    }
    trainer::save_config(*args.out, config);
    std::cout << "wrote " << args.out->string() << '\n';
    return kOk;
}

int run_fixture(const FixtureArgs& args) {
    const auto records = dataio::write_synthetic_dataset(args.out, args.count, args.seed, args.size);
    std::cout << "wrote " << records.size() << " studies to " << args.out.string() << '\n';
    return kOk;
}

int run_split(const SplitArgs& args) {
    const auto manifest = dataio::make_split(dataio::list_studies(args.data), args.seed, args.test_count);
    dataio::save_manifest(args.out, manifest);
    std::cout << manifest.train_ids.size() << " train / " << manifest.test_ids.size() << " test -> "
              << args.out.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mask-conditioned echocardiogram synthesis"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train one experiment (or all five)");
    train_cmd->add_option("--config", train.config, "Experiment config JSON")->check(CLI::ExistingFile);
    train_cmd->add_flag("--desk", train.desk, "Use the reduced desk-scale preset when no --config is given");
    train_cmd->add_option("--experiment", train.experiment, "Condition set: a, b, c, d, e or all")
        ->check(CLI::IsMember({"a", "b", "c", "d", "e", "all"}));
    train_cmd->add_option("--data", train.data, "Study root directory")->required();
    train_cmd->add_option("--out", train.out, "Output directory")->required();
    train_cmd->add_option("--resume", train.resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
    train_cmd->add_option("--manifest", train.manifest, "Split manifest (created if missing)");
    train_cmd->add_option("--iterations", train.iterations, "Override the iteration budget");
    train_cmd->add_option("--log-every", train.log_every, "Progress line interval (0 = quiet)");

    GenerateArgs gen;
    auto* gen_cmd = app.add_subcommand("generate", "Synthesize an echo frame from a mask");
    gen_cmd->add_option("--mask", gen.mask, "Mask raster, or a directory of masks")->required();
    gen_cmd->add_option("--checkpoint", gen.checkpoint, "Trained checkpoint")->required();
    gen_cmd->add_option("--out", gen.out, "Output PNG, or a directory in batch mode")->required();
    gen_cmd->add_option("--size", gen.size, "Output side length")->check(CLI::Range(1, 4096));

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP inference service");
    serve_cmd->add_option("--host", serve.host, "Bind address");
    serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--checkpoint", serve.checkpoints, "Checkpoint to serve (repeatable)");
    serve_cmd->add_option("--models-dir", serve.models_dir, "Serve every *.ckpt in this directory");

    SummaryArgs summary;
    auto* summary_cmd = app.add_subcommand("summary", "Print the layer tables");
    summary_cmd->add_option("--config", summary.config, "Experiment config JSON")->check(CLI::ExistingFile);
    summary_cmd->add_flag("--desk", summary.desk, "Use the desk-scale preset");

    ConfigArgs cfg;
    auto* config_cmd = app.add_subcommand("config", "Print or write an editable experiment config");
    config_cmd->add_flag("--desk", cfg.desk, "Start from the desk-scale preset");
    config_cmd->add_option("--out", cfg.out, "Write to this file instead of stdout");

    FixtureArgs fixture;
    auto* fixture_cmd = app.add_subcommand("fixture", "Write a synthetic study dataset");
    fixture_cmd->add_option("--out", fixture.out, "Output directory")->required();
    fixture_cmd->add_option("--count", fixture.count, "Number of studies");
    fixture_cmd->add_option("--seed", fixture.seed, "Random seed");
    fixture_cmd->add_option("--size", fixture.size, "Side length");

    SplitArgs split;
    auto* split_cmd = app.add_subcommand("split", "Write a train/test split manifest");
    split_cmd->add_option("--data", split.data, "Study root directory")->required();
    split_cmd->add_option("--out", split.out, "Manifest path")->required();
    split_cmd->add_option("--seed", split.seed, "Shuffle seed");
    split_cmd->add_option("--test-count", split.test_count, "Number of test studies");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return run_train(train);
        if (*gen_cmd) return run_generate(gen);
        if (*serve_cmd) return run_serve(serve);
        if (*summary_cmd) return run_summary(summary);
        if (*config_cmd) return run_config(cfg);
        if (*fixture_cmd) return run_fixture(fixture);
        if (*split_cmd) return run_split(split);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
