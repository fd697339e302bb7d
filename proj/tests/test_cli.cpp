#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "echogan/dataio/fixture.hpp"
#include "echogan/dataio/image_io.hpp"
#include "echogan/dataio/split.hpp"
#include "echogan/trainer.hpp"
#include "support.hpp"

using namespace echogan;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string output;
};

Result run(const std::string& args, const fs::path& scratch) {
    const fs::path log = scratch / "cli.log";
    const std::string cmd = std::string(ECHOGAN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream text;
    text << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text.str()};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Tiny architecture so a handful of iterations takes well under a second.
fs::path write_tiny_config(const fs::path& dir) {
    trainer::ExperimentConfig c;
    c.model.image_size = 128;
    c.model.generator_base_channels = 4;
    c.model.discriminator_base_channels = 4;
    c.train.batch_size = 2;
    c.train.total_iterations = 3;
    c.train.checkpoint_interval = 0;
    c.split.test_count = 1;
    trainer::save_config(dir / "tiny.json", c);
    return dir / "tiny.json";
}

}  // namespace

TEST_CASE("train, then generate single and batch") {
    testing::TempDir dir("cli");
    REQUIRE(run("fixture --out " + q(dir / "data") + " --count 4 --size 128", dir.path()).code == 0);
    const fs::path config = write_tiny_config(dir.path());

    const Result train = run("train --config " + q(config) + " --experiment c --data " + q(dir / "data") +
                                 " --out " + q(dir / "run") + " --log-every 1",
                             dir.path());
    INFO(train.output);
    REQUIRE(train.code == 0);
    const fs::path ckpt = dir / "run" / "experiment-c.ckpt";
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(dir / "run" / "split.json"));
    CHECK(fs::exists(dir / "run" / "loss_log.csv"));
    CHECK(dataio::load_manifest(dir / "run" / "split.json").test_ids.size() == 1);

    SUBCASE("single mask") {
        const Result gen = run("generate --mask " + q(dir / "data" / "synthetic0000" / "ED_mask.png") +
                                   " --checkpoint " + q(ckpt) + " --out " + q(dir / "out.png"),
                               dir.path());
        INFO(gen.output);
        CHECK(gen.code == 0);
        const auto img = dataio::read_gray_image(dir / "out.png");
        CHECK(img.height == 256);
        CHECK(img.width == 256);

        CHECK(run("generate --mask " + q(dir / "data" / "synthetic0000" / "ED_mask.png") + " --checkpoint " +
                      q(ckpt) + " --out " + q(dir / "small.png") + " --size 128",
                  dir.path()).code == 0);
        CHECK(dataio::read_gray_image(dir / "small.png").width == 128);
    }
    SUBCASE("batch mode") {
        fs::create_directories(dir / "masks");
        for (int i = 0; i < 3; ++i) {
            const std::string id = "synthetic000" + std::to_string(i);
            fs::copy_file(dir / "data" / id / "ED_mask.png", dir / "masks" / (id + ".png"));
        }
        const Result gen = run("generate --mask " + q(dir / "masks") + " --checkpoint " + q(ckpt) +
                                   " --out " + q(dir / "generated"),
                               dir.path());
        INFO(gen.output);
        CHECK(gen.code == 0);
        std::vector<std::string> stems;
        for (const auto& e : fs::directory_iterator(dir / "generated")) stems.push_back(e.path().stem().string());
        std::sort(stems.begin(), stems.end());
        CHECK(stems == std::vector<std::string>{"synthetic0000", "synthetic0001", "synthetic0002"});
    }
    SUBCASE("resume extends a run") {
        const Result resumed = run("train --config " + q(config) + " --experiment c --data " + q(dir / "data") +
                                       " --out " + q(dir / "run") + " --resume " + q(ckpt) + " --iterations 5",
                                   dir.path());
        INFO(resumed.output);
        CHECK(resumed.code == 0);
        CHECK(trainer::LossLog::read(dir / "run" / "loss_log.csv").size() == 5);
        CHECK(trainer::load_checkpoint(ckpt).iteration == 5);
    }
}

TEST_CASE("generate exit codes") {
    testing::TempDir dir("cli-codes");
    dataio::write_synthetic_dataset(dir / "data", 1, 0, 64);
    const fs::path mask = dir / "data" / "synthetic0000" / "ED_mask.png";

    const Result missing = run("generate --mask " + q(mask) + " --checkpoint " + q(dir / "none.ckpt") +
                                   " --out " + q(dir / "x.png"),
                               dir.path());
    CHECK(missing.code == 2);
    CHECK(missing.output.find("checkpoint") != std::string::npos);

    dataio::write_file(dir / "bad.ckpt", "not a checkpoint");
    CHECK(run("generate --mask " + q(mask) + " --checkpoint " + q(dir / "bad.ckpt") + " --out " +
                  q(dir / "x.png"),
              dir.path()).code == 2);
    CHECK(run("generate --mask " + q(dir / "nomask.png") + " --checkpoint " + q(dir / "bad.ckpt") +
                  " --out " + q(dir / "x.png"),
              dir.path()).code == 2);
    CHECK_FALSE(fs::exists(dir / "x.png"));
}

TEST_CASE("other subcommands") {
    testing::TempDir dir("cli-misc");
    const Result summary = run("summary --desk", dir.path());
    CHECK(summary.code == 0);
    CHECK(summary.output.find("generator") != std::string::npos);
    CHECK(summary.output.find("discriminator") != std::string::npos);
    CHECK(summary.output.find("(1,1,8,8)") != std::string::npos);

    CHECK(run("config --desk --out " + q(dir / "desk.json"), dir.path()).code == 0);
    CHECK(trainer::load_config(dir / "desk.json") == trainer::desk_preset());
    const Result defaults = run("config", dir.path());
    CHECK(defaults.code == 0);
    CHECK(defaults.output.find("0.00013") != std::string::npos);

    CHECK(run("fixture --out " + q(dir / "data") + " --count 6 --size 64", dir.path()).code == 0);
    CHECK(run("split --data " + q(dir / "data") + " --out " + q(dir / "split.json") + " --test-count 2",
              dir.path()).code == 0);
    const auto m = dataio::load_manifest(dir / "split.json");
    CHECK(m.train_ids.size() == 4);
    CHECK(m.test_ids.size() == 2);

    CHECK(run("train --experiment q --data " + q(dir / "data") + " --out " + q(dir / "o"), dir.path()).code != 0);
    CHECK(run("serve --port 0 --checkpoint " + q(dir / "missing.ckpt"), dir.path()).code != 0);
    CHECK(run("", dir.path()).code != 0);
}
