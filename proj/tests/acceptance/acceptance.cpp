// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "echogan/dataio/fixture.hpp"
#include "echogan/dataio/image_io.hpp"
#include "echogan/dataio/preprocess.hpp"
#include "echogan/networks.hpp"
#include "echogan/objectives.hpp"
#include "echogan/trainer.hpp"
#include "support.hpp"

using namespace echogan;
namespace fs = std::filesystem;
using nn::Shape;
using nn::Tensor;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

struct Criterion {
    std::string name;
    double budget_seconds;  // 0 = no runtime bound
    std::function<void(Outcome&)> body;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Tensor filled(float v) { return Tensor(Shape{2, 1, 8, 8}, v); }

void loss_units(Outcome& out) {
    using namespace objectives;
    constexpr double tol = 1e-6;
    out.require(near(d_loss(filled(1), filled(0)), 0.0, tol), "d_loss(1,0)=0");
    out.require(near(d_loss(filled(0), filled(1)), 2.0, tol), "d_loss(0,1)=2");
    out.require(near(d_loss(filled(0.5f), filled(0.5f)), 0.5, tol), "d_loss(0.5,0.5)=0.5");
    out.require(near(g_adv_loss(filled(1)), 0.0, tol), "g_adv(1)=0");
    out.require(near(g_adv_loss(filled(0)), 1.0, tol), "g_adv(0)=1");
    std::mt19937_64 rng(1);
    const Tensor x = testing::random_tensor(Shape{2, 1, 8, 8}, rng, 0, 1);
    out.require(near(recon_loss(x, x), 0.0, tol), "recon(x,x)=0");
    out.require(near(g_total_loss(1.0, 0.3, 0.01), 0.31, tol), "g_total(1,0.3,0.01)=0.31");
    out.detail << " 7 values within 1e-6";
}

void gradients(Outcome& out) {
    using namespace objectives;
    constexpr double step = 1e-4;
    constexpr double tol = 1e-4;
    std::mt19937_64 rng(2019);
    const Shape s{1, 1, 3, 3};
    double worst = 0.0;
    int checked = 0, skipped = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto real = testing::random_tensor<double>(s, rng, -1.5, 1.5);
        auto fake = testing::random_tensor<double>(s, rng, -1.5, 1.5);
        auto target = testing::random_tensor<double>(s, rng, 0, 1);
        auto gen = testing::random_tensor<double>(s, rng, 0, 1);
        const auto d = d_loss_with_grad(real, fake);
        const auto adv = g_adv_loss_with_grad(fake);
        const auto rec = recon_loss_with_grad(target, gen);
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto d_fn = [&] { return d_loss(real, fake); };
            worst = std::max(worst, testing::relative_error(
                                        d.grad_real[i], testing::central_difference<double>(d_fn, real, i, step)));
            worst = std::max(worst, testing::relative_error(
                                        d.grad_fake[i], testing::central_difference<double>(d_fn, fake, i, step)));
            worst = std::max(worst, testing::relative_error(
                                        adv.grad[i], testing::central_difference<double>(
                                                         [&] { return g_adv_loss(fake); }, fake, i, step)));
            checked += 3;
            if (std::abs(target[i] - gen[i]) <= 2 * step) {
                ++skipped;
                continue;
            }
            worst = std::max(worst, testing::relative_error(
                                        rec.grad[i], testing::central_difference<double>(
                                                         [&] { return recon_loss(target, gen); }, gen, i, step)));
            ++checked;
        }
    }
    out.require(worst < tol, "relative error < 1e-4");
    out.detail << " " << checked << " partials, worst relative error " << worst << ", " << skipped
               << " tie points skipped";
}

void shapes(Outcome& out) {
    std::mt19937_64 rng(3);
    const networks::ModelConfig config;
    const networks::Generator g(config, 0);
    const Tensor cond = testing::random_tensor(Shape{1, 1, 256, 256}, rng, 0, 3);
    const Tensor img = networks::generate(g, cond);
    out.require(img.shape() == Shape{1, 1, 256, 256}, "generator 256 -> 256, got " + img.shape().to_string());

    const networks::Discriminator d(config, 0);
    const Tensor scores = d.infer(cond, img);
    out.require(scores.shape() == Shape{1, 1, 16, 16}, "discriminator 256 -> 16x16, got " + scores.shape().to_string());

    networks::ModelConfig small = config;
    small.image_size = 128;
    const networks::Discriminator d128(small, 0);
    const Tensor c128 = testing::random_tensor(Shape{1, 1, 128, 128}, rng, 0, 3);
    const Tensor s128 = d128.infer(c128, testing::random_tensor(Shape{1, 1, 128, 128}, rng, 0, 1));
    out.require(s128.shape() == Shape{1, 1, 8, 8}, "discriminator 128 -> 8x8, got " + s128.shape().to_string());
    out.detail << " G " << img.shape().to_string() << ", D " << scores.shape().to_string() << ", D@128 "
               << s128.shape().to_string() << " (NCHW)";
}

std::vector<objectives::LossReport> training_run(const trainer::ExperimentConfig& config,
                                                 const std::vector<dataio::StudyRecord>& records,
                                                 int steps, trainer::TrainingState* final_state = nullptr) {
    trainer::TrainingState state(config.train, config.model, dataio::SplitManifest{});
    dataio::BatchIterator batches(records, state.spec, config.train.batch_size,
                                  trainer::data_seed(config.train.seed));
    std::vector<objectives::LossReport> reports;
    for (int i = 0; i < steps; ++i) reports.push_back(trainer::train_step(state, batches.next()));
    if (final_state) *final_state = std::move(state);
    return reports;
}

void determinism(Outcome& out) {
    std::mt19937_64 rng(4);
    const auto config = trainer::desk_preset();
    const auto records = dataio::make_synthetic_fixture(8, 0, config.model.image_size);

    const networks::Generator g(config.model, 9);
    const Tensor cond = testing::random_tensor(Shape{2, 1, 128, 128}, rng, 0, 3);
    out.require(networks::generate(g, cond) == networks::generate(g, cond), "eval-mode repeat");

    trainer::TrainingState a(config.train, config.model, {}), b(config.train, config.model, {});
    const auto ra = training_run(config, records, 50, &a);
    const auto rb = training_run(config, records, 50, &b);
    out.require(ra == rb, "50-step loss sequences identical");
    bool params_equal = true;
    const auto pa = a.generator.parameters(), pb = b.generator.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) params_equal = params_equal && pa[i]->value == pb[i]->value;
    out.require(params_equal, "final generator parameters identical");
    out.detail << " eval outputs bitwise equal; 50-step runs: " << ra.size()
               << " identical LossReports, final g_recon " << ra.back().g_reconstruction;
}

void condition_filter(Outcome& out) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> extent(1, 64);
    long mismatches = 0, pixels = 0;
    for (int m = 0; m < 1000; ++m) {
        const auto mask = testing::random_mask(extent(rng), extent(rng), rng);
        for (const char name : dataio::ConditionSpec::names()) {
            const auto spec = dataio::ConditionSpec::from_name(name);
            const auto filtered = dataio::filter_condition(mask, spec);
            for (std::size_t i = 0; i < mask.size(); ++i) {
                bool member = false;
                for (auto l : spec.labels()) member = member || l == mask.pixels[i];
                if (filtered.pixels[i] != (member ? mask.pixels[i] : 0)) ++mismatches;
                ++pixels;
            }
        }
    }
    out.require(mismatches == 0, "exact match");
    out.detail << " 1000 masks x 5 specs, " << pixels << " pixels, " << mismatches << " mismatches";
}

void overfit(Outcome& out) {
    const auto config = trainer::desk_preset();
    const auto records = dataio::make_synthetic_fixture(8, 0, config.model.image_size);
    const auto reports = training_run(config, records, static_cast<int>(config.train.total_iterations));
    double first = 0, last = 0;
    for (int i = 0; i < 50; ++i) {
        first += reports[i].g_reconstruction / 50;
        last += reports[reports.size() - 50 + i].g_reconstruction / 50;
    }
    out.require(last < 0.5 * first, "final-50 mean < 0.5 x first-50 mean");
    out.require(last < 0.08, "final-50 mean < 0.08");
    out.detail << " " << reports.size() << " iterations, lambda " << config.train.lambda
               << ", g_recon first-50 mean " << first << ", final-50 mean " << last;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(ECHOGAN_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void end_to_end(Outcome& out) {
    testing::TempDir dir("acceptance-e2e");
    const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    const fs::path log = dir / "cli.log";
    out.require(run_cli("fixture --out " + q(dir / "data") + " --count 8 --size 128", log) == 0, "fixture");
    out.require(run_cli("train --desk --iterations 200 --experiment e --data " + q(dir / "data") + " --out " +
                            q(dir / "run") + " --log-every 0",
                        log) == 0,
                "train exit 0");
    const fs::path ckpt = dir / "run" / "experiment-e.ckpt";
    out.require(fs::exists(ckpt), "checkpoint written");
    const fs::path mask = dir / "data" / "synthetic0003" / "ED_mask.png";
    out.require(run_cli("generate --mask " + q(mask) + " --checkpoint " + q(ckpt) + " --out " + q(dir / "gen.png"),
                        log) == 0,
                "generate exit 0");
    if (!fs::exists(dir / "gen.png")) {
        out.require(false, "output raster exists");
        return;
    }
    const auto raster = dataio::read_gray_image(dir / "gen.png");
    const std::set<std::uint8_t> levels(raster.pixels.begin(), raster.pixels.end());
    out.require(raster.height == 256 && raster.width == 256, "256x256 raster");
    out.require(levels.size() > 1, "more than one gray level");
    out.detail << " 200 iterations, output " << raster.height << "x" << raster.width << " 8-bit, "
               << levels.size() << " distinct gray levels";
}

void checkpoint_round_trip(Outcome& out) {
    testing::TempDir dir("acceptance-ckpt");
    const auto config = trainer::desk_preset();
    const auto records = dataio::make_synthetic_fixture(8, 0, config.model.image_size);
    trainer::TrainingState state(config.train, config.model, {});
    dataio::BatchIterator batches(records, state.spec, config.train.batch_size,
                                  trainer::data_seed(config.train.seed));
    for (int i = 0; i < 10; ++i) trainer::train_step(state, batches.next());
    trainer::save_checkpoint(state, dir / "mid.ckpt");

    trainer::TrainingState restored = trainer::load_checkpoint(dir / "mid.ckpt");
    dataio::BatchIterator resumed(records, restored.spec, config.train.batch_size,
                                  trainer::data_seed(restored.train.seed));
    resumed.seek(restored.iteration);

    const auto uninterrupted = trainer::train_step(state, batches.next());
    const auto after_reload = trainer::train_step(restored, resumed.next());
    out.require(uninterrupted == after_reload, "next-step LossReport identical");
    out.detail << " resumed at iteration 10; next step d_loss " << after_reload.d_loss << ", g_total "
               << after_reload.g_total << " (bitwise equal)";
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"loss unit suite", 1.0, loss_units},
        {"gradient suite", 10.0, gradients},
        {"shape suite", 30.0, shapes},
        {"determinism suite", 0.0, determinism},
        {"condition-filter oracle", 0.0, condition_filter},
        {"overfit check", 20 * 60.0, overfit},
        {"end-to-end CLI", 0.0, end_to_end},
        {"checkpoint round trip", 0.0, checkpoint_round_trip},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(out);
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && seconds > c.budget_seconds) {
            out.require(false, "runtime " + std::to_string(seconds) + " s over budget");
        }
        if (!out.pass) ++failures;
        std::printf("%s  %-24s %7.2fs %s\n", out.pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                    out.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
    return failures == 0 ? 0 : 1;
}
