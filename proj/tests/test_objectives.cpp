#include <doctest.h>

#include "echogan/objectives.hpp"
#include "support.hpp"

using namespace echogan;
using namespace echogan::objectives;
using nn::BasicTensor;
using nn::Shape;
using nn::Tensor;

namespace {

Tensor filled(float v, Shape s = {2, 1, 3, 3}) { return Tensor(s, v); }

// Reference formulas written elementwise, independent of the library loop.
double reference_d(const BasicTensor<double>& real, const BasicTensor<double>& fake) {
    double a = 0.0, b = 0.0;
    for (double r : real.values()) a += (1.0 - r) * (1.0 - r);
    for (double f : fake.values()) b += f * f;
    return a / real.size() + b / fake.size();
}

double reference_adv(const BasicTensor<double>& fake) {
    double a = 0.0;
    for (double f : fake.values()) a += (1.0 - f) * (1.0 - f);
    return a / fake.size();
}

double reference_recon(const BasicTensor<double>& t, const BasicTensor<double>& g) {
    double a = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) a += std::abs(t[i] - g[i]);
    return a / t.size();
}

}  // namespace

TEST_CASE("discriminator loss at fixed points") {
    CHECK(std::abs(d_loss(filled(1), filled(0)) - 0.0) < 1e-6);
    CHECK(std::abs(d_loss(filled(0), filled(1)) - 2.0) < 1e-6);
    CHECK(std::abs(d_loss(filled(0.5f), filled(0.5f)) - 0.5) < 1e-6);
}

TEST_CASE("generator adversarial loss at fixed points") {
    CHECK(std::abs(g_adv_loss(filled(1)) - 0.0) < 1e-6);
    CHECK(std::abs(g_adv_loss(filled(0)) - 1.0) < 1e-6);
    CHECK(std::abs(g_adv_loss(filled(-1)) - 4.0) < 1e-6);
}

TEST_CASE("reconstruction loss at fixed points") {
    std::mt19937_64 rng(1);
    const Tensor x = testing::random_tensor(Shape{2, 1, 5, 5}, rng, 0, 1);
    CHECK(recon_loss(x, x) == 0.0f);
    CHECK(std::abs(recon_loss(filled(1), filled(0)) - 1.0) < 1e-6);
    const Tensor t(Shape{1, 1, 1, 2}, std::vector<float>{0.0f, 0.5f});
    const Tensor g(Shape{1, 1, 1, 2}, std::vector<float>{0.5f, 0.0f});
    CHECK(std::abs(recon_loss(t, g) - 0.5) < 1e-6);
}

TEST_CASE("total generator loss") {
    CHECK(std::abs(g_total_loss(1.0, 0.3, 0.01) - 0.31) < 1e-6);
    CHECK(std::abs(g_total_loss(1.0, 0.3) - 0.31) < 1e-6);
    CHECK(g_total_loss(5.0, 0.3, 0.0) == 0.3);
    CHECK(std::abs(g_total_loss(2.0, 0.0, 0.5) - 1.0) < 1e-6);
    CHECK_THROWS_AS(g_total_loss(1.0, 0.3, -0.01), InvalidConfig);
    CHECK(kDefaultAdversarialWeight == 0.01);
}

TEST_CASE("shape and emptiness errors") {
    CHECK_THROWS_AS(d_loss(filled(1, {1, 1, 2, 2}), filled(0, {1, 1, 3, 3})), ShapeError);
    CHECK_THROWS_AS(recon_loss(filled(1, {1, 1, 2, 2}), filled(0, {2, 1, 2, 2})), ShapeError);
    CHECK_THROWS_AS(g_adv_loss(Tensor{}), EmptyInput);
    CHECK_THROWS_AS(d_loss(Tensor{}, Tensor{}), EmptyInput);
    CHECK_THROWS_AS(recon_loss(Tensor{}, Tensor{}), EmptyInput);
}

TEST_CASE("losses agree with elementwise reference on random inputs") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> extent(1, 6);
        const Shape s{extent(rng), 1, extent(rng), extent(rng)};
        const auto real = testing::random_tensor<double>(s, rng, -2, 2);
        const auto fake = testing::random_tensor<double>(s, rng, -2, 2);
        const auto target = testing::random_tensor<double>(s, rng, 0, 1);
        const auto gen = testing::random_tensor<double>(s, rng, 0, 1);
        CHECK(d_loss(real, fake) == doctest::Approx(reference_d(real, fake)).epsilon(1e-12));
        CHECK(g_adv_loss(fake) == doctest::Approx(reference_adv(fake)).epsilon(1e-12));
        CHECK(recon_loss(target, gen) == doctest::Approx(reference_recon(target, gen)).epsilon(1e-12));
    }
}

TEST_CASE("loss components are non-negative and the total composes") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Shape s{2, 1, 4, 4};
        const auto real = testing::random_tensor(s, rng, -3, 3);
        const auto fake = testing::random_tensor(s, rng, -3, 3);
        const auto target = testing::random_tensor(s, rng, 0, 1);
        const auto gen = testing::random_tensor(s, rng, 0, 1);
        const double d = d_loss(real, fake);
        const double adv = g_adv_loss(fake);
        const double rec = recon_loss(target, gen);
        const double lambda = weight(rng);
        CHECK(d >= 0.0);
        CHECK(adv >= 0.0);
        CHECK(rec >= 0.0);
        CHECK(std::abs(g_total_loss(adv, rec, lambda) - (lambda * adv + rec)) < 1e-6);
    }
}

TEST_CASE("analytic gradients match central differences on random 3x3 grids") {
    constexpr double kStep = 1e-4;
    constexpr double kTolerance = 1e-4;
    std::mt19937_64 rng(2019);
    const Shape s{1, 1, 3, 3};
    for (int trial = 0; trial < 20; ++trial) {
        auto real = testing::random_tensor<double>(s, rng, -1.5, 1.5);
        auto fake = testing::random_tensor<double>(s, rng, -1.5, 1.5);
        auto target = testing::random_tensor<double>(s, rng, 0, 1);
        auto gen = testing::random_tensor<double>(s, rng, 0, 1);

        const auto d = d_loss_with_grad(real, fake);
        const auto adv = g_adv_loss_with_grad(fake);
        const auto rec = recon_loss_with_grad(target, gen);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double fd_real =
                testing::central_difference<double>([&] { return d_loss(real, fake); }, real, i, kStep);
            const double fd_fake =
                testing::central_difference<double>([&] { return d_loss(real, fake); }, fake, i, kStep);
            const double fd_adv =
                testing::central_difference<double>([&] { return g_adv_loss(fake); }, fake, i, kStep);
            CHECK(testing::relative_error(d.grad_real[i], fd_real) < kTolerance);
            CHECK(testing::relative_error(d.grad_fake[i], fd_fake) < kTolerance);
            CHECK(testing::relative_error(adv.grad[i], fd_adv) < kTolerance);
            // |t - g| is not differentiable at a tie or within one step of it.
            if (std::abs(target[i] - gen[i]) > 2 * kStep) {
                const double fd_rec = testing::central_difference<double>(
                    [&] { return recon_loss(target, gen); }, gen, i, kStep);
                CHECK(testing::relative_error(rec.grad[i], fd_rec) < kTolerance);
            }
        }
    }
}

TEST_CASE("reconstruction subgradient is zero at ties") {
    const Tensor t(Shape{1, 1, 1, 3}, std::vector<float>{0.2f, 0.5f, 0.9f});
    const Tensor g(Shape{1, 1, 1, 3}, std::vector<float>{0.2f, 0.7f, 0.1f});
    const auto r = recon_loss_with_grad(t, g);
    CHECK(r.grad[0] == 0.0f);
    CHECK(r.grad[1] == doctest::Approx(1.0 / 3));
    CHECK(r.grad[2] == doctest::Approx(-1.0 / 3));
}
