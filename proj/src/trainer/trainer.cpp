#include <cmath>

#include "echogan/trainer.hpp"

namespace echogan::trainer {

namespace {

nn::AdamOptions adam_options(const TrainConfig& c, double learning_rate) {
    return nn::AdamOptions{learning_rate, c.adam_beta1, c.adam_beta2, c.adam_epsilon};
}

void require_finite(double value, std::int64_t iteration, const char* term) {
    if (!std::isfinite(value)) throw DivergenceError(iteration, term);
}

void check_hyperparameters(const TrainConfig& c) {
    // Zero learning rates are accepted here (they freeze a network); config
    // files go through TrainConfig::validate, which requires positive rates.
    if (!(c.lr_generator >= 0.0) || !(c.lr_discriminator >= 0.0)) {
        throw InvalidConfig("learning rates must be non-negative");
    }
    if (!(c.lambda >= 0.0)) throw InvalidConfig("adversarial weight must be non-negative");
}

}  // namespace

TrainingState::TrainingState(const TrainConfig& train_config, const ModelConfig& model_config,
                             dataio::SplitManifest split)
    : train(train_config),
      model(model_config),
      spec(dataio::ConditionSpec::from_name(train_config.experiment)),
      manifest(std::move(split)),
      generator(model_config, init_seed(train_config)),
      discriminator(model_config, init_seed(train_config)) {
    check_hyperparameters(train);
    const auto g_params = generator.parameters();
    const auto d_params = discriminator.parameters();
    generator_optimizer = nn::Adam(adam_options(train, train.lr_generator), g_params);
    discriminator_optimizer = nn::Adam(adam_options(train, train.lr_discriminator), d_params);
}

LossReport train_step(TrainingState& state, const dataio::Batch& batch) {
    using objectives::d_loss_with_grad;
    using objectives::g_adv_loss_with_grad;
    using objectives::recon_loss_with_grad;

    auto& g = state.generator;
    auto& d = state.discriminator;
    const nn::Tensor& condition = batch.condition;
    const nn::Tensor& real = batch.image;
    if (condition.shape() != real.shape()) {
        throw ShapeError("condition " + condition.shape().to_string() + " vs image " +
                         real.shape().to_string());
    }
    const std::int64_t iteration = state.iteration + 1;

    g.zero_grad();
    const nn::Tensor fake = g.forward(condition);

    // Discriminator phase. The criterion is separable in real and fake scores,
    // so each half is backpropagated right after its own forward pass.
    d.zero_grad();
    const nn::Tensor real_scores = d.forward(condition, real);
    const nn::Tensor placeholder(real_scores.shape());
    d.backward(d_loss_with_grad(real_scores, placeholder).grad_real);
    const nn::Tensor fake_scores = d.forward(condition, fake);
    const auto d_terms = d_loss_with_grad(real_scores, fake_scores);
    d.backward(d_terms.grad_fake);
    require_finite(d_terms.value, iteration, "d_loss");
    state.discriminator_optimizer.step(d.parameters());

    // Generator phase against the updated discriminator.
    d.zero_grad();
    const nn::Tensor scores = d.forward(condition, fake);
    const auto adversarial = g_adv_loss_with_grad(scores);
    const auto reconstruction = recon_loss_with_grad(real, fake);
    nn::Tensor grad_fake = d.backward(adversarial.grad).second;
    d.zero_grad();

    const auto lambda = static_cast<float>(state.train.lambda);
    auto gf = grad_fake.values();
    const auto gr = reconstruction.grad.values();
    for (std::size_t i = 0; i < gf.size(); ++i) gf[i] = lambda * gf[i] + gr[i];

    LossReport report;
    report.lambda = state.train.lambda;
    report.d_loss = d_terms.value;
    report.g_adversarial = adversarial.value;
    report.g_reconstruction = reconstruction.value;
    report.g_total = objectives::g_total_loss(report.g_adversarial, report.g_reconstruction,
                                              report.lambda);
    require_finite(report.g_adversarial, iteration, "g_adv");
    require_finite(report.g_reconstruction, iteration, "g_recon");
    require_finite(report.g_total, iteration, "g_total");

    g.backward(grad_fake);
    state.generator_optimizer.step(g.parameters());
    state.iteration = iteration;
    return report;
}

}  // namespace echogan::trainer
