#include "echogan/networks.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace echogan::networks {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
    int k = 0;
    while ((1 << k) < v) ++k;
    return k;
}

// Seeds for the two networks are decorrelated so that build_generator(c, s)
// and build_discriminator(c, s) never share a weight stream.
constexpr std::uint64_t kDiscriminatorSeedSalt = 0x9e3779b97f4a7c15ULL;

std::vector<LayerSummary> summarize(const nn::Sequential& net, Shape shape) {
    std::vector<LayerSummary> rows;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const nn::Layer& layer = net.layer(i);
        shape = layer.output_shape(shape);
        std::size_t count = 0;
        for (const nn::Parameter* p : layer.parameters()) count += p->value.size();
        rows.push_back(LayerSummary{layer.kind(), shape, count});
    }
    return rows;
}

}  // namespace

void ModelConfig::validate() const {
    const int min_size = 1 << kEncoderStages;
    if (image_size <= 0 || image_size % min_size != 0) {
        throw InvalidConfig("image size " + std::to_string(image_size) +
                            " must be a positive multiple of " + std::to_string(min_size));
    }
    validate_discriminator();
}

void ModelConfig::validate_discriminator() const {
    if (image_size <= 0) throw InvalidConfig("image size must be positive");
    if (!is_power_of_two(patch_stride) || patch_stride < 2 || patch_stride > image_size) {
        throw InvalidConfig("patch stride " + std::to_string(patch_stride) +
                            " must be a power of two in [2, image size]");
    }
    if (image_size % patch_stride != 0) {
        throw InvalidConfig("image size must be divisible by the patch stride");
    }
    if (kernel_size < 2) throw InvalidConfig("kernel size must be at least 2");
    if (generator_base_channels < 1 || discriminator_base_channels < 1) {
        throw InvalidConfig("base channel counts must be positive");
    }
    if (condition_channels < 1 || image_channels < 1) {
        throw InvalidConfig("channel counts must be positive");
    }
    if (!(leaky_slope >= 0.0f && leaky_slope < 1.0f)) {
        throw InvalidConfig("leaky slope must lie in [0, 1)");
    }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{{"image_size", c.image_size},
                       {"generator_base_channels", c.generator_base_channels},
                       {"discriminator_base_channels", c.discriminator_base_channels},
                       {"kernel_size", c.kernel_size},
                       {"leaky_slope", c.leaky_slope},
                       {"patch_stride", c.patch_stride},
                       {"condition_channels", c.condition_channels},
                       {"image_channels", c.image_channels}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
    const ModelConfig defaults;
    c.image_size = j.value("image_size", defaults.image_size);
    c.generator_base_channels = j.value("generator_base_channels", defaults.generator_base_channels);
    c.discriminator_base_channels =
        j.value("discriminator_base_channels", defaults.discriminator_base_channels);
    c.kernel_size = j.value("kernel_size", defaults.kernel_size);
    c.leaky_slope = j.value("leaky_slope", defaults.leaky_slope);
    c.patch_stride = j.value("patch_stride", defaults.patch_stride);
    c.condition_channels = j.value("condition_channels", defaults.condition_channels);
    c.image_channels = j.value("image_channels", defaults.image_channels);
}

int encoder_channels(int base, int stage) {
    return std::min(base << std::min(stage, 3), base * 8);
}

int decoder_channels(int base, int stage) {
    if (stage == kEncoderStages - 1) return base;
    return encoder_channels(base, kEncoderStages - 2 - stage);
}

int discriminator_downsamplings(const ModelConfig& config) {
    return log2_exact(config.patch_stride);
}

// -------------------------------------------------------------- Generator

Generator::Generator(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    const int k = config_.kernel_size;
    const int base = config_.generator_base_channels;
    const float slope = config_.leaky_slope;

    int channels = config_.condition_channels;
    for (int s = 0; s < kEncoderStages; ++s) {
        const int out = encoder_channels(base, s);
        net_.add<nn::Conv2d>(channels, out, k, 2, false);
        net_.add<nn::BatchNorm2d>(out);
        net_.add<nn::LeakyRelu>(slope);
        channels = out;
    }
    for (int s = 0; s < kEncoderStages; ++s) {
        const int out = decoder_channels(base, s);
        net_.add<nn::ConvTranspose2d>(channels, out, k, 2, false);
        net_.add<nn::BatchNorm2d>(out);
        net_.add<nn::LeakyRelu>(slope);
        channels = out;
    }
    net_.add<nn::Conv2d>(channels, config_.image_channels, k, 1, true);
    net_.add<nn::Sigmoid>();

    nn::initialize_parameters(net_, seed);
}

void Generator::check_condition(const Shape& s) const {
    if (s.c != config_.condition_channels || s.h != config_.image_size ||
        s.w != config_.image_size || s.n < 1) {
        throw ShapeError("generator expects condition (N," +
                         std::to_string(config_.condition_channels) + "," +
                         std::to_string(config_.image_size) + "," +
                         std::to_string(config_.image_size) + "), got " + s.to_string());
    }
}

Tensor Generator::forward(const Tensor& condition) {
    check_condition(condition.shape());
    return net_.forward(condition);
}

Tensor Generator::infer(const Tensor& condition) const {
    check_condition(condition.shape());
    // Batch items are pushed through one at a time so that a batched call is
    // bitwise identical to looping over single items.
    const Shape& s = condition.shape();
    if (s.n == 1) return net_.infer(condition);
    Tensor out(Shape{s.n, config_.image_channels, s.h, s.w});
    for (int n = 0; n < s.n; ++n) {
        const Tensor y = net_.infer(nn::take_sample(condition, n));
        std::copy_n(y.data(), y.size(), out.sample(n));
    }
    return out;
}

Tensor Generator::backward(const Tensor& grad_output) { return net_.backward(grad_output); }

std::vector<LayerSummary> Generator::summary(int batch) const {
    return summarize(net_, Shape{batch, config_.condition_channels, config_.image_size,
                                 config_.image_size});
}

// ---------------------------------------------------------- Discriminator

Discriminator::Discriminator(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate_discriminator();
    const int k = config_.kernel_size;
    const int base = config_.discriminator_base_channels;

    int channels = config_.condition_channels + config_.image_channels;
    const int downsamplings = discriminator_downsamplings(config_);
    for (int s = 0; s < downsamplings; ++s) {
        const int out = encoder_channels(base, s);
        net_.add<nn::Conv2d>(channels, out, k, 2, false);
        net_.add<nn::BatchNorm2d>(out);
        net_.add<nn::LeakyRelu>(config_.leaky_slope);
        channels = out;
    }
    net_.add<nn::Conv2d>(channels, 1, k, 1, true);

    nn::initialize_parameters(net_, seed ^ kDiscriminatorSeedSalt);
}

Tensor Discriminator::join(const Tensor& condition, const Tensor& image) const {
    const Shape& c = condition.shape();
    const Shape& x = image.shape();
    if (c.n != x.n || c.h != x.h || c.w != x.w) {
        throw ShapeError("condition " + c.to_string() + " and image " + x.to_string() +
                         " are not aligned");
    }
    if (c.c != config_.condition_channels || x.c != config_.image_channels) {
        throw ShapeError("discriminator channel mismatch: condition " + c.to_string() +
                         ", image " + x.to_string());
    }
    if (c.h != config_.image_size || c.w != config_.image_size) {
        throw ShapeError("discriminator expects " + std::to_string(config_.image_size) +
                         " pixel inputs, got " + c.to_string());
    }
    return nn::concat_channels(condition, image);
}

Tensor Discriminator::forward(const Tensor& condition, const Tensor& image) {
    return net_.forward(join(condition, image));
}

Tensor Discriminator::infer(const Tensor& condition, const Tensor& image) const {
    return net_.infer(join(condition, image));
}

std::pair<Tensor, Tensor> Discriminator::backward(const Tensor& grad_scores) {
    const Tensor grad = net_.backward(grad_scores);
    return {nn::slice_channels(grad, 0, config_.condition_channels),
            nn::slice_channels(grad, config_.condition_channels, config_.image_channels)};
}

std::vector<LayerSummary> Discriminator::summary(int batch) const {
    return summarize(net_, Shape{batch, config_.condition_channels + config_.image_channels,
                                 config_.image_size, config_.image_size});
}

// ------------------------------------------------------------- functions

Generator build_generator(const ModelConfig& config, std::uint64_t seed) {
    return Generator(config, seed);
}

Discriminator build_discriminator(const ModelConfig& config, std::uint64_t seed) {
    return Discriminator(config, seed);
}

Tensor generate(Generator& g, const Tensor& condition, Mode mode) {
    return mode == Mode::train ? g.forward(condition) : g.infer(condition);
}

Tensor generate(const Generator& g, const Tensor& condition) { return g.infer(condition); }

Tensor discriminate(Discriminator& d, const Tensor& condition, const Tensor& image, Mode mode) {
    return mode == Mode::train ? d.forward(condition, image) : d.infer(condition, image);
}

std::size_t parameter_count(const nn::Sequential& net) {
    std::size_t total = 0;
    for (const nn::Parameter* p : net.parameters()) total += p->value.size();
    return total;
}

std::size_t parameter_count(const Generator& g) { return parameter_count(g.network()); }
std::size_t parameter_count(const Discriminator& d) { return parameter_count(d.network()); }

std::string format_summary(const std::string& title, const std::vector<LayerSummary>& rows) {
    std::ostringstream out;
    out << title << '\n';
    out << std::left << std::setw(6) << "#" << std::setw(12) << "layer" << std::setw(22)
        << "output (N,C,H,W)" << std::right << std::setw(12) << "params" << '\n';
    std::size_t total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << std::left << std::setw(6) << i << std::setw(12) << rows[i].kind << std::setw(22)
            << rows[i].output.to_string() << std::right << std::setw(12) << rows[i].parameters
            << '\n';
        total += rows[i].parameters;
    }
    out << "total parameters: " << total << '\n';
    return out.str();
}

}  // namespace echogan::networks
