#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "echogan/nn/layers.hpp"

namespace echogan::networks {

using nn::Shape;
using nn::Tensor;

/// Architecture hyperparameters shared by the generator and discriminator.
struct ModelConfig {
    int image_size = 256;
    int generator_base_channels = 64;
    int discriminator_base_channels = 64;
    int kernel_size = 4;
    float leaky_slope = 0.2f;
    int patch_stride = 16;
    int condition_channels = 1;
    int image_channels = 1;

    /// Throws InvalidConfig when the sizes cannot be realized by the fixed
    /// seven-stage encoder or by a stride-2 discriminator tower.
    void validate() const;
    /// The subset of validate() the discriminator alone needs; it has no
    /// seven-stage constraint on the image size.
    void validate_discriminator() const;

    bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

inline constexpr int kEncoderStages = 7;

/// Output channels of encoder stage `stage` (0-based): base, 2*base, ... capped at 8*base.
int encoder_channels(int base, int stage);
/// Output channels of decoder stage `stage`, mirroring the encoder's input widths.
int decoder_channels(int base, int stage);
/// Number of stride-2 convolutions in the discriminator (log2 of the patch stride).
int discriminator_downsamplings(const ModelConfig& config);

enum class Mode { train, eval };

struct LayerSummary {
    std::string kind;
    Shape output;
    std::size_t parameters = 0;
};

/// Encoder-decoder without skip connections and without a noise input.
///
/// 7 stride-2 convolutions, 7 stride-2 transposed convolutions, then a
/// stride-1 convolution and a sigmoid. Every stage except the last is batch
/// normalized and LeakyReLU activated.
class Generator {
public:
    Generator(const ModelConfig& config, std::uint64_t seed);

    /// Training path (batch statistics, caches activations for backward).
    Tensor forward(const Tensor& condition);
    /// Evaluation path (running statistics); pure and thread-safe.
    Tensor infer(const Tensor& condition) const;
    /// Backpropagates d(loss)/d(output), accumulating parameter gradients.
    Tensor backward(const Tensor& grad_output);

    std::vector<nn::Parameter*> parameters() { return net_.parameters(); }
    std::vector<const nn::Parameter*> parameters() const { return net_.parameters(); }
    std::vector<Tensor*> buffers() { return net_.buffers(); }
    std::vector<const Tensor*> buffers() const { return net_.buffers(); }
    void zero_grad() { net_.zero_grad(); }

    const ModelConfig& config() const noexcept { return config_; }
    const nn::Sequential& network() const noexcept { return net_; }
    std::vector<LayerSummary> summary(int batch = 1) const;

private:
    void check_condition(const Shape& s) const;

    ModelConfig config_;
    nn::Sequential net_;
};

/// Patch discriminator over the channel concatenation (condition, image).
///
/// log2(patch_stride) stride-2 convolutions followed by a stride-1
/// convolution to one channel. The output cell (i, j) scores the input patch
/// whose top-left corner is (i * stride, j * stride). The last layer has no
/// normalization and no activation.
class Discriminator {
public:
    Discriminator(const ModelConfig& config, std::uint64_t seed);

    Tensor forward(const Tensor& condition, const Tensor& image);
    Tensor infer(const Tensor& condition, const Tensor& image) const;
    /// Returns gradients with respect to (condition, image).
    std::pair<Tensor, Tensor> backward(const Tensor& grad_scores);

    std::vector<nn::Parameter*> parameters() { return net_.parameters(); }
    std::vector<const nn::Parameter*> parameters() const { return net_.parameters(); }
    std::vector<Tensor*> buffers() { return net_.buffers(); }
    std::vector<const Tensor*> buffers() const { return net_.buffers(); }
    void zero_grad() { net_.zero_grad(); }

    const ModelConfig& config() const noexcept { return config_; }
    const nn::Sequential& network() const noexcept { return net_; }
    std::vector<LayerSummary> summary(int batch = 1) const;

private:
    Tensor join(const Tensor& condition, const Tensor& image) const;

    ModelConfig config_;
    nn::Sequential net_;
};

Generator build_generator(const ModelConfig& config, std::uint64_t seed);
Discriminator build_discriminator(const ModelConfig& config, std::uint64_t seed);

/// Condition batch -> image batch. Eval mode is bitwise deterministic.
Tensor generate(Generator& g, const Tensor& condition, Mode mode);
Tensor generate(const Generator& g, const Tensor& condition);

/// Raw patch score grid, shape (N, 1, H/stride, W/stride).
Tensor discriminate(Discriminator& d, const Tensor& condition, const Tensor& image, Mode mode);

std::size_t parameter_count(const nn::Sequential& net);
std::size_t parameter_count(const Generator& g);
std::size_t parameter_count(const Discriminator& d);

std::string format_summary(const std::string& title, const std::vector<LayerSummary>& rows);

}  // namespace echogan::networks
