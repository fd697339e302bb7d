#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "echogan/nn/tensor.hpp"

namespace echogan::nn {

/// A learnable tensor together with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string parameter_name, Tensor initial)
        : name(std::move(parameter_name)), value(std::move(initial)), grad(value.shape()) {}
};

/// Padding and stride of a square-kernel convolution along one axis.
struct ConvGeometry {
    int kernel = 4;
    int stride = 1;
    int pad_before = 0;
    int pad_after = 0;

    int output_extent(int input) const noexcept {
        return (input + pad_before + pad_after - kernel) / stride + 1;
    }
};

/// "Same" padding: output extent is ceil(input / stride), extra padding goes after.
ConvGeometry same_geometry(int input, int kernel, int stride);

/// Unrolls one sample [C,H,W] into columns [C*k*k, Ho*Wo].
void im2col(const float* image, int channels, int height, int width, const ConvGeometry& g,
            float* columns);
/// Adjoint of im2col: accumulates columns back into a zeroed [C,H,W] image.
void col2im(const float* columns, int channels, int height, int width, const ConvGeometry& g,
            float* image);

/// Common interface of the sequential building blocks.
///
/// `forward` is the training path: it uses batch statistics and caches whatever
/// `backward` needs. `infer` is the evaluation path and never mutates the layer,
/// so a trained network can be shared between threads.
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    virtual Shape output_shape(const Shape& input) const = 0;

    virtual Tensor forward(const Tensor& input) = 0;
    virtual Tensor infer(const Tensor& input) const = 0;
    virtual Tensor backward(const Tensor& grad_output) = 0;

    virtual std::vector<Parameter*> parameters() { return {}; }
    virtual std::vector<const Parameter*> parameters() const { return {}; }
    /// Non-learnable state that must be checkpointed (running statistics).
    virtual std::vector<Tensor*> buffers() { return {}; }
    virtual std::vector<const Tensor*> buffers() const { return {}; }
};

class Conv2d final : public Layer {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, bool bias);

    std::string kind() const override { return "conv"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor infer(const Tensor& input) const override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<Parameter*> parameters() override;
    std::vector<const Parameter*> parameters() const override;

    int in_channels() const noexcept { return in_channels_; }
    int out_channels() const noexcept { return out_channels_; }
    int kernel() const noexcept { return kernel_; }
    int stride() const noexcept { return stride_; }
    bool has_bias() const noexcept { return has_bias_; }

    Parameter& weight() noexcept { return weight_; }
    Parameter& bias() noexcept { return bias_; }

private:
    void check_input(const Shape& input) const;

    int in_channels_;
    int out_channels_;
    int kernel_;
    int stride_;
    bool has_bias_;
    Parameter weight_;  // [out, in, k, k]
    Parameter bias_;    // [1, out, 1, 1]
    Tensor cached_input_;
};

/// Transposed convolution whose output is `stride` times larger than its input.
/// Realized as the adjoint of a "same"-padded convolution on the output grid.
class ConvTranspose2d final : public Layer {
public:
    ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, bool bias);

    std::string kind() const override { return "deconv"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor infer(const Tensor& input) const override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<Parameter*> parameters() override;
    std::vector<const Parameter*> parameters() const override;

    int in_channels() const noexcept { return in_channels_; }
    int out_channels() const noexcept { return out_channels_; }
    int kernel() const noexcept { return kernel_; }
    int stride() const noexcept { return stride_; }
    bool has_bias() const noexcept { return has_bias_; }

    Parameter& weight() noexcept { return weight_; }
    Parameter& bias() noexcept { return bias_; }

private:
    void check_input(const Shape& input) const;

    int in_channels_;
    int out_channels_;
    int kernel_;
    int stride_;
    bool has_bias_;
    Parameter weight_;  // [in, out, k, k]
    Parameter bias_;    // [1, out, 1, 1]
    Tensor cached_input_;
};

class BatchNorm2d final : public Layer {
public:
    explicit BatchNorm2d(int channels, float momentum = 0.1f, float epsilon = 1e-5f);

    std::string kind() const override { return "batchnorm"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor forward(const Tensor& input) override;
    Tensor infer(const Tensor& input) const override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<Parameter*> parameters() override;
    std::vector<const Parameter*> parameters() const override;
    std::vector<Tensor*> buffers() override;
    std::vector<const Tensor*> buffers() const override;

    int channels() const noexcept { return channels_; }
    const Tensor& running_mean() const noexcept { return running_mean_; }
    const Tensor& running_var() const noexcept { return running_var_; }

private:
    int channels_;
    float momentum_;
    float epsilon_;
    Parameter gamma_;
    Parameter beta_;
    Tensor running_mean_;
    Tensor running_var_;
    Tensor normalized_;            // cached x-hat
    std::vector<float> inv_std_;  // cached per channel
};

class LeakyRelu final : public Layer {
public:
    explicit LeakyRelu(float slope) : slope_(slope) {}

    std::string kind() const override { return "leaky_relu"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor forward(const Tensor& input) override;
    Tensor infer(const Tensor& input) const override;
    Tensor backward(const Tensor& grad_output) override;

    float slope() const noexcept { return slope_; }

private:
    float slope_;
    Tensor cached_input_;
};

class Sigmoid final : public Layer {
public:
    std::string kind() const override { return "sigmoid"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor forward(const Tensor& input) override;
    Tensor infer(const Tensor& input) const override;
    Tensor backward(const Tensor& grad_output) override;

private:
    Tensor cached_output_;
};

/// Ordered chain of layers.
class Sequential {
public:
    Sequential() = default;
    Sequential(Sequential&&) noexcept = default;
    Sequential& operator=(Sequential&&) noexcept = default;

    template <typename L, typename... Args>
    L& add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    Tensor forward(const Tensor& input);
    Tensor infer(const Tensor& input) const;
    Tensor backward(const Tensor& grad_output);

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    std::vector<Tensor*> buffers();
    std::vector<const Tensor*> buffers() const;
    void zero_grad();

    std::size_t size() const noexcept { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Draws every weight from N(0, stddev); biases and shifts are zeroed and
/// normalization scales set to one.
void initialize_parameters(Sequential& net, std::uint64_t seed, float stddev = 0.02f);

}  // namespace echogan::nn
