#include "echogan/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace echogan::nn {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Tensor make_weight(int a, int b, int kernel) {
    return Tensor(Shape{a, b, kernel, kernel});
}

Tensor make_channel_vector(int channels, float fill = 0.0f) {
    return Tensor(Shape{1, channels, 1, 1}, fill);
}

void add_bias(Tensor& out, const Tensor& bias) {
    const Shape& s = out.shape();
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            float* p = out.plane(n, c);
            const float b = bias[c];
            for (std::size_t i = 0; i < s.plane_size(); ++i) p[i] += b;
        }
    }
}

void accumulate_bias_grad(const Tensor& grad_output, Tensor& bias_grad) {
    const Shape& s = grad_output.shape();
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const float* p = grad_output.plane(n, c);
            double sum = 0.0;
            for (std::size_t i = 0; i < s.plane_size(); ++i) sum += p[i];
            bias_grad[c] += static_cast<float>(sum);
        }
    }
}

}  // namespace

ConvGeometry same_geometry(int input, int kernel, int stride) {
    const int output = (input + stride - 1) / stride;
    const int total = std::max((output - 1) * stride + kernel - input, 0);
    return ConvGeometry{kernel, stride, total / 2, total - total / 2};
}

void im2col(const float* image, int channels, int height, int width, const ConvGeometry& g,
            float* columns) {
    const int out_h = g.output_extent(height);
    const int out_w = g.output_extent(width);
    const std::size_t row_len = static_cast<std::size_t>(out_h) * out_w;
    for (int c = 0; c < channels; ++c) {
        const float* plane = image + static_cast<std::size_t>(c) * height * width;
        for (int kh = 0; kh < g.kernel; ++kh) {
            for (int kw = 0; kw < g.kernel; ++kw) {
                float* row = columns + ((static_cast<std::size_t>(c) * g.kernel + kh) * g.kernel + kw) * row_len;
                for (int oh = 0; oh < out_h; ++oh) {
                    const int ih = oh * g.stride - g.pad_before + kh;
                    float* dst = row + static_cast<std::size_t>(oh) * out_w;
                    if (ih < 0 || ih >= height) {
                        std::fill_n(dst, out_w, 0.0f);
                        continue;
                    }
                    const float* src = plane + static_cast<std::size_t>(ih) * width;
                    for (int ow = 0; ow < out_w; ++ow) {
                        const int iw = ow * g.stride - g.pad_before + kw;
                        dst[ow] = (iw >= 0 && iw < width) ? src[iw] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im(const float* columns, int channels, int height, int width, const ConvGeometry& g,
            float* image) {
    const int out_h = g.output_extent(height);
    const int out_w = g.output_extent(width);
    const std::size_t row_len = static_cast<std::size_t>(out_h) * out_w;
    for (int c = 0; c < channels; ++c) {
        float* plane = image + static_cast<std::size_t>(c) * height * width;
        for (int kh = 0; kh < g.kernel; ++kh) {
            for (int kw = 0; kw < g.kernel; ++kw) {
                const float* row = columns + ((static_cast<std::size_t>(c) * g.kernel + kh) * g.kernel + kw) * row_len;
                for (int oh = 0; oh < out_h; ++oh) {
                    const int ih = oh * g.stride - g.pad_before + kh;
                    if (ih < 0 || ih >= height) continue;
                    const float* src = row + static_cast<std::size_t>(oh) * out_w;
                    float* dst = plane + static_cast<std::size_t>(ih) * width;
                    for (int ow = 0; ow < out_w; ++ow) {
                        const int iw = ow * g.stride - g.pad_before + kw;
                        if (iw >= 0 && iw < width) dst[iw] += src[ow];
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, bool bias)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      has_bias_(bias),
      weight_("weight", make_weight(out_channels, in_channels, kernel)),
      bias_("bias", make_channel_vector(bias ? out_channels : 0)) {}

void Conv2d::check_input(const Shape& input) const {
    if (input.c != in_channels_) {
        throw ShapeError("conv expects " + std::to_string(in_channels_) + " channels, got " +
                         input.to_string());
    }
}

Shape Conv2d::output_shape(const Shape& input) const {
    check_input(input);
    const ConvGeometry gh = same_geometry(input.h, kernel_, stride_);
    const ConvGeometry gw = same_geometry(input.w, kernel_, stride_);
    return Shape{input.n, out_channels_, gh.output_extent(input.h), gw.output_extent(input.w)};
}

Tensor Conv2d::infer(const Tensor& input) const {
    const Shape& in = input.shape();
    const Shape out_shape = output_shape(in);
    if (in.h != in.w) throw ShapeError("conv expects square inputs, got " + in.to_string());
    const ConvGeometry g = same_geometry(in.h, kernel_, stride_);
    const int patch = in_channels_ * kernel_ * kernel_;
    const int pixels = static_cast<int>(out_shape.plane_size());

    Tensor out(out_shape);
    std::vector<float> columns(static_cast<std::size_t>(patch) * pixels);
    ConstMatrixMap w(weight_.value.data(), out_channels_, patch);
    ConstMatrixMap col(columns.data(), patch, pixels);
    for (int n = 0; n < in.n; ++n) {
        im2col(input.sample(n), in.c, in.h, in.w, g, columns.data());
        MatrixMap y(out.sample(n), out_channels_, pixels);
        y.noalias() = w * col;
    }
    if (has_bias_) add_bias(out, bias_.value);
    return out;
}

Tensor Conv2d::forward(const Tensor& input) {
    cached_input_ = input;
    return infer(input);
}

Tensor Conv2d::backward(const Tensor& grad_output) {
    const Shape& in = cached_input_.shape();
    if (grad_output.shape() != output_shape(in)) {
        throw ShapeError("conv backward got gradient " + grad_output.shape().to_string());
    }
    const ConvGeometry g = same_geometry(in.h, kernel_, stride_);
    const int patch = in_channels_ * kernel_ * kernel_;
    const int pixels = static_cast<int>(grad_output.shape().plane_size());

    Tensor grad_input(in);
    std::vector<float> columns(static_cast<std::size_t>(patch) * pixels);
    ConstMatrixMap w(weight_.value.data(), out_channels_, patch);
    MatrixMap dw(weight_.grad.data(), out_channels_, patch);
    MatrixMap col(columns.data(), patch, pixels);
    for (int n = 0; n < in.n; ++n) {
        ConstMatrixMap dy(grad_output.sample(n), out_channels_, pixels);
        im2col(cached_input_.sample(n), in.c, in.h, in.w, g, columns.data());
        dw.noalias() += dy * col.transpose();
        col.noalias() = w.transpose() * dy;
        col2im(columns.data(), in.c, in.h, in.w, g, grad_input.sample(n));
    }
    if (has_bias_) accumulate_bias_grad(grad_output, bias_.grad);
    return grad_input;
}

std::vector<Parameter*> Conv2d::parameters() {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

std::vector<const Parameter*> Conv2d::parameters() const {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride,
                                 bool bias)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      has_bias_(bias),
      weight_("weight", make_weight(in_channels, out_channels, kernel)),
      bias_("bias", make_channel_vector(bias ? out_channels : 0)) {}

void ConvTranspose2d::check_input(const Shape& input) const {
    if (input.c != in_channels_) {
        throw ShapeError("deconv expects " + std::to_string(in_channels_) + " channels, got " +
                         input.to_string());
    }
    if (input.h != input.w) throw ShapeError("deconv expects square inputs, got " + input.to_string());
}

Shape ConvTranspose2d::output_shape(const Shape& input) const {
    check_input(input);
    return Shape{input.n, out_channels_, input.h * stride_, input.w * stride_};
}

Tensor ConvTranspose2d::infer(const Tensor& input) const {
    const Shape& in = input.shape();
    const Shape out_shape = output_shape(in);
    const ConvGeometry g = same_geometry(out_shape.h, kernel_, stride_);
    const int patch = out_channels_ * kernel_ * kernel_;
    const int pixels = static_cast<int>(in.plane_size());

    Tensor out(out_shape);
    std::vector<float> columns(static_cast<std::size_t>(patch) * pixels);
    ConstMatrixMap w(weight_.value.data(), in_channels_, patch);
    MatrixMap col(columns.data(), patch, pixels);
    for (int n = 0; n < in.n; ++n) {
        ConstMatrixMap x(input.sample(n), in_channels_, pixels);
        col.noalias() = w.transpose() * x;
        col2im(columns.data(), out_channels_, out_shape.h, out_shape.w, g, out.sample(n));
    }
    if (has_bias_) add_bias(out, bias_.value);
    return out;
}

Tensor ConvTranspose2d::forward(const Tensor& input) {
    cached_input_ = input;
    return infer(input);
}

Tensor ConvTranspose2d::backward(const Tensor& grad_output) {
    const Shape& in = cached_input_.shape();
    const Shape out_shape = output_shape(in);
    if (grad_output.shape() != out_shape) {
        throw ShapeError("deconv backward got gradient " + grad_output.shape().to_string());
    }
    const ConvGeometry g = same_geometry(out_shape.h, kernel_, stride_);
    const int patch = out_channels_ * kernel_ * kernel_;
    const int pixels = static_cast<int>(in.plane_size());

    Tensor grad_input(in);
    std::vector<float> columns(static_cast<std::size_t>(patch) * pixels);
    ConstMatrixMap w(weight_.value.data(), in_channels_, patch);
    MatrixMap dw(weight_.grad.data(), in_channels_, patch);
    ConstMatrixMap col(columns.data(), patch, pixels);
    for (int n = 0; n < in.n; ++n) {
        im2col(grad_output.sample(n), out_channels_, out_shape.h, out_shape.w, g, columns.data());
        ConstMatrixMap x(cached_input_.sample(n), in_channels_, pixels);
        MatrixMap dx(grad_input.sample(n), in_channels_, pixels);
        dx.noalias() = w * col;
        dw.noalias() += x * col.transpose();
    }
    if (has_bias_) accumulate_bias_grad(grad_output, bias_.grad);
    return grad_input;
}

std::vector<Parameter*> ConvTranspose2d::parameters() {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

std::vector<const Parameter*> ConvTranspose2d::parameters() const {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, float momentum, float epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_("gamma", make_channel_vector(channels, 1.0f)),
      beta_("beta", make_channel_vector(channels)),
      running_mean_(make_channel_vector(channels)),
      running_var_(make_channel_vector(channels, 1.0f)) {}

Tensor BatchNorm2d::forward(const Tensor& input) {
    const Shape& s = input.shape();
    if (s.c != channels_) throw ShapeError("batchnorm channel mismatch: " + s.to_string());
    const std::size_t plane = s.plane_size();
    const double count = static_cast<double>(s.n) * plane;

    Tensor out(s);
    normalized_ = Tensor(s);
    inv_std_.assign(channels_, 0.0f);
    for (int c = 0; c < channels_; ++c) {
        double sum = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const float* p = input.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) sum += p[i];
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const float* p = input.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = p[i] - mean;
                sq += d * d;
            }
        }
        const double var = sq / count;
        const float inv_std = static_cast<float>(1.0 / std::sqrt(var + epsilon_));
        inv_std_[c] = inv_std;

        const float g = gamma_.value[c];
        const float b = beta_.value[c];
        const float m = static_cast<float>(mean);
        for (int n = 0; n < s.n; ++n) {
            const float* p = input.plane(n, c);
            float* xhat = normalized_.plane(n, c);
            float* y = out.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                xhat[i] = (p[i] - m) * inv_std;
                y[i] = g * xhat[i] + b;
            }
        }

        const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
        running_mean_[c] = static_cast<float>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
        running_var_[c] = static_cast<float>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    }
    return out;
}

Tensor BatchNorm2d::infer(const Tensor& input) const {
    const Shape& s = input.shape();
    if (s.c != channels_) throw ShapeError("batchnorm channel mismatch: " + s.to_string());
    Tensor out(s);
    for (int c = 0; c < channels_; ++c) {
        const float scale = gamma_.value[c] / std::sqrt(running_var_[c] + epsilon_);
        const float shift = beta_.value[c] - running_mean_[c] * scale;
        for (int n = 0; n < s.n; ++n) {
            const float* p = input.plane(n, c);
            float* y = out.plane(n, c);
            for (std::size_t i = 0; i < s.plane_size(); ++i) y[i] = p[i] * scale + shift;
        }
    }
    return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_output) {
    const Shape& s = normalized_.shape();
    if (grad_output.shape() != s) {
        throw ShapeError("batchnorm backward got gradient " + grad_output.shape().to_string());
    }
    const std::size_t plane = s.plane_size();
    const double count = static_cast<double>(s.n) * plane;

    Tensor grad_input(s);
    for (int c = 0; c < channels_; ++c) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const float* dy = grad_output.plane(n, c);
            const float* xhat = normalized_.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += dy[i];
                sum_dy_xhat += static_cast<double>(dy[i]) * xhat[i];
            }
        }
        gamma_.grad[c] += static_cast<float>(sum_dy_xhat);
        beta_.grad[c] += static_cast<float>(sum_dy);

        const float scale = static_cast<float>(gamma_.value[c] * inv_std_[c] / count);
        const float mean_dy = static_cast<float>(sum_dy);
        const float mean_dy_xhat = static_cast<float>(sum_dy_xhat);
        const float m = static_cast<float>(count);
        for (int n = 0; n < s.n; ++n) {
            const float* dy = grad_output.plane(n, c);
            const float* xhat = normalized_.plane(n, c);
            float* dx = grad_input.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                dx[i] = scale * (m * dy[i] - mean_dy - xhat[i] * mean_dy_xhat);
            }
        }
    }
    return grad_input;
}

std::vector<Parameter*> BatchNorm2d::parameters() { return {&gamma_, &beta_}; }
std::vector<const Parameter*> BatchNorm2d::parameters() const { return {&gamma_, &beta_}; }
std::vector<Tensor*> BatchNorm2d::buffers() { return {&running_mean_, &running_var_}; }
std::vector<const Tensor*> BatchNorm2d::buffers() const { return {&running_mean_, &running_var_}; }

// ----------------------------------------------------------- activations

Tensor LeakyRelu::infer(const Tensor& input) const {
    Tensor out(input.shape());
    const auto x = input.values();
    auto y = out.values();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : slope_ * x[i];
    return out;
}

Tensor LeakyRelu::forward(const Tensor& input) {
    cached_input_ = input;
    return infer(input);
}

Tensor LeakyRelu::backward(const Tensor& grad_output) {
    if (grad_output.shape() != cached_input_.shape()) {
        throw ShapeError("leaky relu backward shape mismatch");
    }
    Tensor grad_input(grad_output.shape());
    const auto x = cached_input_.values();
    const auto dy = grad_output.values();
    auto dx = grad_input.values();
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0f ? dy[i] : slope_ * dy[i];
    return grad_input;
}

Tensor Sigmoid::infer(const Tensor& input) const {
    Tensor out(input.shape());
    const auto x = input.values();
    auto y = out.values();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
    return out;
}

Tensor Sigmoid::forward(const Tensor& input) {
    cached_output_ = infer(input);
    return cached_output_;
}

Tensor Sigmoid::backward(const Tensor& grad_output) {
    if (grad_output.shape() != cached_output_.shape()) {
        throw ShapeError("sigmoid backward shape mismatch");
    }
    Tensor grad_input(grad_output.shape());
    const auto y = cached_output_.values();
    const auto dy = grad_output.values();
    auto dx = grad_input.values();
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (1.0f - y[i]);
    return grad_input;
}

// ------------------------------------------------------------ Sequential

Tensor Sequential::forward(const Tensor& input) {
    Tensor x = input;
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
}

Tensor Sequential::infer(const Tensor& input) const {
    Tensor x = input;
    for (const auto& layer : layers_) x = layer->infer(x);
    return x;
}

Tensor Sequential::backward(const Tensor& grad_output) {
    Tensor g = grad_output;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Parameter*> Sequential::parameters() {
    std::vector<Parameter*> out;
    for (auto& layer : layers_) {
        for (Parameter* p : layer->parameters()) out.push_back(p);
    }
    return out;
}

std::vector<const Parameter*> Sequential::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto& layer : layers_) {
        const Layer& l = *layer;
        for (const Parameter* p : l.parameters()) out.push_back(p);
    }
    return out;
}

std::vector<Tensor*> Sequential::buffers() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        for (Tensor* b : layer->buffers()) out.push_back(b);
    }
    return out;
}

std::vector<const Tensor*> Sequential::buffers() const {
    std::vector<const Tensor*> out;
    for (const auto& layer : layers_) {
        const Layer& l = *layer;
        for (const Tensor* b : l.buffers()) out.push_back(b);
    }
    return out;
}

void Sequential::zero_grad() {
    for (Parameter* p : parameters()) p->grad.fill(0.0f);
}

void initialize_parameters(Sequential& net, std::uint64_t seed, float stddev) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, stddev);
    for (Parameter* p : net.parameters()) {
        if (p->name == "weight") {
            for (float& v : p->value.values()) v = normal(rng);
        } else if (p->name == "gamma") {
            p->value.fill(1.0f);
        } else {
            p->value.fill(0.0f);
        }
        p->grad.fill(0.0f);
    }
}

}  // namespace echogan::nn
