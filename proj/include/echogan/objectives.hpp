#pragma once

#include <cmath>
#include <concepts>
#include <string>

#include "echogan/nn/tensor.hpp"

namespace echogan::objectives {

using nn::BasicTensor;

inline constexpr double kDefaultAdversarialWeight = 0.01;

/// Per-iteration record of every loss term.
struct LossReport {
    double d_loss = 0.0;
    double g_adversarial = 0.0;
    double g_reconstruction = 0.0;
    double g_total = 0.0;
    double lambda = kDefaultAdversarialWeight;

    bool operator==(const LossReport&) const = default;
};

template <std::floating_point T>
struct DiscriminatorLoss {
    T value{};
    BasicTensor<T> grad_real;
    BasicTensor<T> grad_fake;
};

template <std::floating_point T>
struct LossWithGrad {
    T value{};
    BasicTensor<T> grad;
};

namespace detail {

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape " + a.shape().to_string() + " vs " +
                         b.shape().to_string());
    }
}

template <typename T>
void require_nonempty(const BasicTensor<T>& a, const char* what) {
    if (a.empty()) throw EmptyInput(std::string(what) + ": empty input");
}

}  // namespace detail

/// Least-squares discriminator criterion:
/// mean((1 - real)^2) + mean(fake^2). Minimized by the discriminator.
template <std::floating_point T>
DiscriminatorLoss<T> d_loss_with_grad(const BasicTensor<T>& real_scores,
                                      const BasicTensor<T>& fake_scores) {
    detail::require_same_shape(real_scores, fake_scores, "d_loss");
    detail::require_nonempty(real_scores, "d_loss");
    const std::size_t count = real_scores.size();
    const double inv = 1.0 / static_cast<double>(count);

    DiscriminatorLoss<T> out{T{}, BasicTensor<T>(real_scores.shape()),
                             BasicTensor<T>(fake_scores.shape())};
    double real_sum = 0.0;
    double fake_sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = 1.0 - static_cast<double>(real_scores[i]);
        const double f = static_cast<double>(fake_scores[i]);
        real_sum += r * r;
        fake_sum += f * f;
        out.grad_real[i] = static_cast<T>(-2.0 * r * inv);
        out.grad_fake[i] = static_cast<T>(2.0 * f * inv);
    }
    out.value = static_cast<T>(real_sum * inv + fake_sum * inv);
    return out;
}

template <std::floating_point T>
T d_loss(const BasicTensor<T>& real_scores, const BasicTensor<T>& fake_scores) {
    return d_loss_with_grad(real_scores, fake_scores).value;
}

/// Generator's least-squares adversarial term: mean((1 - fake)^2).
template <std::floating_point T>
LossWithGrad<T> g_adv_loss_with_grad(const BasicTensor<T>& fake_scores) {
    detail::require_nonempty(fake_scores, "g_adv_loss");
    const std::size_t count = fake_scores.size();
    const double inv = 1.0 / static_cast<double>(count);

    LossWithGrad<T> out{T{}, BasicTensor<T>(fake_scores.shape())};
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = 1.0 - static_cast<double>(fake_scores[i]);
        sum += r * r;
        out.grad[i] = static_cast<T>(-2.0 * r * inv);
    }
    out.value = static_cast<T>(sum * inv);
    return out;
}

template <std::floating_point T>
T g_adv_loss(const BasicTensor<T>& fake_scores) {
    return g_adv_loss_with_grad(fake_scores).value;
}

/// Pixel-wise mean absolute error. The gradient is taken with respect to
/// `generated`; at exact ties the subgradient 0 is used.
template <std::floating_point T>
LossWithGrad<T> recon_loss_with_grad(const BasicTensor<T>& target,
                                     const BasicTensor<T>& generated) {
    detail::require_same_shape(target, generated, "recon_loss");
    detail::require_nonempty(target, "recon_loss");
    const std::size_t count = target.size();
    const double inv = 1.0 / static_cast<double>(count);

    LossWithGrad<T> out{T{}, BasicTensor<T>(target.shape())};
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = static_cast<double>(generated[i]) - static_cast<double>(target[i]);
        sum += std::abs(d);
        out.grad[i] = static_cast<T>(d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0));
    }
    out.value = static_cast<T>(sum * inv);
    return out;
}

template <std::floating_point T>
T recon_loss(const BasicTensor<T>& target, const BasicTensor<T>& generated) {
    return recon_loss_with_grad(target, generated).value;
}

/// lambda * adversarial + reconstruction.
inline double g_total_loss(double adversarial, double reconstruction,
                           double lambda = kDefaultAdversarialWeight) {
    if (!(lambda >= 0.0)) {
        throw InvalidConfig("adversarial weight must be non-negative, got " +
                            std::to_string(lambda));
    }
    return lambda * adversarial + reconstruction;
}

}  // namespace echogan::objectives
