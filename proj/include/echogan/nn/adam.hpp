#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "echogan/nn/layers.hpp"

namespace echogan::nn {

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are indexed by parameter order,
/// so the optimizer holds no pointers into the model it updates.
class Adam {
public:
    Adam() = default;
    Adam(AdamOptions options, std::span<Parameter* const> params);

    void step(std::span<Parameter* const> params);

    const AdamOptions& options() const noexcept { return options_; }
    std::int64_t steps() const noexcept { return steps_; }

    // Exposed for checkpointing.
    std::vector<Tensor>& first_moments() noexcept { return first_; }
    std::vector<Tensor>& second_moments() noexcept { return second_; }
    const std::vector<Tensor>& first_moments() const noexcept { return first_; }
    const std::vector<Tensor>& second_moments() const noexcept { return second_; }
    void set_steps(std::int64_t steps) noexcept { steps_ = steps; }

private:
    AdamOptions options_{};
    std::int64_t steps_ = 0;
    std::vector<Tensor> first_;
    std::vector<Tensor> second_;
};

}  // namespace echogan::nn
