#include "echogan/nn/adam.hpp"

#include <cmath>

namespace echogan::nn {

Adam::Adam(AdamOptions options, std::span<Parameter* const> params) : options_(options) {
    first_.reserve(params.size());
    second_.reserve(params.size());
    for (const Parameter* p : params) {
        first_.emplace_back(p->value.shape());
        second_.emplace_back(p->value.shape());
    }
}

void Adam::step(std::span<Parameter* const> params) {
    if (params.size() != first_.size()) {
        throw ShapeError("optimizer was built for " + std::to_string(first_.size()) +
                         " parameters, got " + std::to_string(params.size()));
    }
    ++steps_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    const float step_size = static_cast<float>(options_.learning_rate / correction1);
    const float root_correction2 = static_cast<float>(std::sqrt(correction2));
    const float eps = static_cast<float>(options_.epsilon);
    const float fb1 = static_cast<float>(b1);
    const float fb2 = static_cast<float>(b2);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (p.value.shape() != first_[k].shape()) {
            throw ShapeError("optimizer state shape mismatch for parameter " + p.name);
        }
        auto value = p.value.values();
        const auto grad = p.grad.values();
        auto m = first_[k].values();
        auto v = second_[k].values();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const float g = grad[i];
            m[i] = fb1 * m[i] + (1.0f - fb1) * g;
            v[i] = fb2 * v[i] + (1.0f - fb2) * g * g;
            value[i] -= step_size * m[i] / (std::sqrt(v[i]) / root_correction2 + eps);
        }
    }
}

}  // namespace echogan::nn
