#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "echogan/dataio/types.hpp"
#include "echogan/nn/tensor.hpp"

namespace echogan::testing {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("echogan-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

template <typename T = float>
nn::BasicTensor<T> random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                                 double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    nn::BasicTensor<T> t(shape);
    for (auto& v : t.values()) v = static_cast<T>(dist(rng));
    return t;
}

inline dataio::LabelMap random_mask(int height, int width, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> label(0, 3);
    dataio::LabelMap mask(height, width);
    for (auto& v : mask.pixels) v = static_cast<std::uint8_t>(label(rng));
    return mask;
}

/// Sum of elementwise products in double.
template <typename T>
double dot(const nn::BasicTensor<T>& a, const nn::BasicTensor<T>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

/// |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central difference of `f` with respect to element `i` of `x`.
template <typename T>
double central_difference(const std::function<double()>& f, nn::BasicTensor<T>& x, std::size_t i,
                          double step) {
    const T saved = x[i];
    x[i] = static_cast<T>(saved + step);
    const double up = f();
    x[i] = static_cast<T>(saved - step);
    const double down = f();
    x[i] = saved;
    return (up - down) / (2.0 * step);
}

}  // namespace echogan::testing
