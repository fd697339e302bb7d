#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echogan/dataio/types.hpp"
#include "echogan/nn/tensor.hpp"

namespace echogan::dataio {

struct Batch {
    nn::Tensor condition;  // (N,1,H,W) raw label values
    nn::Tensor image;      // (N,1,H,W) intensities in [0,1]
    std::vector<std::string> ids;
};

/// Endless, epoch-cycling stream of shuffled (condition, image) batches.
///
/// Each epoch is a fresh seeded permutation; the trailing partial batch is
/// dropped. The order is a pure function of (seed, batch index), so `seek`
/// restores the exact stream position after a checkpoint resume.
class BatchIterator {
public:
    BatchIterator(const std::vector<StudyRecord>& records, const ConditionSpec& spec,
                  int batch_size, std::uint64_t seed);

    Batch next();

    std::int64_t batches_per_epoch() const noexcept { return batches_per_epoch_; }
    std::int64_t position() const noexcept { return position_; }
    void seek(std::int64_t batch_index);
    int batch_size() const noexcept { return batch_size_; }

    std::vector<std::size_t> epoch_order(std::int64_t epoch) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::vector<float>> conditions_;
    std::vector<std::vector<float>> images_;
    int height_ = 0;
    int width_ = 0;
    int batch_size_;
    std::uint64_t seed_;
    std::int64_t batches_per_epoch_ = 0;
    std::int64_t position_ = 0;
    std::int64_t cached_epoch_ = -1;
    std::vector<std::size_t> order_;
};

}  // namespace echogan::dataio
