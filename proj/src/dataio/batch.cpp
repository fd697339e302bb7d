#include "echogan/dataio/batch.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "echogan/dataio/preprocess.hpp"

namespace echogan::dataio {

BatchIterator::BatchIterator(const std::vector<StudyRecord>& records, const ConditionSpec& spec,
                             int batch_size, std::uint64_t seed)
    : batch_size_(batch_size), seed_(seed) {
    if (batch_size < 1) throw InvalidConfig("batch size must be at least 1");
    if (records.empty()) throw EmptyDataset("no records to iterate");
    if (records.size() < static_cast<std::size_t>(batch_size)) {
        throw EmptyDataset(std::to_string(records.size()) +
                           " records cannot fill a single batch of " + std::to_string(batch_size));
    }
    height_ = records.front().image.height;
    width_ = records.front().image.width;
    for (const StudyRecord& r : records) {
        if (r.image.height != height_ || r.image.width != width_ || r.mask.height != height_ ||
            r.mask.width != width_) {
            throw InvalidDimensions("record " + r.patient_id + " differs in size from the batch");
        }
        ids_.push_back(r.patient_id);
        const LabelMap filtered = filter_condition(r.mask, spec);
        conditions_.emplace_back(filtered.pixels.begin(), filtered.pixels.end());
        images_.push_back(r.image.pixels);
    }
    batches_per_epoch_ = static_cast<std::int64_t>(records.size()) / batch_size;
}

std::vector<std::size_t> BatchIterator::epoch_order(std::int64_t epoch) const {
    std::vector<std::size_t> order(ids_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto e = static_cast<std::uint64_t>(epoch);
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(e >> 32)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

void BatchIterator::seek(std::int64_t batch_index) {
    if (batch_index < 0) throw InvalidConfig("negative batch index");
    position_ = batch_index;
}

Batch BatchIterator::next() {
    const std::int64_t epoch = position_ / batches_per_epoch_;
    const std::int64_t slot = position_ % batches_per_epoch_;
    if (epoch != cached_epoch_) {
        order_ = epoch_order(epoch);
        cached_epoch_ = epoch;
    }
    ++position_;

    const nn::Shape shape{batch_size_, 1, height_, width_};
    Batch batch{nn::Tensor(shape), nn::Tensor(shape), {}};
    for (int i = 0; i < batch_size_; ++i) {
        const std::size_t k = order_[static_cast<std::size_t>(slot * batch_size_ + i)];
        std::copy(conditions_[k].begin(), conditions_[k].end(), batch.condition.sample(i));
        std::copy(images_[k].begin(), images_[k].end(), batch.image.sample(i));
        batch.ids.push_back(ids_[k]);
    }
    return batch;
}

}  // namespace echogan::dataio
