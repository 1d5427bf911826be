#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "xrisk/dxo/dataset.hpp"
#include "xrisk/errors.hpp"
#include "xrisk/random.hpp"

namespace xrisk::dxo {

struct Batch {
  std::vector<std::size_t> positives;  // indices into the dataset
  std::vector<std::size_t> negatives;
};

// Mini-batches with a fixed number of positives, round(rate * batch_size).
//
// Each class is drawn without replacement from its own shuffled order; when
// a class runs out it is reshuffled and reused, so the smaller class is
// oversampled. One epoch is enough batches to cover the larger class once.
class ControlledSampler {
 public:
  ControlledSampler(const FeatureDataset& data, std::size_t batch_size, double rate, std::uint64_t seed)
      : pos_(data.indices_of(Label::positive)), neg_(data.indices_of(Label::negative)), rng_(seed) {
    if (batch_size < 2) throw ConfigError("batch size must be at least 2");
    if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("sampling rate must lie in (0, 1)");
    if (pos_.empty()) throw DegenerateSetError("positive");
    if (neg_.empty()) throw DegenerateSetError("negative");
    pos_per_batch_ = static_cast<std::size_t>(std::llround(rate * static_cast<double>(batch_size)));
    if (pos_per_batch_ == 0 || pos_per_batch_ >= batch_size)
      throw ConfigError("sampling rate leaves a batch without one of the classes");
    neg_per_batch_ = batch_size - pos_per_batch_;
    const auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
    batches_per_epoch_ = std::max(ceil_div(pos_.size(), pos_per_batch_), ceil_div(neg_.size(), neg_per_batch_));
    rng_.shuffle(pos_);
    rng_.shuffle(neg_);
  }

  std::size_t positives_per_batch() const { return pos_per_batch_; }
  std::size_t negatives_per_batch() const { return neg_per_batch_; }
  std::size_t batches_per_epoch() const { return batches_per_epoch_; }

  Batch next() {
    Batch b;
    b.positives = draw(pos_, pos_cursor_, pos_per_batch_);
    b.negatives = draw(neg_, neg_cursor_, neg_per_batch_);
    return b;
  }

  std::vector<Batch> epoch() {
    std::vector<Batch> out;
    out.reserve(batches_per_epoch_);
    for (std::size_t k = 0; k < batches_per_epoch_; ++k) out.push_back(next());
    return out;
  }

 private:
  std::vector<std::size_t> draw(std::vector<std::size_t>& order, std::size_t& cursor, std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
      if (cursor == order.size()) {
        rng_.shuffle(order);
        cursor = 0;
      }
      out.push_back(order[cursor++]);
    }
    return out;
  }

  std::vector<std::size_t> pos_;
  std::vector<std::size_t> neg_;
  std::size_t pos_cursor_ = 0;
  std::size_t neg_cursor_ = 0;
  std::size_t pos_per_batch_ = 0;
  std::size_t neg_per_batch_ = 0;
  std::size_t batches_per_epoch_ = 0;
  Rng rng_;
};

inline ControlledSampler controlled_batches(const FeatureDataset& data, std::size_t batch_size, double rate,
                                            std::uint64_t seed) {
  return ControlledSampler(data, batch_size, rate, seed);
}

}  // namespace xrisk::dxo
