#include "homeo/replay_buffer.hpp"

#include "homeo/errors.hpp"

namespace homeo {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::store(const Transition& t) {
  ++total_;
  if (data_.size() < capacity_) {
    data_.push_back(t);
    return;
  }
  data_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw ContractViolation("replay buffer index out of range");
  return data_[slot(i)];
}

std::optional<ActionVec> ReplayBuffer::successor_action(std::size_t i) const {
  const Transition& t = at(i);
  if (t.done || i + 1 >= data_.size()) return std::nullopt;
  const Transition& next = data_[slot(i + 1)];
  if (next.episode_id != t.episode_id || next.step_index != t.step_index + 1) return std::nullopt;
  return next.a;
}

std::vector<SampledTransition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  std::vector<SampledTransition> batch;
  if (n == 0 || data_.size() < n) return batch;
  batch.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto i = static_cast<std::size_t>(rng.below(data_.size()));
    batch.push_back({at(i), successor_action(i)});
  }
  return batch;
}

}  // namespace homeo
