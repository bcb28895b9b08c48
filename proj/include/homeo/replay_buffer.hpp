#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "homeo/geometry.hpp"
#include "homeo/rng.hpp"

namespace homeo {

struct Transition {
  Point s;
  ActionVec a;
  Point s_next;
  /// Unnormalized IG_alpha (or any raw reward) frozen at collection time.
  double raw_ig = 0.0;
  bool done = false;
  std::int64_t episode_id = 0;
  int step_index = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct SampledTransition {
  Transition transition;
  /// Action actually taken from s_next, when the same episode continued.
  std::optional<ActionVec> next_action;
};

/// Fixed-capacity FIFO ring of transitions. Insertion order is preserved, so a
/// transition's successor (same episode, next step) is the next slot.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void store(const Transition& t);

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Total transitions ever stored, including evicted ones.
  std::uint64_t total_stored() const { return total_; }

  /// i-th oldest retained transition.
  const Transition& at(std::size_t i) const;
  std::optional<ActionVec> successor_action(std::size_t i) const;

  /// n uniform draws with replacement; empty when size() < n.
  std::vector<SampledTransition> sample(std::size_t n, Rng& rng) const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < data_.size(); ++i) fn(at(i));
  }

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // slot of the oldest retained transition
  std::uint64_t total_ = 0;
};

}  // namespace homeo
