#pragma once

#include <span>

#include "homeo/ddpg.hpp"
#include "homeo/world_models.hpp"

namespace homeo {

/// Weight of the homeostatic (familiarity) term. Zero gives plain
/// prediction-error curiosity.
class Alpha {
 public:
  explicit Alpha(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// e_f - alpha * e_k.
double ig_alpha(double forward_error, double extended_error, Alpha alpha);

struct IgBreakdown {
  double forward_error = 0.0;   // ||s' - f(s, a)||
  double extended_error = 0.0;  // ||s' - k(s, a, pi(s'))||
  double raw_ig = 0.0;
};

/// Raw reward for one transition. The successor action is always the online
/// actor's pi(s_next), never an executed (possibly random) action.
IgBreakdown compute_raw_ig(const Point& s, const ActionVec& a, const Point& s_next,
                           const Actor& actor, const ForwardModel& f,
                           const ExtendedForwardModel& k, Alpha alpha);

/// z-normalization statistics, refreshed at each episode end over every raw
/// value held in the replay buffer.
class RewardNormalizer {
 public:
  static constexpr double kSigmaFloor = 1e-8;

  double mean() const { return mean_; }
  double stddev() const { return stddev_; }
  std::size_t sample_count() const { return count_; }
  std::size_t update_count() const { return updates_; }

  /// Population mean/std. Empty input leaves the statistics unchanged;
  /// sigma below the floor is replaced by 1.
  void update(std::span<const double> values);

  double normalize(double raw) const { return (raw - mean_) / stddev_; }

 private:
  double mean_ = 0.0;
  double stddev_ = 1.0;
  std::size_t count_ = 0;
  std::size_t updates_ = 0;
};

}  // namespace homeo
