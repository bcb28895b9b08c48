#include "homeo/curiosity.hpp"

#include <cmath>

#include "homeo/errors.hpp"

namespace homeo {

Alpha::Alpha(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("alpha must be finite and >= 0");
}

double ig_alpha(double forward_error, double extended_error, Alpha alpha) {
  return forward_error - alpha.value() * extended_error;
}

IgBreakdown compute_raw_ig(const Point& s, const ActionVec& a, const Point& s_next,
                           const Actor& actor, const ForwardModel& f,
                           const ExtendedForwardModel& k, Alpha alpha) {
  const ActionVec a_next = actor.policy_action(s_next);
  IgBreakdown out;
  out.forward_error = distance(s_next, f.predict(s, a));
  out.extended_error = distance(s_next, k.predict(s, a, a_next));
  out.raw_ig = ig_alpha(out.forward_error, out.extended_error, alpha);
  if (!std::isfinite(out.raw_ig)) throw TrainingError("curiosity reward: non-finite prediction");
  return out;
}

void RewardNormalizer::update(std::span<const double> values) {
  ++updates_;
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double sigma = std::sqrt(sq / n);
  mean_ = mean;
  stddev_ = sigma < kSigmaFloor ? 1.0 : sigma;
  count_ = values.size();
}

}  // namespace homeo
