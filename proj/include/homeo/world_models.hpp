#pragma once

#include <span>

#include "homeo/dense_net.hpp"
#include "homeo/geometry.hpp"

namespace homeo {

// Network-side encoding of arena quantities: positions map to [-1, 1] via
// x/20 - 1, actions are divided by the maximum step length.
inline double encode_coord(double v) { return v / (kArenaSize / 2.0) - 1.0; }
inline double decode_coord(double v) { return (v + 1.0) * (kArenaSize / 2.0); }
inline double encode_action(double v) { return v / kMaxStepLength; }

/// One supervised sample for either world model. `next_action` is only read by
/// the extended model.
struct ModelSample {
  Point s;
  ActionVec a;
  ActionVec next_action;
  Point s_next;
};

/// f(s, a) -> predicted next state, absolute position.
class ForwardModel {
 public:
  static constexpr int kInputWidth = 4;

  ForwardModel() = default;
  ForwardModel(DenseNet net, AdamConfig optimizer);
  static ForwardModel create(Rng& rng, AdamConfig optimizer = {});

  /// Arena-unit prediction; never clipped to the arena.
  Point predict(const Point& s, const ActionVec& a) const;

  /// One optimizer step on per-coordinate MSE in normalized space.
  /// Returns the loss before the update.
  double train_step(std::span<const ModelSample> batch);

  static Eigen::VectorXd encode(const Point& s, const ActionVec& a);

  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }
  AdamState& optimizer() { return adam_; }

 private:
  DenseNet net_;
  AdamState adam_;
};

/// k(s, a, a') -> predicted next state, conditioned on the action taken there.
class ExtendedForwardModel {
 public:
  static constexpr int kInputWidth = 6;

  ExtendedForwardModel() = default;
  ExtendedForwardModel(DenseNet net, AdamConfig optimizer);
  static ExtendedForwardModel create(Rng& rng, AdamConfig optimizer = {});

  Point predict(const Point& s, const ActionVec& a, const ActionVec& a_next) const;
  double train_step(std::span<const ModelSample> batch);

  static Eigen::VectorXd encode(const Point& s, const ActionVec& a, const ActionVec& a_next);

  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }
  AdamState& optimizer() { return adam_; }

 private:
  DenseNet net_;
  AdamState adam_;
};

/// Shared MSE regression step: inputs (width x n), targets in normalized
/// coordinates (2 x n). Returns the pre-update loss.
double regression_step(DenseNet& net, AdamState& adam, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, const char* who);

}  // namespace homeo
