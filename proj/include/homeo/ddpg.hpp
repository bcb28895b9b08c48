#pragma once

#include <span>
#include <string>

#include "homeo/dense_net.hpp"
#include "homeo/geometry.hpp"

namespace homeo {

/// Deterministic policy: [2, 64, 64, 2] relu/tanh net, output scaled to the
/// +-10 box and then magnitude-clamped to the step limit.
class Actor {
 public:
  Actor() = default;
  explicit Actor(DenseNet net);
  static Actor create(Rng& rng);

  ActionVec policy_action(const Point& s) const;

  static Eigen::VectorXd encode(const Point& s);

  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }

 private:
  DenseNet net_;
};

/// Q(s, a) over the encoded (s, a) 4-vector; [4, 64, 64, 1] relu/linear.
class Critic {
 public:
  Critic() = default;
  explicit Critic(DenseNet net);
  static Critic create(Rng& rng);

  double value(const Point& s, const ActionVec& a) const;
  static Eigen::VectorXd encode(const Point& s, const ActionVec& a);

  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }

 private:
  DenseNet net_;
};

struct DdpgConfig {
  double gamma = 1.0;
  double tau = 0.001;
  AdamConfig actor_optimizer{1e-4};
  AdamConfig critic_optimizer{1e-3};
};

/// One critic training sample with its reward already normalized.
struct CriticSample {
  Point s;
  ActionVec a;
  double reward = 0.0;
  Point s_next;
  bool done = false;
};

struct ActResult {
  ActionVec action;
  bool was_random = false;
};

class DdpgAgent {
 public:
  DdpgAgent(DdpgConfig config, Rng& init_rng);
  /// Builds an agent around existing networks; targets start as copies.
  DdpgAgent(DdpgConfig config, Actor actor, Critic critic);

  ActionVec policy_action(const Point& s) const { return actor_.policy_action(s); }

  /// With probability epsilon a uniform action on the radius-10 disc,
  /// otherwise the policy action. Always consumes one Bernoulli draw first.
  ActResult act(const Point& s, double epsilon, Rng& rng) const;

  /// TD regression toward r + gamma (1 - done) Q'(s', pi'(s')). Returns the
  /// loss before the update.
  double critic_update(std::span<const CriticSample> batch);

  /// Gradient ascent on mean Q(s, pi(s)). Returns the objective before the update.
  double actor_update(std::span<const Point> states);

  void sync_targets() { sync_targets(config_.tau); }
  void sync_targets(double tau);

  const Actor& actor() const { return actor_; }
  Actor& actor() { return actor_; }
  const Critic& critic() const { return critic_; }
  Critic& critic() { return critic_; }
  const Actor& actor_target() const { return actor_target_; }
  Actor& actor_target() { return actor_target_; }
  const Critic& critic_target() const { return critic_target_; }
  Critic& critic_target() { return critic_target_; }
  const DdpgConfig& config() const { return config_; }

  /// Writes actor.ckpt, critic.ckpt, actor_target.ckpt, critic_target.ckpt.
  void save(const std::string& dir) const;

 private:
  DdpgConfig config_;
  Actor actor_;
  Critic critic_;
  Actor actor_target_;
  Critic critic_target_;
  AdamState actor_adam_;
  AdamState critic_adam_;
};

}  // namespace homeo
