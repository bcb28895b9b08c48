#include "homeo/ddpg.hpp"

#include <cmath>
#include <filesystem>

#include "homeo/errors.hpp"
#include "homeo/world_models.hpp"

namespace homeo {

namespace {

constexpr int kHidden = 64;

ActionVec action_from_output(double y0, double y1) {
  return clamp_action(kMaxStepLength * y0, kMaxStepLength * y1);
}

}  // namespace

Actor::Actor(DenseNet net) : net_(std::move(net)) {
  if (net_.input_size() != 2 || net_.output_size() != 2) {
    throw ContractViolation("actor needs a 2 -> 2 network");
  }
}

Actor Actor::create(Rng& rng) {
  return Actor(DenseNet::init({2, kHidden, kHidden, 2}, Activation::Relu, Activation::Tanh, rng));
}

Eigen::VectorXd Actor::encode(const Point& s) {
  Eigen::VectorXd v(2);
  v << encode_coord(s.x), encode_coord(s.y);
  return v;
}

ActionVec Actor::policy_action(const Point& s) const {
  const Eigen::VectorXd y = net_.predict(encode(s));
  return action_from_output(y(0), y(1));
}

Critic::Critic(DenseNet net) : net_(std::move(net)) {
  if (net_.input_size() != 4 || net_.output_size() != 1) {
    throw ContractViolation("critic needs a 4 -> 1 network");
  }
}

Critic Critic::create(Rng& rng) {
  return Critic(
      DenseNet::init({4, kHidden, kHidden, 1}, Activation::Relu, Activation::Linear, rng));
}

Eigen::VectorXd Critic::encode(const Point& s, const ActionVec& a) {
  return ForwardModel::encode(s, a);
}

double Critic::value(const Point& s, const ActionVec& a) const {
  return net_.predict(encode(s, a))(0);
}

DdpgAgent::DdpgAgent(DdpgConfig config, Rng& init_rng)
    : DdpgAgent(config, Actor::create(init_rng), Critic::create(init_rng)) {}

DdpgAgent::DdpgAgent(DdpgConfig config, Actor actor, Critic critic)
    : config_(config),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      actor_target_(actor_),
      critic_target_(critic_),
      actor_adam_(AdamState::for_net(actor_.net(), config.actor_optimizer)),
      critic_adam_(AdamState::for_net(critic_.net(), config.critic_optimizer)) {}

ActResult DdpgAgent::act(const Point& s, double epsilon, Rng& rng) const {
  if (rng.bernoulli(epsilon)) return {random_action(rng), true};
  return {policy_action(s), false};
}

double DdpgAgent::critic_update(std::span<const CriticSample> batch) {
  if (batch.empty()) throw ContractViolation("critic_update: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd next_states(2, n);
  for (Eigen::Index j = 0; j < n; ++j) next_states.col(j) = Actor::encode(batch[j].s_next);
  const ForwardCache next_pi = actor_target_.net().forward(next_states);

  Eigen::MatrixXd next_inputs(4, n);
  Eigen::MatrixXd inputs(4, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& y = next_pi.output();
    next_inputs.col(j) = Critic::encode(batch[j].s_next, action_from_output(y(0, j), y(1, j)));
    inputs.col(j) = Critic::encode(batch[j].s, batch[j].a);
  }
  const Eigen::MatrixXd next_q = critic_target_.net().forward(next_inputs).output();

  Eigen::MatrixXd targets(1, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double bootstrap = batch[j].done ? 0.0 : config_.gamma * next_q(0, j);
    targets(0, j) = batch[j].reward + bootstrap;
  }
  if (!targets.allFinite()) throw TrainingError("critic_update: non-finite TD target");

  return regression_step(critic_.net(), critic_adam_, inputs, targets, "critic");
}

double DdpgAgent::actor_update(std::span<const Point> states) {
  if (states.empty()) throw ContractViolation("actor_update: empty batch");
  const auto n = static_cast<Eigen::Index>(states.size());

  Eigen::MatrixXd encoded(2, n);
  for (Eigen::Index j = 0; j < n; ++j) encoded.col(j) = Actor::encode(states[j]);
  const ForwardCache pi = actor_.net().forward(encoded);

  Eigen::MatrixXd critic_in(4, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const ActionVec a = action_from_output(pi.output()(0, j), pi.output()(1, j));
    critic_in.col(j) = Critic::encode(states[j], a);
  }
  const ForwardCache q = critic_.net().forward(critic_in);
  const double objective = q.output().sum() / static_cast<double>(n);

  // d(mean Q)/d(critic input); rows 2..3 are the encoded action a/10, which
  // equals the actor's tanh output when the clamp is treated as identity.
  const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd d_input = critic_.net().backward_input(q, dq);
  const Eigen::MatrixXd d_actor_out = -d_input.bottomRows(2);
  if (!d_actor_out.allFinite()) throw TrainingError("actor_update: non-finite critic gradient");

  adam_step(actor_.net(), actor_.net().backward_params(pi, d_actor_out), actor_adam_);
  return objective;
}

void DdpgAgent::sync_targets(double tau) {
  soft_update(actor_target_.net(), actor_.net(), tau);
  soft_update(critic_target_.net(), critic_.net(), tau);
}

void DdpgAgent::save(const std::string& dir) const {
  const std::filesystem::path base(dir);
  save_checkpoint((base / "actor.ckpt").string(), actor_.net());
  save_checkpoint((base / "critic.ckpt").string(), critic_.net());
  save_checkpoint((base / "actor_target.ckpt").string(), actor_target_.net());
  save_checkpoint((base / "critic_target.ckpt").string(), critic_target_.net());
}

}  // namespace homeo
