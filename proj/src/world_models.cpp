#include "homeo/world_models.hpp"

#include <cmath>
#include <string>

#include "homeo/errors.hpp"

namespace homeo {

namespace {

constexpr int kHidden = 64;

Point decode_point(const Eigen::VectorXd& y) { return {decode_coord(y(0)), decode_coord(y(1))}; }

Eigen::MatrixXd encode_targets(std::span<const ModelSample> batch) {
  Eigen::MatrixXd targets(2, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    targets(0, col) = encode_coord(batch[j].s_next.x);
    targets(1, col) = encode_coord(batch[j].s_next.y);
  }
  return targets;
}

}  // namespace

double regression_step(DenseNet& net, AdamState& adam, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, const char* who) {
  if (inputs.cols() == 0) throw ContractViolation(std::string(who) + ": empty batch");
  const ForwardCache cache = net.forward(inputs);
  const Eigen::MatrixXd diff = cache.output() - targets;
  const double count = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / count;
  if (!std::isfinite(loss)) throw TrainingError(std::string(who) + ": non-finite loss");
  const Eigen::MatrixXd grad = (2.0 / count) * diff;
  adam_step(net, net.backward_params(cache, grad), adam);
  return loss;
}

ForwardModel::ForwardModel(DenseNet net, AdamConfig optimizer)
    : net_(std::move(net)), adam_(AdamState::for_net(net_, optimizer)) {
  if (net_.input_size() != kInputWidth || net_.output_size() != 2) {
    throw ContractViolation("forward model needs a 4 -> 2 network");
  }
}

ForwardModel ForwardModel::create(Rng& rng, AdamConfig optimizer) {
  return {DenseNet::init({kInputWidth, kHidden, kHidden, 2}, Activation::Relu, Activation::Linear,
                         rng),
          optimizer};
}

Eigen::VectorXd ForwardModel::encode(const Point& s, const ActionVec& a) {
  Eigen::VectorXd v(kInputWidth);
  v << encode_coord(s.x), encode_coord(s.y), encode_action(a.dx), encode_action(a.dy);
  return v;
}

Point ForwardModel::predict(const Point& s, const ActionVec& a) const {
  return decode_point(net_.predict(encode(s, a)));
}

double ForwardModel::train_step(std::span<const ModelSample> batch) {
  Eigen::MatrixXd inputs(kInputWidth, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    inputs.col(static_cast<Eigen::Index>(j)) = encode(batch[j].s, batch[j].a);
  }
  return regression_step(net_, adam_, inputs, encode_targets(batch), "forward model");
}

ExtendedForwardModel::ExtendedForwardModel(DenseNet net, AdamConfig optimizer)
    : net_(std::move(net)), adam_(AdamState::for_net(net_, optimizer)) {
  if (net_.input_size() != kInputWidth || net_.output_size() != 2) {
    throw ContractViolation("extended forward model needs a 6 -> 2 network");
  }
}

ExtendedForwardModel ExtendedForwardModel::create(Rng& rng, AdamConfig optimizer) {
  return {DenseNet::init({kInputWidth, kHidden, kHidden, 2}, Activation::Relu, Activation::Linear,
                         rng),
          optimizer};
}

Eigen::VectorXd ExtendedForwardModel::encode(const Point& s, const ActionVec& a,
                                             const ActionVec& a_next) {
  Eigen::VectorXd v(kInputWidth);
  v << encode_coord(s.x), encode_coord(s.y), encode_action(a.dx), encode_action(a.dy),
      encode_action(a_next.dx), encode_action(a_next.dy);
  return v;
}

Point ExtendedForwardModel::predict(const Point& s, const ActionVec& a,
                                    const ActionVec& a_next) const {
  return decode_point(net_.predict(encode(s, a, a_next)));
}

double ExtendedForwardModel::train_step(std::span<const ModelSample> batch) {
  Eigen::MatrixXd inputs(kInputWidth, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    inputs.col(static_cast<Eigen::Index>(j)) = encode(batch[j].s, batch[j].a, batch[j].next_action);
  }
  return regression_step(net_, adam_, inputs, encode_targets(batch), "extended forward model");
}

}  // namespace homeo
