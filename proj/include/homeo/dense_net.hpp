#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "homeo/rng.hpp"

namespace homeo {

enum class Activation { Linear, Relu, Tanh };
std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

/// Weights are (out x in); a batch is stored column-wise (features x samples).
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Parameter-shaped storage, used for gradients and optimizer moments.
using ParamSet = std::vector<DenseLayer>;

struct ForwardCache {
  // activations[0] is the input batch; activations[l + 1] is layer l's output.
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> preactivations;

  const Eigen::MatrixXd& output() const { return activations.back(); }
};

class DenseNet {
 public:
  DenseNet() = default;

  /// Uniform init: He fan-in scaling for relu layers, Xavier for tanh/linear.
  /// Biases start at zero. Throws ConfigError on fewer than two sizes or a zero size.
  static DenseNet init(std::vector<int> layer_sizes, Activation hidden, Activation output,
                       Rng& rng);

  /// All-zero parameters with the given architecture.
  static DenseNet zeros(std::vector<int> layer_sizes, Activation hidden, Activation output);

  ForwardCache forward(const Eigen::MatrixXd& input) const;
  Eigen::VectorXd predict(const Eigen::VectorXd& input) const;

  /// Gradients of sum_j <output_grad_j, y_j> over the batch columns.
  ParamSet backward_params(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;
  Eigen::MatrixXd backward_input(const ForwardCache& cache,
                                 const Eigen::MatrixXd& output_grad) const;

  struct Gradients {
    ParamSet params;
    Eigen::MatrixXd input;
  };
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  bool same_architecture(const DenseNet& other) const;
  bool all_finite() const;
  std::size_t parameter_count() const;

  friend bool operator==(const DenseNet& a, const DenseNet& b);

 private:
  Activation activation_of(std::size_t layer) const {
    return layer + 1 == layers_.size() ? output_ : hidden_;
  }
  void backprop(const ForwardCache& cache, const Eigen::MatrixXd& output_grad, ParamSet* params,
                Eigen::MatrixXd* input) const;

  std::vector<int> sizes_;
  Activation hidden_ = Activation::Relu;
  Activation output_ = Activation::Linear;
  std::vector<DenseLayer> layers_;
};

ParamSet zeros_like(const DenseNet& net);
bool all_finite(const ParamSet& params);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ParamSet first_moment;
  ParamSet second_moment;
  long long step = 0;

  static AdamState for_net(const DenseNet& net, AdamConfig config);
};

/// Bias-corrected adaptive-moment update. Non-finite gradients throw
/// TrainingError and leave both the net and the state untouched.
void adam_step(DenseNet& net, const ParamSet& grads, AdamState& state);

/// target <- tau * source + (1 - tau) * target, parameter-wise.
void soft_update(DenseNet& target, const DenseNet& source, double tau);

// Plain-text checkpoint: a header line, then one line per tensor (W0, b0, W1,
// b1, ...) holding row-major values with 17 significant digits.
void write_checkpoint(std::ostream& out, const DenseNet& net);
DenseNet read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const DenseNet& net);
DenseNet load_checkpoint(const std::string& path);

}  // namespace homeo
