#include "homeo/dense_net.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "homeo/errors.hpp"

namespace homeo {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Linear:
      return "linear";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view s) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ConfigError("dense net needs at least an input and an output layer");
  for (int s : sizes) {
    if (s < 1) throw ConfigError("dense net layer sizes must be positive");
  }
}

void apply_activation(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& out) {
  switch (act) {
    case Activation::Linear:
      out = z;
      break;
    case Activation::Relu:
      out = z.cwiseMax(0.0);
      break;
    case Activation::Tanh:
      out = z.array().tanh().matrix();
      break;
  }
}

// In-place multiply of the upstream gradient by the activation derivative.
void scale_by_derivative(Activation act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y,
                         Eigen::MatrixXd& grad) {
  switch (act) {
    case Activation::Linear:
      break;
    case Activation::Relu:
      grad = (z.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::Tanh:
      grad.array() *= 1.0 - y.array().square();
      break;
  }
}

}  // namespace

DenseNet DenseNet::zeros(std::vector<int> layer_sizes, Activation hidden, Activation output) {
  check_sizes(layer_sizes);
  DenseNet net;
  net.sizes_ = std::move(layer_sizes);
  net.hidden_ = hidden;
  net.output_ = output;
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    net.layers_.push_back({Eigen::MatrixXd::Zero(net.sizes_[l + 1], net.sizes_[l]),
                           Eigen::VectorXd::Zero(net.sizes_[l + 1])});
  }
  return net;
}

DenseNet DenseNet::init(std::vector<int> layer_sizes, Activation hidden, Activation output,
                        Rng& rng) {
  DenseNet net = zeros(std::move(layer_sizes), hidden, output);
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    auto& w = net.layers_[l].weights;
    const double fan_in = static_cast<double>(w.cols());
    const double fan_out = static_cast<double>(w.rows());
    const double limit = net.activation_of(l) == Activation::Relu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    // Row-major fill order so the draw sequence matches the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return net;
}

ForwardCache DenseNet::forward(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_size()) {
    throw ContractViolation("dense net forward: input has " + std::to_string(input.rows()) +
                            " rows, expected " + std::to_string(input_size()));
  }
  ForwardCache cache;
  cache.activations.reserve(layers_.size() + 1);
  cache.preactivations.reserve(layers_.size());
  cache.activations.push_back(input);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weights * cache.activations.back();
    z.colwise() += layers_[l].bias;
    Eigen::MatrixXd y;
    apply_activation(activation_of(l), z, y);
    cache.preactivations.push_back(std::move(z));
    cache.activations.push_back(std::move(y));
  }
  return cache;
}

Eigen::VectorXd DenseNet::predict(const Eigen::VectorXd& input) const {
  return forward(input).output().col(0);
}

void DenseNet::backprop(const ForwardCache& cache, const Eigen::MatrixXd& output_grad,
                        ParamSet* params, Eigen::MatrixXd* input) const {
  if (cache.activations.size() != layers_.size() + 1) {
    throw ContractViolation("dense net backward: cache does not match the network depth");
  }
  const Eigen::MatrixXd& out = cache.output();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw ContractViolation("dense net backward: output gradient shape mismatch");
  }
  if (params) params->resize(layers_.size());

  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    scale_by_derivative(activation_of(l), cache.preactivations[l], cache.activations[l + 1],
                        delta);
    if (params) {
      (*params)[l].weights.noalias() = delta * cache.activations[l].transpose();
      (*params)[l].bias = delta.rowwise().sum();
    }
    if (l > 0 || input) {
      Eigen::MatrixXd upstream = layers_[l].weights.transpose() * delta;
      delta = std::move(upstream);
    }
  }
  if (input) *input = std::move(delta);
}

ParamSet DenseNet::backward_params(const ForwardCache& cache,
                                   const Eigen::MatrixXd& output_grad) const {
  ParamSet grads;
  backprop(cache, output_grad, &grads, nullptr);
  return grads;
}

Eigen::MatrixXd DenseNet::backward_input(const ForwardCache& cache,
                                         const Eigen::MatrixXd& output_grad) const {
  Eigen::MatrixXd grad;
  backprop(cache, output_grad, nullptr, &grad);
  return grad;
}

DenseNet::Gradients DenseNet::backward(const ForwardCache& cache,
                                       const Eigen::MatrixXd& output_grad) const {
  Gradients g;
  backprop(cache, output_grad, &g.params, &g.input);
  return g;
}

bool DenseNet::same_architecture(const DenseNet& other) const {
  return sizes_ == other.sizes_ && hidden_ == other.hidden_ && output_ == other.output_;
}

bool DenseNet::all_finite() const { return homeo::all_finite(layers_); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

bool operator==(const DenseNet& a, const DenseNet& b) {
  if (!a.same_architecture(b)) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weights != b.layers_[l].weights) return false;
    if (a.layers_[l].bias != b.layers_[l].bias) return false;
  }
  return true;
}

ParamSet zeros_like(const DenseNet& net) {
  ParamSet out;
  for (const auto& layer : net.layers()) {
    out.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                   Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return out;
}

bool all_finite(const ParamSet& params) {
  for (const auto& layer : params) {
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

AdamState AdamState::for_net(const DenseNet& net, AdamConfig config) {
  return {config, zeros_like(net), zeros_like(net), 0};
}

namespace {

template <typename Derived>
void adam_update(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<Derived>& grad,
                 Eigen::MatrixBase<Derived>& m, Eigen::MatrixBase<Derived>& v,
                 const AdamConfig& cfg, double correction1, double correction2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double step = cfg.learning_rate / correction1;
  param.array() -= step * m.array() / ((v.array() / correction2).sqrt() + cfg.epsilon);
}

}  // namespace

void adam_step(DenseNet& net, const ParamSet& grads, AdamState& state) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || state.first_moment.size() != layers.size() ||
      state.second_moment.size() != layers.size()) {
    throw ContractViolation("adam_step: gradient/state depth does not match the network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads[l].weights.rows() != layers[l].weights.rows() ||
        grads[l].weights.cols() != layers[l].weights.cols() ||
        grads[l].bias.size() != layers[l].bias.size()) {
      throw ContractViolation("adam_step: gradient shape mismatch at layer " + std::to_string(l));
    }
  }
  if (!all_finite(grads)) throw TrainingError("adam_step: non-finite gradient rejected");

  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.config.beta1, t);
  const double c2 = 1.0 - std::pow(state.config.beta2, t);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    adam_update(layers[l].weights, grads[l].weights, state.first_moment[l].weights,
                state.second_moment[l].weights, state.config, c1, c2);
    adam_update(layers[l].bias, grads[l].bias, state.first_moment[l].bias,
                state.second_moment[l].bias, state.config, c1, c2);
  }
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
  if (!target.same_architecture(source)) {
    throw ContractViolation("soft_update: architectures differ");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractViolation("soft_update: tau outside [0, 1]");
  if (tau == 1.0) {
    target = source;
    return;
  }
  if (tau == 0.0) return;
  auto& dst = target.layers();
  const auto& src = source.layers();
  for (std::size_t l = 0; l < dst.size(); ++l) {
    dst[l].weights = tau * src[l].weights + (1.0 - tau) * dst[l].weights;
    dst[l].bias = tau * src[l].bias + (1.0 - tau) * dst[l].bias;
  }
}

namespace {

constexpr int kCheckpointFormat = 1;

void write_value(std::ostream& out, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

std::vector<double> parse_values(const std::string& line) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    double v = 0.0;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) throw IoError("checkpoint: malformed number in tensor line");
    values.push_back(v);
    p = res.ptr;
  }
  return values;
}

std::string field(const std::string& token, std::string_view key) {
  if (token.rfind(std::string(key) + "=", 0) != 0) {
    throw IoError("checkpoint header: expected field '" + std::string(key) + "'");
  }
  return token.substr(key.size() + 1);
}

}  // namespace

void write_checkpoint(std::ostream& out, const DenseNet& net) {
  out << "densenet format=" << kCheckpointFormat << " layer_sizes=";
  const auto& sizes = net.layer_sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? "," : "") << sizes[i];
  out << " hidden=" << to_string(net.hidden_activation())
      << " output=" << to_string(net.output_activation()) << '\n';
  for (const auto& layer : net.layers()) {
    const auto& w = layer.weights;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (r || c) out << ' ';
        write_value(out, w(r, c));
      }
    }
    out << '\n';
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      if (i) out << ' ';
      write_value(out, layer.bias(i));
    }
    out << '\n';
  }
}

DenseNet read_checkpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("checkpoint: missing header line");
  std::istringstream hs(header);
  std::string magic, fmt, sizes_tok, hidden_tok, output_tok;
  hs >> magic >> fmt >> sizes_tok >> hidden_tok >> output_tok;
  if (magic != "densenet") throw IoError("checkpoint: not a densenet file");
  if (field(fmt, "format") != std::to_string(kCheckpointFormat)) {
    throw IoError("checkpoint: unsupported format version");
  }
  std::vector<int> sizes;
  {
    std::istringstream ss(field(sizes_tok, "layer_sizes"));
    std::string part;
    while (std::getline(ss, part, ',')) {
      int v = 0;
      auto res = std::from_chars(part.data(), part.data() + part.size(), v);
      if (res.ec != std::errc() || res.ptr != part.data() + part.size()) {
        throw IoError("checkpoint: bad layer size '" + part + "'");
      }
      sizes.push_back(v);
    }
  }
  DenseNet net;
  try {
    net = DenseNet::zeros(sizes, parse_activation(field(hidden_tok, "hidden")),
                          parse_activation(field(output_tok, "output")));
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  std::string line;
  for (auto& layer : net.layers()) {
    if (!std::getline(in, line)) throw IoError("checkpoint: truncated weight tensor");
    auto w = parse_values(line);
    if (static_cast<Eigen::Index>(w.size()) != layer.weights.size()) {
      throw IoError("checkpoint: weight tensor has wrong length");
    }
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = w[i++];
    }
    if (!std::getline(in, line)) throw IoError("checkpoint: truncated bias tensor");
    auto b = parse_values(line);
    if (static_cast<Eigen::Index>(b.size()) != layer.bias.size()) {
      throw IoError("checkpoint: bias tensor has wrong length");
    }
    for (std::size_t j = 0; j < b.size(); ++j) layer.bias(static_cast<Eigen::Index>(j)) = b[j];
  }
  return net;
}

void save_checkpoint(const std::string& path, const DenseNet& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  write_checkpoint(out, net);
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

DenseNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

}  // namespace homeo
