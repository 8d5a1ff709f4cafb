#pragma once

// Small fully connected networks with ReLU hidden layers, reverse-mode
// gradients and Adam. Parameters live in one flat vector laid out layer by
// layer: the row-major (out x in) weight matrix followed by the bias vector.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "aifad/random.hpp"

namespace aifad::nn {

enum class Head { kLinear, kSoftmax };

class Mlp {
 public:
  /// `dims` = {input, hidden..., output}; at least two entries, all positive.
  /// Parameters start at zero.
  Mlp(std::vector<std::size_t> dims, Head head);

  /// He-uniform weights (limit sqrt(6 / fan_in)) and zero biases.
  static Mlp he_uniform(std::vector<std::size_t> dims, Head head, RandomSource& rng);

  const std::vector<std::size_t>& dims() const { return dims_; }
  Head head() const { return head_; }
  std::size_t num_layers() const { return dims_.size() - 1; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  double& weight(std::size_t layer, std::size_t out, std::size_t in);
  double weight(std::size_t layer, std::size_t out, std::size_t in) const;
  double& bias(std::size_t layer, std::size_t out);
  double bias(std::size_t layer, std::size_t out) const;

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + dims_[layer] * dims_[layer + 1];
  }

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<std::size_t> dims_;
  Head head_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Values kept from a forward pass for the backward pass.
struct ForwardTape {
  // activations[0] is the input; activations[l] is the ReLU output of hidden layer l.
  std::vector<std::vector<double>> activations;
  // Pre-activations of every layer; the last one holds the output logits.
  std::vector<std::vector<double>> pre_activations;
};

struct ForwardResult {
  std::vector<double> output;  // logits for a linear head, probabilities for softmax
  ForwardTape tape;
};

/// Parameter gradient in the same flat layout as Mlp::params().
struct Gradients {
  std::vector<double> values;
};

ForwardResult forward(const Mlp& net, std::span<const double> input);

/// Gradient of a loss with respect to the network output (probabilities for
/// a softmax head) mapped to parameters.
Gradients backward(const Mlp& net, const ForwardTape& tape, std::span<const double> output_grad);

/// Same, starting from the gradient with respect to the final-layer logits.
/// For a linear head this is identical to backward().
Gradients backward_from_logits(const Mlp& net, const ForwardTape& tape,
                               std::span<const double> logit_grad);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t num_params, AdamConfig cfg)
      : config(cfg), first_moment(num_params, 0.0), second_moment(num_params, 0.0) {}

  AdamConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
};

/// One bias-corrected Adam update of `net` in place.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// Vector-Jacobian product of softmax: maps d/dprobs to d/dlogits.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> prob_grad);

/// Binary checkpoint: "AIFN", u32 version, u32 head, u32 layer count + 1,
/// u32 dims, then every parameter as a little-endian f64.
void write_mlp(std::ostream& out, const Mlp& net);
Mlp read_mlp(std::istream& in);
void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace aifad::nn
