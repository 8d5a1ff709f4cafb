#include "aifad/nn.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "aifad/errors.hpp"

namespace aifad::nn {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'I', 'F', 'N'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxDim = 1U << 20;

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ShapeMismatch(std::string(what) + ": expected length " + std::to_string(want) +
                        ", got " + std::to_string(got));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("checkpoint truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b[i]} << (8 * i);
  return std::bit_cast<double>(bits);
}

// Moments that decay toward subnormal range slow every later step down by an
// order of magnitude; below this they cannot move a parameter anyway.
inline double flush_tiny(double x) { return std::abs(x) < 1e-200 ? 0.0 : x; }

}  // namespace

Mlp::Mlp(std::vector<std::size_t> dims, Head head) : dims_(std::move(dims)), head_(head) {
  if (dims_.size() < 2) throw ShapeMismatch("Mlp: need at least input and output dims");
  if (std::any_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 0; }))
    throw ShapeMismatch("Mlp: layer dims must be positive");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offset);
    offset += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(offset, 0.0);
}

Mlp Mlp::he_uniform(std::vector<std::size_t> dims, Head head, RandomSource& rng) {
  Mlp net(std::move(dims), head);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(net.dims_[l]));
    const std::size_t count = net.dims_[l] * net.dims_[l + 1];
    double* w = net.params_.data() + net.weight_offset(l);
    for (std::size_t i = 0; i < count; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return net;
}

double& Mlp::weight(std::size_t layer, std::size_t out, std::size_t in) {
  return params_[offsets_[layer] + out * dims_[layer] + in];
}
double Mlp::weight(std::size_t layer, std::size_t out, std::size_t in) const {
  return params_[offsets_[layer] + out * dims_[layer] + in];
}
double& Mlp::bias(std::size_t layer, std::size_t out) { return params_[bias_offset(layer) + out]; }
double Mlp::bias(std::size_t layer, std::size_t out) const {
  return params_[bias_offset(layer) + out];
}

ForwardResult forward(const Mlp& net, std::span<const double> input) {
  check_length(input.size(), net.input_dim(), "forward input");
  ForwardResult result;
  auto& tape = result.tape;
  tape.activations.emplace_back(input.begin(), input.end());
  const auto params = net.params();
  const auto& dims = net.dims();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t n_in = dims[l];
    const std::size_t n_out = dims[l + 1];
    const double* w = params.data() + net.weight_offset(l);
    const double* b = params.data() + net.bias_offset(l);
    const auto& a = tape.activations.back();
    std::vector<double> z(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
      double acc = b[o];
      const double* row = w + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * a[i];
      z[o] = acc;
    }
    if (l + 1 < net.num_layers()) {
      std::vector<double> relu(n_out);
      for (std::size_t o = 0; o < n_out; ++o) relu[o] = z[o] > 0.0 ? z[o] : 0.0;
      tape.pre_activations.push_back(std::move(z));
      tape.activations.push_back(std::move(relu));
    } else {
      tape.pre_activations.push_back(std::move(z));
    }
  }
  const auto& logits = tape.pre_activations.back();
  result.output = net.head() == Head::kSoftmax ? softmax(logits) : logits;
  return result;
}

Gradients backward_from_logits(const Mlp& net, const ForwardTape& tape,
                               std::span<const double> logit_grad) {
  check_length(logit_grad.size(), net.output_dim(), "backward gradient");
  if (tape.activations.size() != net.num_layers() ||
      tape.pre_activations.size() != net.num_layers())
    throw ShapeMismatch("backward: tape does not belong to this network");

  Gradients grads{std::vector<double>(net.num_params(), 0.0)};
  const auto params = net.params();
  const auto& dims = net.dims();
  std::vector<double> delta(logit_grad.begin(), logit_grad.end());
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    const std::size_t n_in = dims[l];
    const std::size_t n_out = dims[l + 1];
    const auto& a = tape.activations[l];
    double* gw = grads.values.data() + net.weight_offset(l);
    double* gb = grads.values.data() + net.bias_offset(l);
    for (std::size_t o = 0; o < n_out; ++o) {
      gb[o] = delta[o];
      if (delta[o] == 0.0) continue;
      double* row = gw + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) row[i] = delta[o] * a[i];
    }
    if (l == 0) break;
    const double* w = params.data() + net.weight_offset(l);
    const auto& pre = tape.pre_activations[l - 1];
    std::vector<double> prev(n_in, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      if (delta[o] == 0.0) continue;
      const double* row = w + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) prev[i] += row[i] * delta[o];
    }
    for (std::size_t i = 0; i < n_in; ++i)
      if (!(pre[i] > 0.0)) prev[i] = 0.0;
    delta = std::move(prev);
  }
  return grads;
}

Gradients backward(const Mlp& net, const ForwardTape& tape, std::span<const double> output_grad) {
  check_length(output_grad.size(), net.output_dim(), "backward gradient");
  if (net.head() == Head::kLinear) return backward_from_logits(net, tape, output_grad);
  if (tape.pre_activations.empty()) throw ShapeMismatch("backward: empty tape");
  const auto probs = softmax(tape.pre_activations.back());
  return backward_from_logits(net, tape, softmax_backward(probs, output_grad));
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  const std::size_t n = net.num_params();
  check_length(grads.values.size(), n, "adam gradients");
  check_length(state.first_moment.size(), n, "adam first moment");
  check_length(state.second_moment.size(), n, "adam second moment");
  const auto& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  auto params = net.params();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads.values[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = flush_tiny(c.beta1 * m + (1.0 - c.beta1) * g);
    v = flush_tiny(c.beta2 * v + (1.0 - c.beta2) * g * g);
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double max = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double max = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - max);
  const double log_norm = max + std::log(total);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> prob_grad) {
  check_length(prob_grad.size(), probs.size(), "softmax_backward");
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * prob_grad[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (prob_grad[i] - dot);
  return out;
}

void write_mlp(std::ostream& out, const Mlp& net) {
  out.write(kMagic.data(), kMagic.size());
  write_u32(out, kVersion);
  write_u32(out, net.head() == Head::kSoftmax ? 1U : 0U);
  write_u32(out, static_cast<std::uint32_t>(net.dims().size()));
  for (std::size_t d : net.dims()) write_u32(out, static_cast<std::uint32_t>(d));
  for (double p : net.params()) write_f64(out, p);
  if (!out) throw IoError("failed writing network checkpoint");
}

Mlp read_mlp(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw IoError("not a network checkpoint (bad magic)");
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t head = read_u32(in);
  if (head > 1) throw IoError("bad head code in checkpoint");
  const std::uint32_t count = read_u32(in);
  if (count < 2 || count > 64) throw IoError("bad layer count in checkpoint");
  std::vector<std::size_t> dims;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t d = read_u32(in);
    if (d == 0 || d > kMaxDim) throw IoError("bad layer dim in checkpoint");
    dims.push_back(d);
  }
  Mlp net(std::move(dims), head == 1 ? Head::kSoftmax : Head::kLinear);
  for (double& p : net.params()) {
    p = read_f64(in);
    if (!std::isfinite(p)) throw IoError("non-finite parameter in checkpoint");
  }
  return net;
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_mlp(out, net);
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_mlp(in);
}

}  // namespace aifad::nn
