#include "aifad/aif.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "aifad/errors.hpp"

namespace aifad {

namespace {

std::vector<std::size_t> network_dims(std::size_t m, const std::vector<std::size_t>& hidden,
                                      std::size_t out) {
  std::vector<std::size_t> dims{m};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

AifAgent AifAgent::create(int n_processes, const AifConfig& cfg, RandomSource& rng) {
  if (n_processes < 1 || n_processes > kMaxProcesses)
    throw std::invalid_argument("AifAgent: n_processes out of range");
  const std::size_t m = std::size_t{1} << n_processes;
  nn::Mlp policy = nn::Mlp::he_uniform(network_dims(m, cfg.hidden, m - 1), nn::Head::kSoftmax, rng);
  nn::Mlp efe = nn::Mlp::he_uniform(network_dims(m, cfg.hidden, m - 1), nn::Head::kLinear, rng);
  nn::AdamState policy_opt(policy.num_params(), {.learning_rate = cfg.policy_learning_rate});
  nn::AdamState efe_opt(efe.num_params(), {.learning_rate = cfg.efe_learning_rate});
  return AifAgent{std::move(policy), std::move(efe), std::move(policy_opt), std::move(efe_opt)};
}

int AifAgent::n_processes() const {
  return std::countr_zero(policy_net.output_dim() + 1);
}

std::size_t argmax_action(std::span<const double> probs) {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

ActionSet select_action(const AifAgent& agent, const Belief& belief, RandomSource& rng,
                        ActionMode mode) {
  const auto q = nn::forward(agent.policy_net, belief.probs()).output;
  const std::size_t index = mode == ActionMode::kGreedy ? argmax_action(q) : rng.categorical(q);
  return ActionSet::from_index(index, agent.n_processes());
}

FreeEnergy free_energy_from_logits(std::span<const double> policy_logits,
                                   std::span<const double> efe_values) {
  if (policy_logits.size() != efe_values.size())
    throw ShapeMismatch("free energy: policy and EFE sizes differ");
  const std::size_t n = policy_logits.size();
  std::vector<double> neg_g(n);
  for (std::size_t i = 0; i < n; ++i) neg_g[i] = -efe_values[i];

  const auto log_q = nn::log_softmax(policy_logits);
  const auto log_prior = nn::log_softmax(neg_g);
  FreeEnergy out;
  out.policy = nn::softmax(policy_logits);
  out.action_prior = nn::softmax(neg_g);
  for (std::size_t i = 0; i < n; ++i) out.value += out.policy[i] * (log_q[i] - log_prior[i]);
  // dF/dz_j = q_j (log q_j - log Q_j - F)
  out.logit_gradient.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.logit_gradient[i] = out.policy[i] * (log_q[i] - log_prior[i] - out.value);
  // KL is nonnegative; clamp rounding noise for identical distributions.
  out.value = std::max(out.value, 0.0);
  return out;
}

FreeEnergy variational_free_energy(const AifAgent& agent, const Belief& belief) {
  const auto policy = nn::forward(agent.policy_net, belief.probs());
  const auto efe = nn::forward(agent.efe_net, belief.probs());
  return free_energy_from_logits(policy.tape.pre_activations.back(), efe.output);
}

double boltzmann_expected_efe(std::span<const double> efe_values) {
  std::vector<double> neg_g(efe_values.size());
  for (std::size_t i = 0; i < efe_values.size(); ++i) neg_g[i] = -efe_values[i];
  const auto w = nn::softmax(neg_g);
  double expected = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) expected += w[i] * efe_values[i];
  return expected;
}

double efe_target(const AifAgent& agent, const AifStepTrace& trace) {
  if (trace.terminal) return trace.r_k;
  const auto next = nn::forward(agent.efe_net, trace.belief_after.probs());
  return trace.r_k + boltzmann_expected_efe(next.output);
}

BootstrapLoss bootstrap_loss(std::span<const double> efe_outputs, std::size_t action_index,
                             double target) {
  if (action_index >= efe_outputs.size()) throw ShapeMismatch("bootstrap loss: bad action index");
  BootstrapLoss out;
  const double diff = efe_outputs[action_index] - target;
  out.value = diff * diff;
  out.output_gradient.assign(efe_outputs.size(), 0.0);
  out.output_gradient[action_index] = 2.0 * diff;
  return out;
}

AifTrainStats train_step(AifAgent& agent, const AifStepTrace& trace) {
  const auto policy = nn::forward(agent.policy_net, trace.belief_before.probs());
  const auto efe = nn::forward(agent.efe_net, trace.belief_before.probs());

  const FreeEnergy fe = free_energy_from_logits(policy.tape.pre_activations.back(), efe.output);
  const double target = efe_target(agent, trace);
  const BootstrapLoss loss = bootstrap_loss(efe.output, trace.action.action_index(), target);

  const auto policy_grads = nn::backward_from_logits(agent.policy_net, policy.tape, fe.logit_gradient);
  const auto efe_grads = nn::backward(agent.efe_net, efe.tape, loss.output_gradient);
  nn::adam_step(agent.policy_net, policy_grads, agent.policy_opt);
  nn::adam_step(agent.efe_net, efe_grads, agent.efe_opt);
  return {fe.value, loss.value};
}

EpisodeRecord run_episode(AifAgent& agent, const WorldConfig& cfg, RandomSource& rng, bool train,
                          ActionMode mode, const EpisodeOptions& options) {
  if (static_cast<int>(agent.n_processes()) != cfg.n_processes ||
      agent.policy_net.input_dim() != cfg.num_hypotheses())
    throw ShapeMismatch("run_episode: agent was built for a different number of processes");
  const ActionChooser choose = [&agent, mode](const Belief& b, RandomSource& r) {
    return select_action(agent, b, r, mode);
  };
  StepHook hook;
  if (train) {
    hook = [&agent](const StepContext& step) {
      AifStepTrace trace{step.belief_before, step.belief_after, step.action, step.observation,
                         step.outcome.reward_objective, 0.0, 0.0, step.done};
      train_step(agent, trace);
    };
  }
  return run_policy_episode(cfg, rng, choose, hook, options);
}

}  // namespace aifad
