#include "aifad/baseline.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "aifad/errors.hpp"

namespace aifad {

namespace {

constexpr double kTieTolerance = 1e-12;

std::vector<std::size_t> network_dims(std::size_t in, const std::vector<std::size_t>& hidden,
                                      std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

AcAgent AcAgent::create(int n_processes, const AcConfig& cfg, RandomSource& rng) {
  if (n_processes < 1 || n_processes > kMaxProcesses)
    throw std::invalid_argument("AcAgent: n_processes out of range");
  if (!(cfg.discount >= 0.0 && cfg.discount <= 1.0))
    throw std::invalid_argument("AcAgent: discount must lie in [0,1]");
  const std::size_t m = std::size_t{1} << n_processes;
  nn::Mlp actor = nn::Mlp::he_uniform(network_dims(m, cfg.hidden, m - 1), nn::Head::kSoftmax, rng);
  nn::Mlp critic = nn::Mlp::he_uniform(network_dims(m, cfg.hidden, 1), nn::Head::kLinear, rng);
  nn::AdamState actor_opt(actor.num_params(), {.learning_rate = cfg.actor_learning_rate});
  nn::AdamState critic_opt(critic.num_params(), {.learning_rate = cfg.critic_learning_rate});
  return AcAgent{std::move(actor), std::move(critic), std::move(actor_opt), std::move(critic_opt),
                 cfg.discount};
}

int AcAgent::n_processes() const { return std::countr_zero(actor_net.output_dim() + 1); }

ActionSet ac_select_action(const AcAgent& agent, const Belief& belief, RandomSource& rng,
                           ActionMode mode) {
  const auto pi = nn::forward(agent.actor_net, belief.probs()).output;
  const std::size_t index = mode == ActionMode::kGreedy ? argmax_action(pi) : rng.categorical(pi);
  return ActionSet::from_index(index, agent.n_processes());
}

std::vector<double> actor_logit_gradient(std::span<const double> actor_logits,
                                         std::size_t action_index, double td_error) {
  if (action_index >= actor_logits.size()) throw ShapeMismatch("actor gradient: bad action index");
  // d(-delta * log softmax(z)_a)/dz_j = -delta * (1{j=a} - pi_j)
  auto grad = nn::softmax(actor_logits);
  for (double& g : grad) g *= td_error;
  grad[action_index] -= td_error;
  return grad;
}

AcTrainStats ac_train_step(AcAgent& agent, const Transition& t) {
  const auto value = nn::forward(agent.critic_net, t.belief.probs());
  const double next_value =
      t.done ? 0.0 : nn::forward(agent.critic_net, t.next_belief.probs()).output[0];
  const double td_target = t.reward + agent.discount * next_value;
  const double td_error = td_target - value.output[0];

  AcTrainStats stats{td_error, td_error * td_error};
  const double critic_grad[1] = {-2.0 * td_error};
  const auto critic_grads = nn::backward(agent.critic_net, value.tape, critic_grad);

  const auto actor = nn::forward(agent.actor_net, t.belief.probs());
  const auto logit_grad =
      actor_logit_gradient(actor.tape.pre_activations.back(), t.action.action_index(), td_error);
  const auto actor_grads = nn::backward_from_logits(agent.actor_net, actor.tape, logit_grad);

  nn::adam_step(agent.critic_net, critic_grads, agent.critic_opt);
  nn::adam_step(agent.actor_net, actor_grads, agent.actor_opt);
  return stats;
}

EpisodeRecord run_ac_episode(AcAgent& agent, const WorldConfig& cfg, RandomSource& rng, bool train,
                             ActionMode mode, const EpisodeOptions& options) {
  if (agent.actor_net.input_dim() != cfg.num_hypotheses())
    throw ShapeMismatch("run_ac_episode: agent was built for a different number of processes");
  const ActionChooser choose = [&agent, mode](const Belief& b, RandomSource& r) {
    return ac_select_action(agent, b, r, mode);
  };
  StepHook hook;
  if (train) {
    hook = [&agent](const StepContext& step) {
      ac_train_step(agent, Transition{step.belief_before, step.action,
                                      -step.outcome.reward_objective, step.belief_after,
                                      step.done});
    };
  }
  return run_policy_episode(cfg, rng, choose, hook, options);
}

double expected_posterior_entropy(const Belief& belief, const ActionSet& action, double flip_prob) {
  const std::size_t outcomes = std::size_t{1} << action.size();
  const auto probs = belief.probs();
  double expected = 0.0;
  std::vector<double> joint(probs.size());
  Observation obs{action, std::vector<std::uint8_t>(action.size())};
  for (std::size_t y = 0; y < outcomes; ++y) {
    for (std::size_t j = 0; j < action.size(); ++j) obs.readings[j] = (y >> j) & 1U;
    double predictive = 0.0;
    for (std::size_t h = 0; h < probs.size(); ++h) {
      joint[h] = probs[h] == 0.0 ? 0.0 : probs[h] * observation_likelihood(h, obs, flip_prob);
      predictive += joint[h];
    }
    if (!(predictive > 0.0)) continue;
    // sum_h joint/P * -log(joint/P), scaled back by P
    double h_post = 0.0;
    for (double w : joint)
      if (w > 0.0) {
        const double post = w / predictive;
        h_post -= post * std::log(post);
      }
    expected += predictive * h_post;
  }
  return expected;
}

ActionSet greedy_entropy_action(const Belief& belief, const WorldConfig& cfg) {
  if (cfg.n_processes > kGreedyMaxProcesses)
    throw TooLarge("greedy_entropy_action: N = " + std::to_string(cfg.n_processes) +
                   " exceeds enumeration limit");
  if (belief.size() != cfg.num_hypotheses())
    throw std::invalid_argument("greedy_entropy_action: belief size does not match N");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < cfg.num_actions(); ++a) {
    const ActionSet action = ActionSet::from_index(a, cfg.n_processes);
    const double value = expected_posterior_entropy(belief, action, cfg.flip_prob) +
                         cfg.cost_per_probe * static_cast<double>(action.size());
    if (value < best_value - kTieTolerance) {
      best_value = value;
      best = a;
    }
  }
  return ActionSet::from_index(best, cfg.n_processes);
}

ActionSet random_action(const WorldConfig& cfg, RandomSource& rng) {
  return ActionSet::from_index(rng.uniform_index(cfg.num_actions()), cfg.n_processes);
}

EpisodeRecord run_greedy_episode(const WorldConfig& cfg, RandomSource& rng,
                                 const EpisodeOptions& options) {
  return run_policy_episode(
      cfg, rng, [&cfg](const Belief& b, RandomSource&) { return greedy_entropy_action(b, cfg); },
      {}, options);
}

EpisodeRecord run_random_episode(const WorldConfig& cfg, RandomSource& rng,
                                 const EpisodeOptions& options) {
  return run_policy_episode(
      cfg, rng, [&cfg](const Belief&, RandomSource& r) { return random_action(cfg, r); }, {},
      options);
}

}  // namespace aifad
