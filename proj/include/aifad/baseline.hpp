#pragma once

// Comparison agents: a one-step TD actor-critic trained on the negated
// sensing objective, a greedy expected-entropy oracle and a uniform random
// prober.

#include <cstddef>
#include <vector>

#include "aifad/aif.hpp"
#include "aifad/belief.hpp"
#include "aifad/episode.hpp"
#include "aifad/nn.hpp"
#include "aifad/random.hpp"
#include "aifad/types.hpp"

namespace aifad {

struct AcConfig {
  std::vector<std::size_t> hidden = {64, 64};
  double actor_learning_rate = 5e-4;
  double critic_learning_rate = 5e-3;
  double discount = 0.99;
};

struct AcAgent {
  static AcAgent create(int n_processes, const AcConfig& cfg, RandomSource& rng);

  int n_processes() const;

  nn::Mlp actor_net;   // belief -> softmax over actions
  nn::Mlp critic_net;  // belief -> scalar state value
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
  double discount = 0.99;
};

struct Transition {
  Belief belief;
  ActionSet action;
  double reward = 0.0;  // -r(k)
  Belief next_belief;
  bool done = false;
};

struct AcTrainStats {
  double td_error = 0.0;
  double critic_loss = 0.0;
};

ActionSet ac_select_action(const AcAgent& agent, const Belief& belief, RandomSource& rng,
                           ActionMode mode = ActionMode::kSample);

/// Actor loss -delta * log pi(a|s) with the TD error delta held constant,
/// returned as the gradient with respect to the actor logits.
std::vector<double> actor_logit_gradient(std::span<const double> actor_logits,
                                         std::size_t action_index, double td_error);

/// Critic regresses V(s) onto reward + discount * V(s') * (1 - done); the
/// actor ascends td_error * grad log pi(a|s). One Adam step each.
AcTrainStats ac_train_step(AcAgent& agent, const Transition& transition);

EpisodeRecord run_ac_episode(AcAgent& agent, const WorldConfig& cfg, RandomSource& rng, bool train,
                             ActionMode mode = ActionMode::kSample,
                             const EpisodeOptions& options = {});

/// Largest N the greedy oracle will enumerate.
inline constexpr int kGreedyMaxProcesses = 10;

/// E_y[H(posterior)] for probing `action`, outcomes weighted by their
/// predictive probability under `belief`.
double expected_posterior_entropy(const Belief& belief, const ActionSet& action, double flip_prob);

/// Action minimizing expected posterior entropy plus probe cost; ties go to
/// the smallest action index. Throws TooLarge above kGreedyMaxProcesses.
ActionSet greedy_entropy_action(const Belief& belief, const WorldConfig& cfg);

ActionSet random_action(const WorldConfig& cfg, RandomSource& rng);

EpisodeRecord run_greedy_episode(const WorldConfig& cfg, RandomSource& rng,
                                 const EpisodeOptions& options = {});
EpisodeRecord run_random_episode(const WorldConfig& cfg, RandomSource& rng,
                                 const EpisodeOptions& options = {});

}  // namespace aifad
