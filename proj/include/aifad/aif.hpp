#pragma once

// Deep active-inference sensing agent.
//
// A policy network maps the belief to a distribution q over the 2^N - 1
// probing actions. An EFE network maps the belief to a vector of expected
// free energies G, one per action, whose Boltzmann distribution
// Q = softmax(-G) serves as the generative model's action prior. Each step
// the policy is pulled toward Q by minimizing KL(q || Q), and G is regressed
// onto the one-step bootstrap r(k) + E_{A ~ Q(.|pi(k))}[G(A, pi(k))].

#include <cstddef>
#include <span>
#include <vector>

#include "aifad/belief.hpp"
#include "aifad/episode.hpp"
#include "aifad/nn.hpp"
#include "aifad/random.hpp"
#include "aifad/types.hpp"

namespace aifad {

enum class ActionMode { kSample, kGreedy };

struct AifConfig {
  std::vector<std::size_t> hidden = {64, 64};
  double policy_learning_rate = 1e-6;
  double efe_learning_rate = 5e-6;
};

struct AifAgent {
  /// Fresh He-initialized networks sized for `n_processes`.
  static AifAgent create(int n_processes, const AifConfig& cfg, RandomSource& rng);

  int n_processes() const;

  nn::Mlp policy_net;  // belief -> softmax over actions
  nn::Mlp efe_net;     // belief -> EFE per action
  nn::AdamState policy_opt;
  nn::AdamState efe_opt;
};

struct AifStepTrace {
  Belief belief_before;
  Belief belief_after;
  ActionSet action;
  Observation observation;
  double r_k = 0.0;
  double efe_target = 0.0;
  double free_energy = 0.0;
  /// The episode stops at belief_after; the bootstrap term is then zero.
  bool terminal = false;
};

struct FreeEnergy {
  double value = 0.0;
  std::vector<double> logit_gradient;  // dF / d(policy logits)
  std::vector<double> policy;          // q
  std::vector<double> action_prior;    // Q = softmax(-G)
};

struct BootstrapLoss {
  double value = 0.0;
  std::vector<double> output_gradient;  // dL / d(EFE outputs)
};

struct AifTrainStats {
  double free_energy = 0.0;
  double bootstrap_loss = 0.0;
};

ActionSet select_action(const AifAgent& agent, const Belief& belief, RandomSource& rng,
                        ActionMode mode);

/// Index of the largest probability; ties to the smallest index.
std::size_t argmax_action(std::span<const double> probs);

/// KL(softmax(policy_logits) || softmax(-efe_values)) and its gradient with
/// respect to the policy logits. The EFE values are held constant.
FreeEnergy free_energy_from_logits(std::span<const double> policy_logits,
                                   std::span<const double> efe_values);

FreeEnergy variational_free_energy(const AifAgent& agent, const Belief& belief);

/// Expected EFE of the next step under the Boltzmann prior softmax(-G).
double boltzmann_expected_efe(std::span<const double> efe_values);

/// r_k plus the bootstrapped EFE at belief_after (zero when terminal).
double efe_target(const AifAgent& agent, const AifStepTrace& trace);

/// Squared error between the EFE output of the taken action and the target.
BootstrapLoss bootstrap_loss(std::span<const double> efe_outputs, std::size_t action_index,
                             double target);

/// One Adam step on the policy against F and one on the EFE network against
/// the bootstrap loss. Both losses use the networks as they were on entry.
AifTrainStats train_step(AifAgent& agent, const AifStepTrace& trace);

/// One episode; when `train` is set the networks are updated after every step.
EpisodeRecord run_episode(AifAgent& agent, const WorldConfig& cfg, RandomSource& rng, bool train,
                          ActionMode mode = ActionMode::kSample,
                          const EpisodeOptions& options = {});

}  // namespace aifad
