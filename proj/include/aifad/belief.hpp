#pragma once

#include <cstddef>

#include "aifad/types.hpp"

namespace aifad {

/// Per-step sensing objective: entropy change plus probe cost.
struct StepOutcome {
  double reward_objective = 0.0;  // entropy_after - entropy_before + lambda * probes_used
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  std::size_t probes_used = 0;
};

struct MapEstimate {
  std::size_t hypothesis_index = 0;
  double confidence = 0.0;
};

/// Exact Bayes update for one observation through a binary symmetric channel.
/// Throws DegenerateBelief if no hypothesis with prior mass explains `obs`.
Belief posterior_update(const Belief& prior, const ActionSet& action, const Observation& obs,
                        double flip_prob);

/// Likelihood of `obs` under hypothesis `hypothesis_index`.
double observation_likelihood(std::size_t hypothesis_index, const Observation& obs,
                              double flip_prob);

/// Shannon entropy in nats; zero entries contribute nothing.
double entropy(const Belief& b);
double entropy(std::span<const double> probs);

/// Most probable hypothesis; ties go to the smallest index.
MapEstimate map_estimate(const Belief& b);

/// True once the MAP confidence strictly exceeds the threshold or `step`
/// reaches the horizon.
bool should_stop(const Belief& b, const WorldConfig& cfg, int step);

StepOutcome step_objective(const Belief& before, const Belief& after, const ActionSet& action,
                           double cost_per_probe);

}  // namespace aifad
