#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "aifad/belief.hpp"
#include "aifad/random.hpp"
#include "aifad/types.hpp"

namespace aifad {

enum class PriorKind { kExact, kUniform };

struct EpisodeOptions {
  PriorKind prior = PriorKind::kExact;
  bool keep_trace = true;
};

struct StepLog {
  std::size_t action_index = 0;
  std::size_t probes = 0;
  double objective = 0.0;  // r(k)
  double entropy_before = 0.0;
  double entropy_after = 0.0;
};

struct EpisodeRecord {
  std::vector<StepLog> steps;  // empty when keep_trace is off
  std::size_t true_hypothesis = 0;
  std::size_t declared_hypothesis = 0;
  double confidence = 0.0;
  int stopping_time = 0;  // K
  std::size_t total_probes = 0;
  bool success = false;
  bool horizon_hit = false;  // stopped by T_max without reaching the threshold
  double initial_entropy = 0.0;
  double final_entropy = 0.0;
  double total_objective = 0.0;  // sum of r(k)
};

/// Everything a learning agent sees about one step.
struct StepContext {
  const Belief& belief_before;
  const Belief& belief_after;
  const ActionSet& action;
  const Observation& observation;
  const StepOutcome& outcome;
  bool done;  // the stopping rule fires on belief_after
};

using ActionChooser = std::function<ActionSet(const Belief&, RandomSource&)>;
using StepHook = std::function<void(const StepContext&)>;

/// Initial belief for an episode.
Belief initial_belief(const WorldConfig& cfg, PriorKind prior);

/// Runs one detection episode: sample the hidden state, then probe with
/// `choose` and update the belief until should_stop fires, and declare the
/// MAP hypothesis. `on_step` (may be empty) sees every transition.
EpisodeRecord run_policy_episode(const WorldConfig& cfg, RandomSource& rng,
                                 const ActionChooser& choose, const StepHook& on_step = {},
                                 const EpisodeOptions& options = {});

}  // namespace aifad
