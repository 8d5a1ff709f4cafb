#include "aifad/episode.hpp"

#include "aifad/env.hpp"

namespace aifad {

Belief initial_belief(const WorldConfig& cfg, PriorKind prior) {
  return prior == PriorKind::kExact ? joint_prior(cfg) : Belief::uniform(cfg.num_hypotheses());
}

EpisodeRecord run_policy_episode(const WorldConfig& cfg, RandomSource& rng,
                                 const ActionChooser& choose, const StepHook& on_step,
                                 const EpisodeOptions& options) {
  cfg.validate();
  EpisodeRecord record;
  const StateVector state = sample_state(cfg, rng);
  record.true_hypothesis = state.hypothesis_index();

  Belief belief = initial_belief(cfg, options.prior);
  record.initial_entropy = entropy(belief);

  int k = 0;
  while (!should_stop(belief, cfg, k)) {
    const ActionSet action = choose(belief, rng);
    const Observation obs = sample_observation(state, action, cfg.flip_prob, rng);
    Belief next = posterior_update(belief, action, obs, cfg.flip_prob);
    const StepOutcome outcome = step_objective(belief, next, action, cfg.cost_per_probe);
    ++k;
    record.total_probes += outcome.probes_used;
    record.total_objective += outcome.reward_objective;
    if (options.keep_trace)
      record.steps.push_back({action.action_index(), outcome.probes_used,
                              outcome.reward_objective, outcome.entropy_before,
                              outcome.entropy_after});
    if (on_step) {
      const bool done = should_stop(next, cfg, k);
      on_step(StepContext{belief, next, action, obs, outcome, done});
    }
    belief = std::move(next);
  }

  const MapEstimate map = map_estimate(belief);
  record.stopping_time = k;
  record.declared_hypothesis = map.hypothesis_index;
  record.confidence = map.confidence;
  record.success = map.hypothesis_index == record.true_hypothesis;
  record.horizon_hit = !(map.confidence > cfg.confidence_threshold);
  record.final_entropy = entropy(belief);
  return record;
}

}  // namespace aifad
