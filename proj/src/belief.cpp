#include "aifad/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aifad/errors.hpp"

namespace aifad {

namespace {
constexpr double kSimplexTolerance = 1e-9;
constexpr double kLogFloor = 1e-300;
}  // namespace

Belief::Belief(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("Belief: empty probability vector");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream os;
      os << "Belief: entry out of [0,1]: " << p;
      throw std::invalid_argument(os.str());
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    std::ostringstream os;
    os << "Belief: entries sum to " << total;
    throw std::invalid_argument(os.str());
  }
}

Belief Belief::uniform(std::size_t m) {
  if (m == 0) throw std::invalid_argument("Belief: empty probability vector");
  return Belief(std::vector<double>(m, 1.0 / static_cast<double>(m)), Unchecked{});
}

Belief Belief::one_hot(std::size_t m, std::size_t index) {
  if (index >= m) throw std::invalid_argument("Belief: one-hot index out of range");
  std::vector<double> probs(m, 0.0);
  probs[index] = 1.0;
  return Belief(std::move(probs), Belief::Unchecked{});
}

Belief normalized_belief(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("normalized_belief: weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateBelief("belief has zero total mass");
  for (double& w : weights) w /= total;
  return Belief(std::move(weights), Belief::Unchecked{});
}

double observation_likelihood(std::size_t hypothesis_index, const Observation& obs,
                              double flip_prob) {
  double likelihood = 1.0;
  const auto& members = obs.action.members();
  for (std::size_t j = 0; j < members.size(); ++j) {
    const unsigned bit = (hypothesis_index >> (members[j] - 1)) & 1U;
    likelihood *= (obs.readings[j] == bit) ? 1.0 - flip_prob : flip_prob;
  }
  return likelihood;
}

Belief posterior_update(const Belief& prior, const ActionSet& action, const Observation& obs,
                        double flip_prob) {
  if (!(obs.action == action))
    throw std::invalid_argument("posterior_update: observation belongs to a different action");
  if (obs.readings.size() != action.size())
    throw std::invalid_argument("posterior_update: reading count does not match action");
  if (prior.size() != (std::size_t{1} << action.n_processes()))
    throw std::invalid_argument("posterior_update: belief size does not match N");

  std::vector<double> weights(prior.size());
  for (std::size_t h = 0; h < weights.size(); ++h)
    weights[h] = prior[h] * observation_likelihood(h, obs, flip_prob);
  try {
    return normalized_belief(std::move(weights));
  } catch (const DegenerateBelief&) {
    throw DegenerateBelief("observation is impossible under every hypothesis with prior mass");
  }
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(std::max(p, kLogFloor));
  return h;
}

double entropy(const Belief& b) { return entropy(b.probs()); }

MapEstimate map_estimate(const Belief& b) {
  const auto probs = b.probs();
  const auto it = std::max_element(probs.begin(), probs.end());
  return {static_cast<std::size_t>(it - probs.begin()), *it};
}

bool should_stop(const Belief& b, const WorldConfig& cfg, int step) {
  return map_estimate(b).confidence > cfg.confidence_threshold || step >= cfg.max_steps;
}

StepOutcome step_objective(const Belief& before, const Belief& after, const ActionSet& action,
                           double cost_per_probe) {
  StepOutcome out;
  out.entropy_before = entropy(before);
  out.entropy_after = entropy(after);
  out.probes_used = action.size();
  out.reward_objective = out.entropy_after - out.entropy_before +
                         cost_per_probe * static_cast<double>(out.probes_used);
  return out;
}

}  // namespace aifad
