#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>

#include "aifad/random.hpp"
#include "aifad/types.hpp"

namespace aifad {

/// Exact prior over all 2^N hypotheses. Processes 1 and 2 are coupled by
/// `correlation`; every other process is independent with marginal q.
Belief joint_prior(const WorldConfig& cfg);

/// Draws a hidden joint state from joint_prior(cfg).
StateVector sample_state(const WorldConfig& cfg, RandomSource& rng);

/// Each reading equals the true bit with probability 1 - flip_prob.
Observation sample_observation(const StateVector& state, const ActionSet& action,
                               double flip_prob, RandomSource& rng);

struct WorldFile {
  WorldConfig world;
  std::uint64_t seed = 0;
};

/// Parses `key=value` lines (`#` starts a comment). Accepted keys are the
/// WorldConfig field names plus `seed`; anything else is a ConfigError.
WorldFile parse_world_config(std::istream& in);
WorldFile load_world_config(const std::filesystem::path& path);

}  // namespace aifad
