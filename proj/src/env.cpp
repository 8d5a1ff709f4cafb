#include "aifad/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "aifad/errors.hpp"
#include "kv_config.hpp"

namespace aifad {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

std::string describe(const char* field, double value) {
  std::ostringstream os;
  os << "invalid " << field << ": " << value;
  return os.str();
}

}  // namespace

void WorldConfig::validate() const {
  if (n_processes < 1 || n_processes > kMaxProcesses)
    throw ConfigError(describe("n_processes", n_processes));
  if (!is_probability(p_normal)) throw ConfigError(describe("p_normal", p_normal));
  if (!is_probability(correlation)) throw ConfigError(describe("correlation", correlation));
  if (!is_probability(flip_prob)) throw ConfigError(describe("flip_prob", flip_prob));
  if (!(cost_per_probe >= 0.0) || !std::isfinite(cost_per_probe))
    throw ConfigError(describe("cost_per_probe", cost_per_probe));
  if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0))
    throw ConfigError(describe("confidence_threshold", confidence_threshold));
  if (max_steps < 1) throw ConfigError(describe("max_steps", max_steps));
}

// ---------------------------------------------------------------------------
// StateVector / ActionSet encoding

StateVector StateVector::from_bits(std::vector<std::uint8_t> bits) {
  if (bits.empty() || bits.size() > static_cast<std::size_t>(kMaxProcesses))
    throw std::invalid_argument("StateVector: bit count out of range");
  std::size_t index = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw std::invalid_argument("StateVector: bits must be 0 or 1");
    index |= std::size_t{bits[i]} << i;
  }
  return StateVector(std::move(bits), index);
}

StateVector StateVector::from_index(std::size_t hypothesis_index, int n_processes) {
  if (n_processes < 1 || n_processes > kMaxProcesses)
    throw std::invalid_argument("StateVector: n_processes out of range");
  if (hypothesis_index >= (std::size_t{1} << n_processes))
    throw std::invalid_argument("StateVector: hypothesis index out of range");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_processes));
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (hypothesis_index >> i) & 1U;
  return StateVector(std::move(bits), hypothesis_index);
}

ActionSet::ActionSet(std::uint32_t mask, int n_processes)
    : mask_(mask), n_processes_(n_processes) {
  for (int i = 0; i < n_processes; ++i)
    if (mask & (1U << i)) members_.push_back(i + 1);
}

ActionSet ActionSet::from_index(std::size_t action_index, int n_processes) {
  if (n_processes < 1 || n_processes > kMaxProcesses)
    throw std::invalid_argument("ActionSet: n_processes out of range");
  if (action_index >= (std::size_t{1} << n_processes) - 1)
    throw std::invalid_argument("ActionSet: action index out of range");
  return ActionSet(static_cast<std::uint32_t>(action_index + 1), n_processes);
}

ActionSet ActionSet::from_members(std::vector<int> members, int n_processes) {
  if (n_processes < 1 || n_processes > kMaxProcesses)
    throw std::invalid_argument("ActionSet: n_processes out of range");
  if (members.empty()) throw std::invalid_argument("ActionSet: empty action");
  std::uint32_t mask = 0;
  for (int m : members) {
    if (m < 1 || m > n_processes) throw std::invalid_argument("ActionSet: process out of range");
    const std::uint32_t bit = 1U << (m - 1);
    if (mask & bit) throw std::invalid_argument("ActionSet: duplicate process");
    mask |= bit;
  }
  return ActionSet(mask, n_processes);
}

// ---------------------------------------------------------------------------
// Generative model

Belief joint_prior(const WorldConfig& cfg) {
  cfg.validate();
  const double q = cfg.p_normal;
  const double rho = cfg.correlation;
  const int n = cfg.n_processes;

  // Pair table indexed by (s1 | s2 << 1).
  double pair[4];
  if (n >= 2) {
    pair[0] = q * q + rho * q * (1 - q);
    pair[1] = q * (1 - q) * (1 - rho);  // s1=1, s2=0
    pair[2] = q * (1 - q) * (1 - rho);  // s1=0, s2=1
    pair[3] = (1 - q) * (1 - q) + rho * q * (1 - q);
  }

  std::vector<double> probs(cfg.num_hypotheses());
  for (std::size_t h = 0; h < probs.size(); ++h) {
    double p;
    int first_independent;
    if (n >= 2) {
      p = pair[h & 3U];
      first_independent = 2;
    } else {
      p = (h & 1U) ? 1 - q : q;
      first_independent = 1;
    }
    for (int i = first_independent; i < n; ++i) p *= ((h >> i) & 1U) ? 1 - q : q;
    probs[h] = p;
  }
  return normalized_belief(std::move(probs));
}

StateVector sample_state(const WorldConfig& cfg, RandomSource& rng) {
  const Belief prior = joint_prior(cfg);
  const std::size_t h = rng.categorical(prior.probs());
  return StateVector::from_index(h, cfg.n_processes);
}

Observation sample_observation(const StateVector& state, const ActionSet& action,
                               double flip_prob, RandomSource& rng) {
  if (action.n_processes() != state.n_processes())
    throw std::invalid_argument("sample_observation: action and state disagree on N");
  Observation obs{action, {}};
  obs.readings.reserve(action.size());
  for (int process : action.members()) {
    const std::uint8_t truth = state.bit(process);
    obs.readings.push_back(rng.bernoulli(flip_prob) ? static_cast<std::uint8_t>(1 - truth) : truth);
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Config file

WorldFile parse_world_config(std::istream& in) {
  WorldFile out;
  for (const auto& kv : detail::read_key_values(in)) {
    if (kv.key == "n_processes") out.world.n_processes = static_cast<int>(detail::parse_int(kv));
    else if (kv.key == "p_normal") out.world.p_normal = detail::parse_double(kv);
    else if (kv.key == "correlation") out.world.correlation = detail::parse_double(kv);
    else if (kv.key == "flip_prob") out.world.flip_prob = detail::parse_double(kv);
    else if (kv.key == "cost_per_probe") out.world.cost_per_probe = detail::parse_double(kv);
    else if (kv.key == "confidence_threshold") out.world.confidence_threshold = detail::parse_double(kv);
    else if (kv.key == "max_steps") out.world.max_steps = static_cast<int>(detail::parse_int(kv));
    else if (kv.key == "seed") out.seed = detail::parse_u64(kv);
    else throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
  }
  out.world.validate();
  return out;
}

WorldFile load_world_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_world_config(in);
}

}  // namespace aifad
