#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aifad {

/// Largest process count the dense 2^N belief representation supports.
inline constexpr int kMaxProcesses = 20;

/// Generative parameters of the sensing problem.
struct WorldConfig {
  int n_processes = 3;
  double p_normal = 0.8;              // q: marginal probability a process is normal
  double correlation = 0.0;           // rho: coupling between processes 1 and 2
  double flip_prob = 0.2;             // p: channel crossover probability
  double cost_per_probe = 0.1;        // lambda
  double confidence_threshold = 0.9;  // pi_upper
  int max_steps = 300;                // T_max

  /// Throws ConfigError when any field is out of range.
  void validate() const;

  std::size_t num_hypotheses() const { return std::size_t{1} << n_processes; }
  std::size_t num_actions() const { return num_hypotheses() - 1; }
};

/// Joint state of the N processes. Process i (1-based) is bit i-1 of the
/// hypothesis index.
class StateVector {
 public:
  static StateVector from_bits(std::vector<std::uint8_t> bits);
  static StateVector from_index(std::size_t hypothesis_index, int n_processes);

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::size_t hypothesis_index() const { return index_; }
  int n_processes() const { return static_cast<int>(bits_.size()); }

  /// State of process `process` (1-based).
  std::uint8_t bit(int process) const { return bits_[static_cast<std::size_t>(process - 1)]; }

  bool operator==(const StateVector&) const = default;

 private:
  StateVector(std::vector<std::uint8_t> bits, std::size_t index)
      : bits_(std::move(bits)), index_(index) {}

  std::vector<std::uint8_t> bits_;
  std::size_t index_;
};

/// Nonempty subset of processes probed in one step.
///
/// The action index is the subset's bitmask minus one, so index 0 is {1},
/// index 1 is {2}, index 2 is {1,2} and index 2^N - 2 probes everything.
class ActionSet {
 public:
  static ActionSet from_index(std::size_t action_index, int n_processes);
  /// `members` are 1-based process indices; any order, no duplicates.
  static ActionSet from_members(std::vector<int> members, int n_processes);

  std::size_t action_index() const { return mask_ - 1; }
  std::uint32_t mask() const { return mask_; }
  int n_processes() const { return n_processes_; }
  /// Sorted 1-based process indices.
  const std::vector<int>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  bool operator==(const ActionSet&) const = default;

 private:
  ActionSet(std::uint32_t mask, int n_processes);

  std::uint32_t mask_;
  int n_processes_;
  std::vector<int> members_;
};

/// Noisy readings for the probed processes, aligned with `action.members()`.
struct Observation {
  ActionSet action;
  std::vector<std::uint8_t> readings;
};

/// Probability vector over the 2^N joint hypotheses.
class Belief {
 public:
  /// Validates entries in [0,1] summing to 1 within 1e-9.
  explicit Belief(std::vector<double> probs);

  static Belief uniform(std::size_t m);
  static Belief one_hot(std::size_t m, std::size_t index);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

 private:
  struct Unchecked {};
  Belief(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}
  friend Belief normalized_belief(std::vector<double> weights);

  std::vector<double> probs_;
};

/// Normalizes nonnegative weights into a Belief. Throws DegenerateBelief on zero mass.
Belief normalized_belief(std::vector<double> weights);

}  // namespace aifad
