#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aifad/aif.hpp"
#include "aifad/baseline.hpp"
#include "aifad/episode.hpp"
#include "aifad/types.hpp"

namespace aifad {

enum class AgentKind { kAif, kActorCritic, kGreedy, kRandom };

std::string_view agent_name(AgentKind kind);
/// Accepts `aif`, `actor_critic`, `greedy`, `random`; ConfigError otherwise.
AgentKind parse_agent_kind(std::string_view name);

struct ExperimentConfig {
  WorldConfig world;
  std::vector<AgentKind> agents = {AgentKind::kAif, AgentKind::kActorCritic};
  std::vector<double> pi_upper_values = {0.8, 0.85, 0.9, 0.95};
  std::vector<double> lambda_values = {0.05, 0.1, 0.2};
  std::vector<double> rho_values = {0.0, 0.5, 0.9};
  int training_episodes = 10000;
  int eval_episodes = 2000;
  std::uint64_t seed = 1;
  bool greedy_eval = false;
  int threads = 1;
  AifConfig aif;
  AcConfig actor_critic;

  void validate() const;
};

/// World keys plus: agents, pi_upper_values, lambda_values, rho_values,
/// training_episodes, eval_episodes, seed, greedy_eval, threads,
/// hidden_units, policy_lr, efe_lr, actor_lr, critic_lr, discount.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Applies AIF_SEED from the environment, if set, over `seed`.
std::uint64_t seed_with_env_override(std::uint64_t seed);

/// The per-episode numbers a metrics row needs.
struct EpisodeSummary {
  bool success = false;
  int stopping_time = 0;
  std::size_t total_probes = 0;
  bool horizon_hit = false;
};

EpisodeSummary summarize(const EpisodeRecord& record);

struct MetricsRow {
  std::string agent;
  double pi_upper = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double success_rate = 0.0;
  double success_se = 0.0;
  double mean_stopping_time = 0.0;
  double stopping_time_se = 0.0;
  double mean_probes = 0.0;
  double probes_se = 0.0;
  double horizon_rate = 0.0;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
};

/// Aggregates episodes into a row. Counts are summed as integers, so the
/// result does not depend on episode order.
MetricsRow aggregate(std::string agent, double pi_upper, double lambda, double rho,
                     std::uint64_t seed, std::span<const EpisodeSummary> episodes);

/// A trained or non-learning agent behind one interface.
class Agent {
 public:
  static Agent create(AgentKind kind, const WorldConfig& world, const AifConfig& aif_cfg,
                      const AcConfig& ac_cfg, RandomSource& rng);

  AgentKind kind() const { return kind_; }
  bool learns() const { return kind_ == AgentKind::kAif || kind_ == AgentKind::kActorCritic; }

  EpisodeRecord run(const WorldConfig& world, RandomSource& rng, bool train, ActionMode mode,
                    const EpisodeOptions& options = {});

  /// Runs `episodes` training episodes (no-op for non-learning agents).
  void train(const WorldConfig& world, int episodes, RandomSource& rng);

  std::vector<EpisodeSummary> evaluate(const WorldConfig& world, int episodes, RandomSource& rng,
                                       ActionMode mode);

  const AifAgent* aif() const { return aif_ ? &*aif_ : nullptr; }
  const AcAgent* actor_critic() const { return ac_ ? &*ac_ : nullptr; }
  AifAgent* aif() { return aif_ ? &*aif_ : nullptr; }
  AcAgent* actor_critic() { return ac_ ? &*ac_ : nullptr; }

  int training_episodes() const { return training_episodes_; }

  /// Writes the networks (`policy.aifn`/`efe.aifn` or `actor.aifn`/`critic.aifn`)
  /// and a key=value `manifest.txt` into `dir`.
  void save(const std::filesystem::path& dir, const WorldConfig& world, std::uint64_t seed) const;

  struct Loaded;
  static Loaded load(const std::filesystem::path& dir);

 private:
  explicit Agent(AgentKind kind) : kind_(kind) {}

  AgentKind kind_;
  std::optional<AifAgent> aif_;
  std::optional<AcAgent> ac_;
  int training_episodes_ = 0;
};

struct Agent::Loaded {
  Agent agent;
  WorldConfig world;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// FNV-1a hash of the canonical world-config text, as 16 hex digits.
std::string config_hash(const WorldConfig& world);

/// Seed for sweep cell `cell_index`.
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t cell_index);

/// Trains a fresh agent per (pi_upper, lambda, rho) cell and evaluates it.
/// Cells may run on several threads; the output does not depend on that.
std::vector<MetricsRow> run_sweep(const ExperimentConfig& cfg);

/// Lexicographic on (agent, pi_upper, lambda, rho).
void sort_rows(std::vector<MetricsRow>& rows);

inline constexpr std::string_view kCsvHeader =
    "agent,pi_upper,lambda,rho,success_rate,success_se,mean_K,K_se,mean_probes,probes_se,"
    "horizon_rate,episodes,seed";

std::string format_csv(std::vector<MetricsRow> rows);
void emit_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);
std::vector<MetricsRow> parse_csv(std::istream& in);
std::vector<MetricsRow> read_csv(const std::filesystem::path& path);

}  // namespace aifad
