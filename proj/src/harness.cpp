#include "aifad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

#include "aifad/errors.hpp"
#include "kv_config.hpp"

namespace aifad {

namespace {

constexpr const char* kManifestName = "manifest.txt";

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string world_text(const WorldConfig& w) {
  std::ostringstream os;
  os << "n_processes=" << w.n_processes << '\n'
     << "p_normal=" << format_g17(w.p_normal) << '\n'
     << "correlation=" << format_g17(w.correlation) << '\n'
     << "flip_prob=" << format_g17(w.flip_prob) << '\n'
     << "cost_per_probe=" << format_g17(w.cost_per_probe) << '\n'
     << "confidence_threshold=" << format_g17(w.confidence_threshold) << '\n'
     << "max_steps=" << w.max_steps << '\n';
  return os.str();
}

/// Returns true if `kv` was a world key and was applied.
bool apply_world_key(WorldConfig& w, const detail::KeyValue& kv) {
  if (kv.key == "n_processes") w.n_processes = static_cast<int>(detail::parse_int(kv));
  else if (kv.key == "p_normal") w.p_normal = detail::parse_double(kv);
  else if (kv.key == "correlation") w.correlation = detail::parse_double(kv);
  else if (kv.key == "flip_prob") w.flip_prob = detail::parse_double(kv);
  else if (kv.key == "cost_per_probe") w.cost_per_probe = detail::parse_double(kv);
  else if (kv.key == "confidence_threshold") w.confidence_threshold = detail::parse_double(kv);
  else if (kv.key == "max_steps") w.max_steps = static_cast<int>(detail::parse_int(kv));
  else return false;
  return true;
}

bool parse_bool(const detail::KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  throw ConfigError("line " + std::to_string(kv.line) + ": " + kv.key + " expects true or false");
}

int parse_positive_int(const detail::KeyValue& kv) {
  const auto v = detail::parse_int(kv);
  if (v < 1 || v > 1'000'000'000)
    throw ConfigError("line " + std::to_string(kv.line) + ": " + kv.key + " must be positive");
  return static_cast<int>(v);
}

double standard_error_of_mean(std::uint64_t sum, std::uint64_t sum_sq, std::uint64_t n) {
  if (n < 2) return 0.0;
  // Exact integer numerator of the unbiased variance.
  const unsigned __int128 a = static_cast<unsigned __int128>(n) * sum_sq;
  const unsigned __int128 b = static_cast<unsigned __int128>(sum) * sum;
  const double numerator = a > b ? static_cast<double>(a - b) : 0.0;
  const double nd = static_cast<double>(n);
  return std::sqrt(numerator / (nd * (nd - 1.0)) / nd);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(detail::trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view agent_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::kAif: return "aif";
    case AgentKind::kActorCritic: return "actor_critic";
    case AgentKind::kGreedy: return "greedy";
    case AgentKind::kRandom: return "random";
  }
  return "unknown";
}

AgentKind parse_agent_kind(std::string_view name) {
  for (AgentKind k : {AgentKind::kAif, AgentKind::kActorCritic, AgentKind::kGreedy, AgentKind::kRandom})
    if (agent_name(k) == name) return k;
  throw ConfigError("unknown agent kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Experiment config

void ExperimentConfig::validate() const {
  world.validate();
  if (agents.empty()) throw ConfigError("agents must be nonempty");
  if (pi_upper_values.empty() || lambda_values.empty() || rho_values.empty())
    throw ConfigError("sweep axes must be nonempty");
  for (double v : pi_upper_values)
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("pi_upper values must lie in (0,1)");
  for (double v : lambda_values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("lambda values must be >= 0");
  for (double v : rho_values)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("rho values must lie in [0,1]");
  if (training_episodes < 0) throw ConfigError("training_episodes must be >= 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (aif.hidden.empty() || actor_critic.hidden.empty())
    throw ConfigError("hidden_units must be nonempty");
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  for (const auto& kv : detail::read_key_values(in)) {
    if (apply_world_key(cfg.world, kv)) continue;
    if (kv.key == "agents") {
      cfg.agents.clear();
      for (const auto& name : detail::parse_word_list(kv)) cfg.agents.push_back(parse_agent_kind(name));
    } else if (kv.key == "pi_upper_values") {
      cfg.pi_upper_values = detail::parse_double_list(kv);
    } else if (kv.key == "lambda_values") {
      cfg.lambda_values = detail::parse_double_list(kv);
    } else if (kv.key == "rho_values") {
      cfg.rho_values = detail::parse_double_list(kv);
    } else if (kv.key == "training_episodes") {
      const auto v = detail::parse_int(kv);
      if (v < 0) throw ConfigError("training_episodes must be >= 0");
      cfg.training_episodes = static_cast<int>(v);
    } else if (kv.key == "eval_episodes") {
      cfg.eval_episodes = parse_positive_int(kv);
    } else if (kv.key == "seed") {
      cfg.seed = detail::parse_u64(kv);
    } else if (kv.key == "greedy_eval") {
      cfg.greedy_eval = parse_bool(kv);
    } else if (kv.key == "threads") {
      cfg.threads = parse_positive_int(kv);
    } else if (kv.key == "hidden_units") {
      std::vector<std::size_t> hidden;
      for (double d : detail::parse_double_list(kv)) {
        if (d < 1 || d != std::floor(d)) throw ConfigError("hidden_units must be positive integers");
        hidden.push_back(static_cast<std::size_t>(d));
      }
      cfg.aif.hidden = hidden;
      cfg.actor_critic.hidden = hidden;
    } else if (kv.key == "policy_lr") {
      cfg.aif.policy_learning_rate = detail::parse_double(kv);
    } else if (kv.key == "efe_lr") {
      cfg.aif.efe_learning_rate = detail::parse_double(kv);
    } else if (kv.key == "actor_lr") {
      cfg.actor_critic.actor_learning_rate = detail::parse_double(kv);
    } else if (kv.key == "critic_lr") {
      cfg.actor_critic.critic_learning_rate = detail::parse_double(kv);
    } else if (kv.key == "discount") {
      cfg.actor_critic.discount = detail::parse_double(kv);
      if (!(cfg.actor_critic.discount >= 0.0 && cfg.actor_critic.discount <= 1.0))
        throw ConfigError("discount must lie in [0,1]");
    } else {
      throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_experiment_config(in);
}

std::uint64_t seed_with_env_override(std::uint64_t seed) {
  const char* env = std::getenv("AIF_SEED");
  if (env == nullptr || *env == '\0') return seed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') throw ConfigError("AIF_SEED must be a nonnegative integer");
  return v;
}

// ---------------------------------------------------------------------------
// Metrics

EpisodeSummary summarize(const EpisodeRecord& r) {
  return {r.success, r.stopping_time, r.total_probes, r.horizon_hit};
}

MetricsRow aggregate(std::string agent, double pi_upper, double lambda, double rho,
                     std::uint64_t seed, std::span<const EpisodeSummary> episodes) {
  MetricsRow row{std::move(agent), pi_upper, lambda, rho};
  row.seed = seed;
  row.episodes = episodes.size();
  if (episodes.empty()) return row;
  std::uint64_t successes = 0, horizon = 0;
  std::uint64_t k_sum = 0, k_sq = 0, probe_sum = 0, probe_sq = 0;
  for (const auto& e : episodes) {
    successes += e.success;
    horizon += e.horizon_hit;
    const auto k = static_cast<std::uint64_t>(e.stopping_time);
    k_sum += k;
    k_sq += k * k;
    probe_sum += e.total_probes;
    probe_sq += static_cast<std::uint64_t>(e.total_probes) * e.total_probes;
  }
  const std::uint64_t n = episodes.size();
  const double nd = static_cast<double>(n);
  row.success_rate = static_cast<double>(successes) / nd;
  row.success_se = std::sqrt(row.success_rate * (1.0 - row.success_rate) / nd);
  row.mean_stopping_time = static_cast<double>(k_sum) / nd;
  row.stopping_time_se = standard_error_of_mean(k_sum, k_sq, n);
  row.mean_probes = static_cast<double>(probe_sum) / nd;
  row.probes_se = standard_error_of_mean(probe_sum, probe_sq, n);
  row.horizon_rate = static_cast<double>(horizon) / nd;
  return row;
}

// ---------------------------------------------------------------------------
// Agent wrapper

Agent Agent::create(AgentKind kind, const WorldConfig& world, const AifConfig& aif_cfg,
                    const AcConfig& ac_cfg, RandomSource& rng) {
  world.validate();
  Agent agent(kind);
  if (kind == AgentKind::kAif) agent.aif_ = AifAgent::create(world.n_processes, aif_cfg, rng);
  if (kind == AgentKind::kActorCritic) agent.ac_ = AcAgent::create(world.n_processes, ac_cfg, rng);
  return agent;
}

EpisodeRecord Agent::run(const WorldConfig& world, RandomSource& rng, bool train, ActionMode mode,
                         const EpisodeOptions& options) {
  switch (kind_) {
    case AgentKind::kAif: return run_episode(*aif_, world, rng, train, mode, options);
    case AgentKind::kActorCritic: return run_ac_episode(*ac_, world, rng, train, mode, options);
    case AgentKind::kGreedy: return run_greedy_episode(world, rng, options);
    case AgentKind::kRandom: return run_random_episode(world, rng, options);
  }
  throw std::logic_error("unreachable agent kind");
}

void Agent::train(const WorldConfig& world, int episodes, RandomSource& rng) {
  if (!learns()) return;
  const EpisodeOptions options{.keep_trace = false};
  for (int i = 0; i < episodes; ++i) run(world, rng, true, ActionMode::kSample, options);
  training_episodes_ += episodes;
}

std::vector<EpisodeSummary> Agent::evaluate(const WorldConfig& world, int episodes,
                                            RandomSource& rng, ActionMode mode) {
  const EpisodeOptions options{.keep_trace = false};
  std::vector<EpisodeSummary> out;
  out.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int i = 0; i < episodes; ++i) out.push_back(summarize(run(world, rng, false, mode, options)));
  return out;
}

std::string config_hash(const WorldConfig& world) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : world_text(world)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Agent::save(const std::filesystem::path& dir, const WorldConfig& world,
                 std::uint64_t seed) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  if (aif_) {
    nn::save_mlp(dir / "policy.aifn", aif_->policy_net);
    nn::save_mlp(dir / "efe.aifn", aif_->efe_net);
  }
  if (ac_) {
    nn::save_mlp(dir / "actor.aifn", ac_->actor_net);
    nn::save_mlp(dir / "critic.aifn", ac_->critic_net);
  }
  std::ofstream out(dir / kManifestName);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << "agent=" << agent_name(kind_) << '\n'
      << "config_hash=" << config_hash(world) << '\n'
      << "training_episodes=" << training_episodes_ << '\n'
      << "seed=" << seed << '\n';
  if (ac_) out << "discount=" << format_g17(ac_->discount) << '\n';
  out << world_text(world);
  if (!out) throw IoError("failed writing manifest in " + dir.string());
}

Agent::Loaded Agent::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw IoError("cannot open " + (dir / kManifestName).string());
  WorldConfig world;
  std::optional<AgentKind> kind;
  std::string hash;
  std::uint64_t seed = 0;
  int episodes = 0;
  double discount = AcConfig{}.discount;
  for (const auto& kv : detail::read_key_values(in)) {
    if (apply_world_key(world, kv)) continue;
    if (kv.key == "agent") kind = parse_agent_kind(kv.value);
    else if (kv.key == "config_hash") hash = kv.value;
    else if (kv.key == "seed") seed = detail::parse_u64(kv);
    else if (kv.key == "training_episodes") episodes = static_cast<int>(detail::parse_int(kv));
    else if (kv.key == "discount") discount = detail::parse_double(kv);
    else throw ConfigError("manifest: unknown key '" + kv.key + "'");
  }
  if (!kind) throw ConfigError("manifest: missing agent kind");
  world.validate();
  if (!hash.empty() && hash != config_hash(world))
    throw ConfigError("manifest: config hash does not match the stored world config");

  Agent agent(*kind);
  agent.training_episodes_ = episodes;
  if (*kind == AgentKind::kAif) {
    auto policy = nn::load_mlp(dir / "policy.aifn");
    auto efe = nn::load_mlp(dir / "efe.aifn");
    if (policy.input_dim() != world.num_hypotheses() || policy.output_dim() != world.num_actions() ||
        efe.input_dim() != world.num_hypotheses() || efe.output_dim() != world.num_actions() ||
        policy.head() != nn::Head::kSoftmax || efe.head() != nn::Head::kLinear)
      throw ConfigError("checkpoint networks do not match the world config");
    nn::AdamState popt(policy.num_params(), {.learning_rate = AifConfig{}.policy_learning_rate});
    nn::AdamState eopt(efe.num_params(), {.learning_rate = AifConfig{}.efe_learning_rate});
    agent.aif_ = AifAgent{std::move(policy), std::move(efe), std::move(popt), std::move(eopt)};
  } else if (*kind == AgentKind::kActorCritic) {
    auto actor = nn::load_mlp(dir / "actor.aifn");
    auto critic = nn::load_mlp(dir / "critic.aifn");
    if (actor.input_dim() != world.num_hypotheses() || actor.output_dim() != world.num_actions() ||
        critic.input_dim() != world.num_hypotheses() || critic.output_dim() != 1 ||
        actor.head() != nn::Head::kSoftmax || critic.head() != nn::Head::kLinear)
      throw ConfigError("checkpoint networks do not match the world config");
    nn::AdamState aopt(actor.num_params(), {.learning_rate = AcConfig{}.actor_learning_rate});
    nn::AdamState copt(critic.num_params(), {.learning_rate = AcConfig{}.critic_learning_rate});
    agent.ac_ = AcAgent{std::move(actor), std::move(critic), std::move(aopt), std::move(copt), discount};
  }
  return Loaded{std::move(agent), world, seed, hash};
}

// ---------------------------------------------------------------------------
// Sweep

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t cell_index) {
  return mix_seed(master_seed ^ mix_seed(0x5eedULL + cell_index));
}

std::vector<MetricsRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Task {
    AgentKind kind;
    std::size_t cell;
    WorldConfig world;
  };
  std::vector<Task> tasks;
  std::size_t cell = 0;
  for (double pi_upper : cfg.pi_upper_values)
    for (double lambda : cfg.lambda_values)
      for (double rho : cfg.rho_values) {
        WorldConfig w = cfg.world;
        w.confidence_threshold = pi_upper;
        w.cost_per_probe = lambda;
        w.correlation = rho;
        w.validate();
        for (AgentKind kind : cfg.agents) tasks.push_back({kind, cell, w});
        ++cell;
      }

  std::vector<MetricsRow> rows(tasks.size());
  const ActionMode mode = cfg.greedy_eval ? ActionMode::kGreedy : ActionMode::kSample;
  auto run_task = [&](std::size_t i) {
    const Task& t = tasks[i];
    const std::uint64_t seed = cell_seed(cfg.seed, t.cell);
    const RandomSource base(seed);
    RandomSource init_rng = base.fork(0);
    RandomSource train_rng = base.fork(1);
    RandomSource eval_rng = base.fork(2);
    Agent agent = Agent::create(t.kind, t.world, cfg.aif, cfg.actor_critic, init_rng);
    agent.train(t.world, cfg.training_episodes, train_rng);
    const auto episodes = agent.evaluate(t.world, cfg.eval_episodes, eval_rng, mode);
    rows[i] = aggregate(std::string(agent_name(t.kind)), t.world.confidence_threshold,
                        t.world.cost_per_probe, t.world.correlation, seed, episodes);
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), tasks.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  sort_rows(rows);
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

void sort_rows(std::vector<MetricsRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.agent, a.pi_upper, a.lambda, a.rho) <
           std::tie(b.agent, b.pi_upper, b.lambda, b.rho);
  });
}

std::string format_csv(std::vector<MetricsRow> rows) {
  sort_rows(rows);
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.agent << ',' << format_g6(r.pi_upper) << ',' << format_g6(r.lambda) << ','
       << format_g6(r.rho) << ',' << format_g6(r.success_rate) << ',' << format_g6(r.success_se)
       << ',' << format_g6(r.mean_stopping_time) << ',' << format_g6(r.stopping_time_se) << ','
       << format_g6(r.mean_probes) << ',' << format_g6(r.probes_se) << ','
       << format_g6(r.horizon_rate) << ',' << r.episodes << ',' << r.seed << '\n';
  }
  return os.str();
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_csv(rows);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MetricsRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCsvHeader)
    throw IoError("metrics CSV: missing or unexpected header");
  std::vector<MetricsRow> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 13)
      throw IoError("metrics CSV line " + std::to_string(number) + ": expected 13 columns");
    try {
      MetricsRow r;
      r.agent = cells[0];
      r.pi_upper = std::stod(cells[1]);
      r.lambda = std::stod(cells[2]);
      r.rho = std::stod(cells[3]);
      r.success_rate = std::stod(cells[4]);
      r.success_se = std::stod(cells[5]);
      r.mean_stopping_time = std::stod(cells[6]);
      r.stopping_time_se = std::stod(cells[7]);
      r.mean_probes = std::stod(cells[8]);
      r.probes_se = std::stod(cells[9]);
      r.horizon_rate = std::stod(cells[10]);
      r.episodes = std::stoull(cells[11]);
      r.seed = std::stoull(cells[12]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError("metrics CSV line " + std::to_string(number) + ": malformed number");
    }
  }
  return rows;
}

std::vector<MetricsRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in);
}

}  // namespace aifad
