// Command-line driver: train, eval, sweep and plot.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aifad/env.hpp"
#include "aifad/errors.hpp"
#include "aifad/harness.hpp"
#include "aifad/plot.hpp"

namespace fs = std::filesystem;
using namespace aifad;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

int cmd_train(const std::string& config, const std::string& agent_kind, const std::string& out,
              int episodes) {
  const WorldFile file = load_world_config(config);
  const std::uint64_t seed = seed_with_env_override(file.seed);
  const AgentKind kind = parse_agent_kind(agent_kind);
  const RandomSource base(seed);
  RandomSource init_rng = base.fork(0);
  RandomSource train_rng = base.fork(1);
  Agent agent = Agent::create(kind, file.world, AifConfig{}, AcConfig{}, init_rng);
  agent.train(file.world, episodes, train_rng);
  agent.save(out, file.world, seed);
  std::cout << "trained " << agent_name(kind) << " for " << agent.training_episodes()
            << " episodes; checkpoint written to " << out << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, int episodes, bool greedy) {
  auto loaded = Agent::load(checkpoint);
  const std::uint64_t seed = seed_with_env_override(loaded.seed);
  RandomSource eval_rng = RandomSource(seed).fork(2);
  const auto results = loaded.agent.evaluate(loaded.world, episodes, eval_rng,
                                             greedy ? ActionMode::kGreedy : ActionMode::kSample);
  const MetricsRow row =
      aggregate(std::string(agent_name(loaded.agent.kind())), loaded.world.confidence_threshold,
                loaded.world.cost_per_probe, loaded.world.correlation, seed, results);
  std::cout << format_csv({row});
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& out, int threads) {
  ExperimentConfig cfg = load_experiment_config(config);
  cfg.seed = seed_with_env_override(cfg.seed);
  if (threads > 0) cfg.threads = threads;
  const auto rows = run_sweep(cfg);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create directory " + out + ": " + ec.message());
  const fs::path csv = fs::path(out) / "metrics.csv";
  emit_csv(rows, csv);
  std::cout << "wrote " << rows.size() << " rows to " << csv.string() << '\n';
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& metric_name, std::string out) {
  const Metric metric = parse_metric(metric_name);
  const auto rows = read_csv(csv);
  if (out.empty()) out = fs::path(csv).parent_path().string();
  if (out.empty()) out = ".";
  for (const auto& path : emit_plots(rows, metric, out)) std::cout << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anomaly detection by controlled sensing with active-inference agents"};
  app.require_subcommand(1);

  std::string train_config, train_agent = "aif", train_out;
  int train_episodes = 10000;
  auto* train = app.add_subcommand("train", "Train an agent and write a checkpoint directory");
  train->add_option("--config", train_config, "World config file (key=value)")->required();
  train->add_option("--agent", train_agent, "aif | actor_critic | greedy | random");
  train->add_option("--out", train_out, "Checkpoint directory")->required();
  train->add_option("--episodes", train_episodes, "Training episodes")->check(CLI::NonNegativeNumber);

  std::string eval_checkpoint;
  int eval_episodes = 2000;
  bool eval_greedy = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and print one metrics row");
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint directory")->required();
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_flag("--greedy", eval_greedy, "Take the most probable action instead of sampling");

  std::string sweep_config, sweep_out;
  int sweep_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a (pi_upper, lambda, rho) sweep and write metrics.csv");
  sweep->add_option("--config", sweep_config, "Experiment config file (key=value)")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--threads", sweep_threads, "Worker threads (overrides config)")->check(CLI::PositiveNumber);

  std::string plot_csv, plot_metric = "success", plot_out;
  auto* plot = app.add_subcommand("plot", "Render SVG panels (one per lambda) from metrics.csv");
  plot->add_option("--csv", plot_csv, "metrics.csv from a sweep")->required();
  plot->add_option("--metric", plot_metric, "success | stopping_time | probes")
      ->check(CLI::IsMember({"success", "stopping_time", "probes"}));
  plot->add_option("--out", plot_out, "Output directory (default: next to the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_config, train_agent, train_out, train_episodes);
    if (*eval) return cmd_eval(eval_checkpoint, eval_episodes, eval_greedy);
    if (*sweep) return cmd_sweep(sweep_config, sweep_out, sweep_threads);
    if (*plot) return cmd_plot(plot_csv, plot_metric, plot_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EmptyInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
