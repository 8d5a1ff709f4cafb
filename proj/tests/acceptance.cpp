// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,3,...] [--csv <path>]
//
// --csv writes the metrics of the full default sweep (criterion 9).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "aifad/aif.hpp"
#include "aifad/baseline.hpp"
#include "aifad/belief.hpp"
#include "aifad/env.hpp"
#include "aifad/harness.hpp"
#include "oracles.hpp"

using namespace aifad;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Desk-scale world used throughout: N=3, q=0.8, p=0.2, T_max=300.
WorldConfig desk_world() { return WorldConfig{}; }

ExperimentConfig cell_config(std::vector<AgentKind> agents, std::vector<double> pi,
                             std::vector<double> lambda, std::vector<double> rho, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.world = desk_world();
  cfg.agents = std::move(agents);
  cfg.pi_upper_values = std::move(pi);
  cfg.lambda_values = std::move(lambda);
  cfg.rho_values = std::move(rho);
  cfg.seed = seed;
  return cfg;
}

const MetricsRow& find_row(const std::vector<MetricsRow>& rows, std::string_view agent, double pi,
                           double rho) {
  for (const auto& r : rows)
    if (r.agent == agent && r.pi_upper == pi && r.rho == rho) return r;
  throw std::runtime_error("missing metrics row");
}

double oracle_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x);
  return h;
}

// ---------------------------------------------------------------------------

Verdict bayes_equivalence() {
  const auto start = Clock::now();
  RandomSource rng(101);
  double worst = 0.0;
  long steps = 0;
  for (int e = 0; e < 1000; ++e) {
    WorldConfig w = desk_world();
    w.correlation = rng.uniform();
    Belief belief = joint_prior(w);
    const std::vector<double> prior(belief.probs().begin(), belief.probs().end());
    std::vector<oracle::ProbeRecord> history;
    const auto state = sample_state(w, rng);
    const bool env_readings = e % 2 == 0;
    const int length = 1 + static_cast<int>(rng.uniform_index(40));
    for (int k = 0; k < length; ++k) {
      const auto action = random_action(w, rng);
      Observation obs = sample_observation(state, action, w.flip_prob, rng);
      if (!env_readings)
        for (auto& r : obs.readings) r = rng.bernoulli(0.5);
      history.push_back({action.mask(), obs.readings});
      belief = posterior_update(belief, action, obs, w.flip_prob);
      const auto expected = oracle::full_history_posterior(prior, history, w.flip_prob);
      for (std::size_t h = 0; h < expected.size(); ++h)
        worst = std::max(worst, std::abs(belief[h] - expected[h]));
      ++steps;
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-10 && t < 5.0,
          fmt("max|diff|=%.3g over %ld updates (tol 1e-10), %.2fs (limit 5s)", worst, steps, t)};
}

Verdict gradient_correctness() {
  const auto start = Clock::now();
  RandomSource rng(202);
  int failures = 0;
  long checked = 0;
  auto check = [&](double analytic, double numeric) {
    ++checked;
    if (!oracle::gradients_agree(analytic, numeric, 1e-4, 1e-7)) ++failures;
  };
  auto rand_vec = [&](std::size_t n, double scale) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * (2 * rng.uniform() - 1);
    return v;
  };
  for (int net_i = 0; net_i < 100; ++net_i) {
    // Generic network: forward + smooth loss, parameter gradients.
    std::vector<std::size_t> dims;
    const std::size_t depth = 2 + rng.uniform_index(3);
    for (std::size_t i = 0; i < depth; ++i) dims.push_back(1 + rng.uniform_index(8));
    const nn::Head head = net_i % 2 ? nn::Head::kSoftmax : nn::Head::kLinear;
    nn::Mlp net = nn::Mlp::he_uniform(dims, head, rng);
    for (double& p : net.params()) p += 0.05 * (2 * rng.uniform() - 1);
    const auto x = rand_vec(dims.front(), 1.0);
    const auto c = rand_vec(dims.back(), 1.0);
    auto loss_of = [&](const nn::Mlp& m) {
      const auto out = nn::forward(m, x).output;
      double l = 0.0;
      for (std::size_t j = 0; j < out.size(); ++j) l += c[j] * out[j] + 0.5 * out[j] * out[j];
      return l;
    };
    const auto res = nn::forward(net, x);
    std::vector<double> dout(res.output.size());
    for (std::size_t j = 0; j < dout.size(); ++j) dout[j] = c[j] + res.output[j];
    const auto g = nn::backward(net, res.tape, dout);
    const std::vector<double> theta(net.params().begin(), net.params().end());
    const auto num = oracle::finite_difference(
        [&](std::span<const double> p) {
          nn::Mlp m = net;
          std::copy(p.begin(), p.end(), m.params().begin());
          return loss_of(m);
        },
        theta);
    for (std::size_t i = 0; i < theta.size(); ++i) check(g.values[i], num[i]);

    // Free energy with respect to the policy logits.
    const std::size_t a = 2 + rng.uniform_index(7);
    const auto z = rand_vec(a, 3.0);
    const auto efe = rand_vec(a, 3.0);
    const auto fe = free_energy_from_logits(z, efe);
    const auto fe_num = oracle::finite_difference(
        [&](std::span<const double> zz) {
          double zs = 0.0, gs = 0.0;
          for (std::size_t i = 0; i < a; ++i) {
            zs += std::exp(zz[i]);
            gs += std::exp(-efe[i]);
          }
          double kl = 0.0;
          for (std::size_t i = 0; i < a; ++i) {
            const double q = std::exp(zz[i]) / zs;
            kl += q * std::log(q / (std::exp(-efe[i]) / gs));
          }
          return kl;
        },
        z);
    for (std::size_t i = 0; i < a; ++i) check(fe.logit_gradient[i], fe_num[i]);

    // Bootstrap loss with respect to the EFE outputs.
    const std::size_t action = rng.uniform_index(a);
    const double target = 3 * (2 * rng.uniform() - 1);
    const auto bl = bootstrap_loss(efe, action, target);
    const auto bl_num = oracle::finite_difference(
        [&](std::span<const double> gg) { return (gg[action] - target) * (gg[action] - target); }, efe);
    for (std::size_t i = 0; i < a; ++i) check(bl.output_gradient[i], bl_num[i]);
  }
  const double t = seconds_since(start);
  return {failures == 0 && t < 30.0,
          fmt("%d of %ld gradient entries outside rel 1e-4, %.2fs (limit 30s)", failures, checked, t)};
}

Verdict stopping_rule_calibration() {
  const auto start = Clock::now();
  auto cfg = cell_config({AgentKind::kRandom}, {0.9}, {0.05}, {0.5}, 303);
  cfg.eval_episodes = 5000;
  const auto row = run_sweep(cfg).front();
  const double t = seconds_since(start);
  return {row.success_rate >= 0.85 && t < 120.0,
          fmt("random agent success=%.4f over %zu episodes (need >=0.85), %.2fs (limit 120s)",
              row.success_rate, row.episodes, t)};
}

double combined_se(const MetricsRow& a, const MetricsRow& b) {
  return std::sqrt(a.stopping_time_se * a.stopping_time_se + b.stopping_time_se * b.stopping_time_se);
}

Verdict trend_pi_upper() {
  const auto rows = run_sweep(cell_config({AgentKind::kAif}, {0.8, 0.95}, {0.1}, {0.5}, 404));
  const auto& lo = find_row(rows, "aif", 0.8, 0.5);
  const auto& hi = find_row(rows, "aif", 0.95, 0.5);
  const double se = combined_se(lo, hi);
  const double gap = hi.mean_stopping_time - lo.mean_stopping_time;
  return {gap >= 3 * se, fmt("K(0.95)=%.3f K(0.8)=%.3f gap=%.3f, 3*SE=%.3f", hi.mean_stopping_time,
                             lo.mean_stopping_time, gap, 3 * se)};
}

Verdict trend_rho() {
  const auto rows = run_sweep(cell_config({AgentKind::kAif}, {0.9}, {0.1}, {0.0, 0.9}, 505));
  const auto& indep = find_row(rows, "aif", 0.9, 0.0);
  const auto& corr = find_row(rows, "aif", 0.9, 0.9);
  const double se = combined_se(indep, corr);
  const double gap = indep.mean_stopping_time - corr.mean_stopping_time;
  return {gap >= 2 * se, fmt("K(rho=0)=%.3f K(rho=0.9)=%.3f gap=%.3f, 2*SE=%.3f",
                             indep.mean_stopping_time, corr.mean_stopping_time, gap, 2 * se)};
}

Verdict aif_vs_actor_critic() {
  int holds = 0;
  std::string detail;
  for (std::uint64_t seed : {601, 602, 603}) {
    const auto rows =
        run_sweep(cell_config({AgentKind::kAif, AgentKind::kActorCritic}, {0.9}, {0.2}, {0.5}, seed));
    const auto& aif = find_row(rows, "aif", 0.9, 0.5);
    const auto& ac = find_row(rows, "actor_critic", 0.9, 0.5);
    const bool ok = aif.mean_stopping_time <= ac.mean_stopping_time + 1.0 &&
                    std::abs(aif.success_rate - ac.success_rate) <= 0.05;
    holds += ok;
    detail += fmt("[seed %llu: K %.2f vs %.2f, success %.3f vs %.3f %s] ",
                  static_cast<unsigned long long>(seed), aif.mean_stopping_time,
                  ac.mean_stopping_time, aif.success_rate, ac.success_rate, ok ? "ok" : "no");
  }
  return {holds >= 2, detail + fmt("%d/3 hold (need 2)", holds)};
}

Verdict greedy_sanity() {
  const auto aif_rows = run_sweep(cell_config({AgentKind::kAif}, {0.9}, {0.1}, {0.5}, 707));
  const auto start = Clock::now();
  const auto greedy_rows = run_sweep(cell_config({AgentKind::kGreedy}, {0.9}, {0.1}, {0.5}, 707));
  const double t = seconds_since(start);
  const auto& aif = aif_rows.front();
  const auto& greedy = greedy_rows.front();
  const bool ok = greedy.success_rate >= 0.88 &&
                  greedy.mean_stopping_time <= 2 * aif.mean_stopping_time && t < 60.0;
  return {ok, fmt("greedy success=%.4f (need >=0.88), K=%.3f vs 2*K_aif=%.3f, %.2fs (limit 60s)",
                  greedy.success_rate, greedy.mean_stopping_time, 2 * aif.mean_stopping_time, t)};
}

Verdict telescoping() {
  RandomSource rng(808);
  RandomSource init(809);
  WorldConfig w = desk_world();
  w.correlation = 0.5;
  auto aif = AifAgent::create(3, AifConfig{}, init);
  double worst = 0.0;
  for (int e = 0; e < 1000; ++e) {
    w.cost_per_probe = std::array{0.05, 0.1, 0.2}[e % 3];
    std::vector<double> first, last;
    double sum_r = 0.0;
    std::size_t probes = 0;
    const StepHook hook = [&](const StepContext& s) {
      if (first.empty()) first.assign(s.belief_before.probs().begin(), s.belief_before.probs().end());
      last.assign(s.belief_after.probs().begin(), s.belief_after.probs().end());
      sum_r += s.outcome.reward_objective;
      probes += s.action.size();
    };
    ActionChooser choose;
    switch (e % 3) {
      case 0: choose = [&](const Belief&, RandomSource& r) { return random_action(w, r); }; break;
      case 1: choose = [&](const Belief& b, RandomSource&) { return greedy_entropy_action(b, w); }; break;
      default:
        choose = [&](const Belief& b, RandomSource& r) {
          return select_action(aif, b, r, ActionMode::kSample);
        };
    }
    const auto rec = run_policy_episode(w, rng, choose, hook);
    if (first.empty()) continue;
    const double rhs = oracle_entropy(last) - oracle_entropy(first) +
                       w.cost_per_probe * static_cast<double>(probes);
    worst = std::max({worst, std::abs(sum_r - rhs), std::abs(rec.total_objective - rhs)});
  }
  return {worst <= 1e-9, fmt("max|sum r - (H_K - H_0 + lambda*probes)|=%.3g over 1000 episodes (tol 1e-9)",
                             worst)};
}

Verdict end_to_end_budget(const std::string& csv_path) {
  auto smoke = cell_config({AgentKind::kAif, AgentKind::kActorCritic}, {0.9}, {0.1}, {0.5}, 909);
  smoke.training_episodes = 1000;
  smoke.eval_episodes = 500;
  const auto s0 = Clock::now();
  run_sweep(smoke);
  const double smoke_t = seconds_since(s0);

  ExperimentConfig full;  // defaults: 4x3x3 grid, 10k train, 2k eval, both learning agents
  full.threads = 1;
  const auto f0 = Clock::now();
  const auto rows = run_sweep(full);
  const double full_t = seconds_since(f0);
  if (!csv_path.empty()) emit_csv(rows, csv_path);
  return {smoke_t <= 120.0 && full_t <= 7200.0 && rows.size() == 72,
          fmt("smoke cell %.1fs (limit 120s); full sweep %zu rows in %.1fs on one thread (limit 7200s)",
              smoke_t, rows.size(), full_t)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::string csv_path;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else if (std::strcmp(argv[i], "--csv") == 0 && i + 1 < argc) {
      csv_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--csv path]\n";
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"bayes oracle equivalence", bayes_equivalence},
      {"gradient correctness", gradient_correctness},
      {"stopping-rule calibration", stopping_rule_calibration},
      {"stopping time increases with pi_upper", trend_pi_upper},
      {"stopping time decreases with rho", trend_rho},
      {"aif vs actor-critic", aif_vs_actor_critic},
      {"greedy oracle sanity", greedy_sanity},
      {"telescoping identity", telescoping},
      {"end-to-end budget", [&] { return end_to_end_budget(csv_path); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[i].first
              << " | " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
