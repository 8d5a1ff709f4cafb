#include <gtest/gtest.h>

#include <cmath>

#include "aifad/aif.hpp"
#include "aifad/belief.hpp"
#include "aifad/env.hpp"
#include "oracles.hpp"

using namespace aifad;

namespace {

// Zeroes every parameter and sets the final-layer biases, so the network
// outputs (or logits) are `values` regardless of input.
void set_constant_output(nn::Mlp& net, const std::vector<double>& values) {
  std::fill(net.params().begin(), net.params().end(), 0.0);
  const std::size_t last = net.num_layers() - 1;
  for (std::size_t j = 0; j < values.size(); ++j) net.bias(last, j) = values[j];
}

AifAgent small_agent(int n, std::uint64_t seed, AifConfig cfg = {}) {
  RandomSource rng(seed);
  cfg.hidden = {16, 16};
  return AifAgent::create(n, cfg, rng);
}

AifStepTrace make_trace(const Belief& before, const Belief& after, std::size_t action, int n,
                        double r_k, bool terminal) {
  const auto a = ActionSet::from_index(action, n);
  return AifStepTrace{before, after, a, Observation{a, std::vector<std::uint8_t>(a.size(), 0)},
                      r_k, 0.0, 0.0, terminal};
}

}  // namespace

TEST(SelectAction, OneHotPolicyAlwaysPicksIt) {
  auto agent = small_agent(3, 1);
  std::vector<double> logits(7, 0.0);
  logits[4] = 800.0;
  set_constant_output(agent.policy_net, logits);
  RandomSource rng(2);
  for (int i = 0; i < 1000; ++i)
    ASSERT_EQ(select_action(agent, Belief::uniform(8), rng, ActionMode::kSample).action_index(), 4u);
  EXPECT_EQ(select_action(agent, Belief::uniform(8), rng, ActionMode::kGreedy).action_index(), 4u);
}

TEST(SelectAction, UniformPolicyFrequencies) {
  auto agent = small_agent(3, 1);
  set_constant_output(agent.policy_net, std::vector<double>(7, 0.0));
  RandomSource rng(3);
  std::vector<double> counts(7, 0.0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i)
    counts[select_action(agent, Belief::uniform(8), rng, ActionMode::kSample).action_index()] += 1;
  for (double c : counts) EXPECT_TRUE(oracle::within_three_sigma(c, kDraws, 1.0 / 7.0)) << c;
}

TEST(SelectAction, GreedyArgmax) {
  EXPECT_EQ(argmax_action(std::vector<double>{0.2, 0.5, 0.3}), 1u);
  EXPECT_EQ(argmax_action(std::vector<double>{0.4, 0.2, 0.4}), 0u);
  auto agent = small_agent(2, 4);
  set_constant_output(agent.policy_net, {std::log(0.2), std::log(0.5), std::log(0.3)});
  RandomSource rng(1);
  EXPECT_EQ(select_action(agent, Belief::uniform(4), rng, ActionMode::kGreedy).action_index(), 1u);
}

TEST(EfeTarget, ZeroNetworkGivesReward) {
  auto agent = small_agent(3, 5);
  set_constant_output(agent.efe_net, std::vector<double>(7, 0.0));
  const auto t = make_trace(Belief::uniform(8), Belief::uniform(8), 2, 3, 0.37, false);
  EXPECT_EQ(efe_target(agent, t), 0.37);
}

TEST(EfeTarget, ConstantNetworkAddsConstant) {
  auto agent = small_agent(3, 5);
  set_constant_output(agent.efe_net, std::vector<double>(7, -1.25));
  const auto t = make_trace(Belief::uniform(8), Belief::uniform(8), 2, 3, 0.5, false);
  EXPECT_NEAR(efe_target(agent, t), 0.5 - 1.25, 1e-14);
}

TEST(EfeTarget, TwoActionBoltzmannExpectation) {
  const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
  const double expected = (e1 * 1 + e2 * 2) / (e1 + e2);
  EXPECT_NEAR(boltzmann_expected_efe(std::vector<double>{1.0, 2.0}), expected, 1e-15);
  EXPECT_NEAR(expected, 1.2689, 1e-4);

  auto agent2 = small_agent(2, 6);
  set_constant_output(agent2.efe_net, {1.0, 2.0, 1e6});
  const auto t = make_trace(Belief::uniform(4), Belief::uniform(4), 0, 2, 0.5, false);
  // The third action carries no Boltzmann weight.
  EXPECT_NEAR(efe_target(agent2, t), 0.5 + expected, 1e-12);
}

TEST(EfeTarget, TerminalStepDropsBootstrap) {
  auto agent = small_agent(3, 7);
  set_constant_output(agent.efe_net, std::vector<double>(7, 4.0));
  const auto t = make_trace(Belief::uniform(8), Belief::one_hot(8, 0), 6, 3, -1.5, true);
  EXPECT_EQ(efe_target(agent, t), -1.5);
}

TEST(FreeEnergy, IdenticalDistributionsGiveZero) {
  // q = softmax(z), Q = softmax(-G) with G = -z
  const std::vector<double> z{0.3, -1.2, 2.0, 0.0};
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) g[i] = -z[i] + 5.0;
  EXPECT_NEAR(free_energy_from_logits(z, g).value, 0.0, 1e-14);
}

TEST(FreeEnergy, HandKl) {
  const auto fe = free_energy_from_logits(std::vector<double>{std::log(0.75), std::log(0.25)},
                                          std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(fe.value, 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-14);
  EXPECT_NEAR(fe.value, 0.13081, 1e-5);
  EXPECT_NEAR(fe.policy[0], 0.75, 1e-15);
  EXPECT_NEAR(fe.action_prior[0], 0.5, 1e-15);
}

TEST(FreeEnergy, NonNegativeAndGradientMatchesFiniteDifferences) {
  RandomSource rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(14);
    std::vector<double> z(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = 4 * (2 * rng.uniform() - 1);
      g[i] = 4 * (2 * rng.uniform() - 1);
    }
    const auto fe = free_energy_from_logits(z, g);
    EXPECT_GE(fe.value, 0.0);
    const auto numeric = oracle::finite_difference(
        [&](std::span<const double> x) {
          // Independent KL evaluation.
          double zmax = *std::max_element(x.begin(), x.end());
          double gmin = *std::min_element(g.begin(), g.end());
          double zs = 0.0, gs = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            zs += std::exp(x[i] - zmax);
            gs += std::exp(-(g[i] - gmin));
          }
          double kl = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double q = std::exp(x[i] - zmax) / zs;
            const double prior = std::exp(-(g[i] - gmin)) / gs;
            kl += q * std::log(q / prior);
          }
          return kl;
        },
        z);
    for (std::size_t i = 0; i < n; ++i)
      ASSERT_TRUE(oracle::gradients_agree(fe.logit_gradient[i], numeric[i]))
          << fe.logit_gradient[i] << " vs " << numeric[i];
  }
}

TEST(FreeEnergy, AgentPolicyIsOnSimplex) {
  auto agent = small_agent(3, 12);
  RandomSource rng(13);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> w(8);
    for (double& x : w) x = rng.uniform();
    const auto fe = variational_free_energy(agent, normalized_belief(w));
    double s = 0.0;
    for (double q : fe.policy) s += q;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_GE(fe.value, 0.0);
  }
}

TEST(BootstrapLoss, ValueAndGradient) {
  const auto loss = bootstrap_loss(std::vector<double>{1.0, 3.0, -2.0}, 1, 0.5);
  EXPECT_DOUBLE_EQ(loss.value, 6.25);
  EXPECT_EQ(loss.output_gradient, (std::vector<double>{0.0, 5.0, 0.0}));
  const auto zero = bootstrap_loss(std::vector<double>{1.0, 3.0}, 0, 1.0);
  EXPECT_EQ(zero.value, 0.0);
  for (double g : zero.output_gradient) EXPECT_EQ(g, 0.0);
}

TEST(TrainStep, ZeroLearningRatesLeaveNetworksUnchanged) {
  AifConfig cfg;
  cfg.policy_learning_rate = 0.0;
  cfg.efe_learning_rate = 0.0;
  auto agent = small_agent(3, 14, cfg);
  const auto before = agent;
  const auto t = make_trace(Belief::uniform(8), Belief::one_hot(8, 1), 3, 3, 0.2, false);
  train_step(agent, t);
  EXPECT_TRUE(agent.policy_net == before.policy_net);
  EXPECT_TRUE(agent.efe_net == before.efe_net);
}

TEST(TrainStep, MatchingTargetLeavesEfeNetwork) {
  AifConfig cfg;
  cfg.efe_learning_rate = 1e-2;
  auto agent = small_agent(3, 15, cfg);
  const Belief before = Belief::uniform(8);
  const double g_a = nn::forward(agent.efe_net, before.probs()).output[3];
  const auto t = make_trace(before, Belief::one_hot(8, 2), 3, 3, g_a, true);
  const auto efe_before = agent.efe_net;
  const auto stats = train_step(agent, t);
  EXPECT_EQ(stats.bootstrap_loss, 0.0);
  EXPECT_TRUE(agent.efe_net == efe_before);
}

TEST(TrainStep, RegressesTowardFrozenTarget) {
  AifConfig cfg;
  cfg.efe_learning_rate = 1e-3;
  auto agent = small_agent(3, 16, cfg);
  RandomSource rng(17);
  std::vector<double> w(8);
  for (double& x : w) x = rng.uniform();
  const Belief b = normalized_belief(w);
  const auto t = make_trace(b, Belief::one_hot(8, 0), 5, 3, 2.0, true);
  const double first = train_step(agent, t).bootstrap_loss;
  double last = first;
  for (int k = 1; k < 1000; ++k) last = train_step(agent, t).bootstrap_loss;
  EXPECT_GT(first, 0.0);
  EXPECT_LE(last * 10.0, first);
}

TEST(TrainStep, Deterministic) {
  auto a = small_agent(3, 18);
  auto b = small_agent(3, 18);
  const auto t = make_trace(Belief::uniform(8), Belief::one_hot(8, 4), 1, 3, 0.1, false);
  for (int k = 0; k < 10; ++k) {
    train_step(a, t);
    train_step(b, t);
  }
  EXPECT_TRUE(a.policy_net == b.policy_net);
  EXPECT_TRUE(a.efe_net == b.efe_net);
}

TEST(RunEpisode, NoiselessProbeAllStopsAfterOneStep) {
  WorldConfig w;
  w.flip_prob = 0.0;
  w.correlation = 0.5;
  auto agent = small_agent(3, 19);
  std::vector<double> logits(7, 0.0);
  logits[6] = 800.0;
  set_constant_output(agent.policy_net, logits);
  RandomSource rng(20);
  for (int e = 0; e < 200; ++e) {
    const auto rec = run_episode(agent, w, rng, false);
    ASSERT_EQ(rec.stopping_time, 1);
    ASSERT_TRUE(rec.success);
    ASSERT_EQ(rec.total_probes, 3u);
  }
}

TEST(RunEpisode, LowThresholdStopsImmediately) {
  WorldConfig w;
  w.confidence_threshold = 0.05;
  auto agent = small_agent(3, 21);
  RandomSource rng(22);
  for (int e = 0; e < 50; ++e) {
    const auto rec = run_episode(agent, w, rng, true);
    EXPECT_EQ(rec.stopping_time, 0);
    EXPECT_EQ(rec.declared_hypothesis, 0u);
    EXPECT_EQ(rec.total_probes, 0u);
    EXPECT_TRUE(rec.steps.empty());
  }
}

TEST(RunEpisode, UntrainedRecordsAreConsistent) {
  WorldConfig w;
  w.correlation = 0.5;
  RandomSource init(23);
  auto agent = AifAgent::create(3, AifConfig{}, init);
  RandomSource rng(24);
  for (int e = 0; e < 200; ++e) {
    const auto rec = run_episode(agent, w, rng, false);
    ASSERT_LE(rec.stopping_time, w.max_steps);
    ASSERT_EQ(rec.steps.size(), static_cast<std::size_t>(rec.stopping_time));
    std::size_t probes = 0;
    double objective = 0.0;
    for (const auto& s : rec.steps) {
      probes += s.probes;
      objective += s.objective;
      ASSERT_EQ(s.probes, ActionSet::from_index(s.action_index, 3).size());
    }
    EXPECT_EQ(probes, rec.total_probes);
    EXPECT_NEAR(objective, rec.total_objective, 1e-9);
    EXPECT_EQ(rec.success, rec.declared_hypothesis == rec.true_hypothesis);
    EXPECT_EQ(rec.horizon_hit, !(rec.confidence > w.confidence_threshold));
  }
}

TEST(RunEpisode, UniformPolicySuccessControlledByStoppingRule) {
  WorldConfig w;
  auto agent = small_agent(3, 25);
  set_constant_output(agent.policy_net, std::vector<double>(7, 0.0));
  RandomSource rng(26);
  int successes = 0;
  constexpr int kEpisodes = 2000;
  for (int e = 0; e < kEpisodes; ++e) successes += run_episode(agent, w, rng, false).success;
  EXPECT_GE(static_cast<double>(successes) / kEpisodes, 0.85);
}

TEST(RunEpisode, RejectsMismatchedAgent) {
  WorldConfig w;
  w.n_processes = 4;
  auto agent = small_agent(3, 27);
  RandomSource rng(28);
  EXPECT_THROW(run_episode(agent, w, rng, false), std::invalid_argument);
}
