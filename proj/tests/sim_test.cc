#include "ahsecagg/sim.h"

#include <gtest/gtest.h>

#include <numeric>

namespace ahsecagg {
namespace {

SimConfig base_config(uint32_t n, uint32_t t, size_t m, Mode mode) {
  SimConfig cfg;
  cfg.protocol.n = n;
  cfg.protocol.t = t;
  cfg.protocol.m = m;
  cfg.protocol.mode = mode;
  cfg.protocol.mask_r = 3;
  cfg.seed = 42;
  return cfg;
}

TEST(Sim, SemiHonestExactSum) {
  SimConfig cfg = base_config(6, 4, 5, Mode::kSemiHonest);
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success) << out.result.abort_reason;
  EXPECT_EQ(out.result.u3, (std::vector<uint32_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(out.result.output, out.expected_sum(out.result.u3, cfg.protocol.p));
}

TEST(Sim, ActiveExactSum) {
  SimConfig cfg = base_config(6, 5, 3, Mode::kActiveAdversary);
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success) << out.result.abort_reason;
  EXPECT_EQ(out.result.u4, out.result.u3);
  EXPECT_EQ(out.result.output, out.expected_sum(out.result.u3, cfg.protocol.p));
}

TEST(Sim, DropoutAtMaskingRound) {
  SimConfig cfg = base_config(10, 7, 4, Mode::kSemiHonest);
  cfg.dropout.round = 2;
  cfg.dropout.rate = 0.3;
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success) << out.result.abort_reason;
  EXPECT_EQ(out.result.u3.size(), 7u);
  EXPECT_EQ(out.result.output, out.expected_sum(out.result.u3, cfg.protocol.p));
}

TEST(Sim, ExplicitVictims) {
  SimConfig cfg = base_config(5, 3, 2, Mode::kSemiHonest);
  cfg.dropout.round = 2;
  cfg.dropout.victims = {1, 3};
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success) << out.result.abort_reason;
  EXPECT_EQ(out.result.u3, (std::vector<uint32_t>{0, 2, 4}));
  EXPECT_EQ(out.result.output, out.expected_sum({0, 2, 4}, cfg.protocol.p));
}

TEST(Sim, AbortWhenSurvivorsBelowThreshold) {
  SimConfig cfg = base_config(5, 4, 2, Mode::kSemiHonest);
  cfg.dropout.round = 2;
  cfg.dropout.victims = {1, 3};
  SimOutcome out = run_aggregation(cfg);
  EXPECT_FALSE(out.result.success);
  EXPECT_EQ(out.result.abort_round, 2);
}

TEST(Sim, DeterministicTranscriptAndCounters) {
  SimConfig cfg = base_config(7, 5, 3, Mode::kActiveAdversary);
  cfg.dropout.round = 2;
  cfg.dropout.rate = 0.2;
  SimOutcome a = run_aggregation(cfg);
  SimOutcome b = run_aggregation(cfg);
  EXPECT_EQ(transcript_csv(a.metrics.transcript), transcript_csv(b.metrics.transcript));
  EXPECT_EQ(a.result.output, b.result.output);
  ASSERT_EQ(a.metrics.party.size(), b.metrics.party.size());
  for (const auto& [id, c] : a.metrics.party)
    EXPECT_EQ(counter_values(c), counter_values(b.metrics.party.at(id))) << "party " << id;

  SimConfig other = cfg;
  other.seed = 43;
  SimOutcome c = run_aggregation(other);
  EXPECT_NE(a.result.output, c.result.output);
}

TEST(Sim, ByteConservation) {
  SimConfig cfg = base_config(8, 6, 3, Mode::kActiveAdversary);
  cfg.dropout.round = 2;
  cfg.dropout.victims = {2, 5};
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success);
  uint64_t sent = 0, received = 0;
  for (const auto& [id, c] : out.metrics.party) {
    sent += c.bytes_sent;
    received += c.bytes_received;
  }
  EXPECT_EQ(sent, received + out.metrics.undelivered_bytes);
  EXPECT_GT(out.metrics.undelivered_bytes, 0u);  // the victims' queues

  uint64_t transcript_bytes = 0;
  for (const auto& line : out.metrics.transcript) transcript_bytes += line.bytes;
  EXPECT_EQ(sent, transcript_bytes);
}

TEST(Sim, CounterSemantics) {
  const uint32_t n = 6, t = 4;
  const size_t m = 5;
  SimConfig cfg = base_config(n, t, m, Mode::kSemiHonest);
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success);

  for (uint32_t id = 0; id < n; ++id) {
    const Counters& c = out.metrics.party.at(id);
    EXPECT_EQ(c.modexp_setup, 1u) << id;                // one key generation
    EXPECT_EQ(c.modexp_agreement, uint64_t{n} - 1) << id;
    EXPECT_EQ(c.shamir_sharings, 1u) << id;
    EXPECT_EQ(c.shamir_reconstructions, 0u) << id;
    EXPECT_EQ(c.unmask_field_ops, 0u) << id;
    EXPECT_EQ(c.prg_element_expansions, 0u) << id;
  }
  const Counters& s = out.metrics.server();
  EXPECT_EQ(s.shamir_reconstructions, 1u);  // one reconstruction regardless of n
  EXPECT_EQ(s.lagrange_terms, uint64_t{t});
  EXPECT_EQ(s.unmask_field_ops, 2 * uint64_t{m});
  EXPECT_EQ(s.modexp_agreement, 0u);
  EXPECT_EQ(s.group_inversions, 0u);
}

TEST(Sim, ReconstructionCostInvariantToDropouts) {
  SimConfig cfg = base_config(12, 8, 3, Mode::kSemiHonest);
  SimOutcome full = run_aggregation(cfg);
  cfg.dropout.round = 2;
  cfg.dropout.rate = 0.3;
  SimOutcome dropped = run_aggregation(cfg);
  ASSERT_TRUE(full.result.success);
  ASSERT_TRUE(dropped.result.success);
  EXPECT_EQ(full.metrics.server().shamir_reconstructions,
            dropped.metrics.server().shamir_reconstructions);
  EXPECT_EQ(full.metrics.server().lagrange_terms, dropped.metrics.server().lagrange_terms);
  EXPECT_EQ(full.metrics.server().unmask_field_ops, dropped.metrics.server().unmask_field_ops);
}

TEST(Sim, TranscriptShape) {
  SimConfig cfg = base_config(4, 3, 2, Mode::kActiveAdversary);
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success);
  std::string csv = transcript_csv(out.metrics.transcript);
  EXPECT_NE(csv.find("round,sender,receiver,tag,bytes,valid_sig"), std::string::npos);
  EXPECT_NE(csv.find("masked_input"), std::string::npos);
  EXPECT_NE(csv.find("share_sum"), std::string::npos);
  for (const auto& line : out.metrics.transcript) EXPECT_TRUE(line.valid_sig);
  // 4 adverts + 4 broadcasts + 12 shares + 4 routes + 4 masked + 4 lists +
  // 4 list sigs + 4 echoes + 4 share sums
  EXPECT_EQ(out.metrics.transcript.size(), 44u);
}

// ---- Adversary scenarios ------------------------------------------------------

TEST(Adversary, ForgeSignatureAbortsBeforeShareSums) {
  SimConfig cfg = base_config(6, 5, 2, Mode::kActiveAdversary);
  cfg.adversary.scenario = Scenario::kForgeSignature;
  cfg.adversary.forge_target = 3;
  SimOutcome out = run_aggregation(cfg);
  EXPECT_FALSE(out.result.success);
  EXPECT_EQ(out.result.abort_round, 1);
  EXPECT_EQ(out.scenario.user_aborts.size(), cfg.protocol.n);
  for (const auto& [id, reason] : out.scenario.user_aborts)
    EXPECT_EQ(reason, "bad advertisement signature") << id;
  for (const auto& line : out.metrics.transcript) {
    EXPECT_NE(line.tag, MsgTag::kShareSum);
    EXPECT_NE(line.tag, MsgTag::kMaskedInput);
  }
}

TEST(Adversary, ForgeSignatureRequiresActiveMode) {
  SimConfig cfg = base_config(6, 4, 2, Mode::kSemiHonest);
  cfg.adversary.scenario = Scenario::kForgeSignature;
  EXPECT_THROW(run_aggregation(cfg), ConfigError);
}

TEST(Adversary, TamperCiphertextAbortsBeforeMasking) {
  for (Mode mode : {Mode::kSemiHonest, Mode::kActiveAdversary}) {
    SimConfig cfg = base_config(6, mode == Mode::kSemiHonest ? 4 : 5, 2, mode);
    cfg.adversary.scenario = Scenario::kTamperCiphertext;
    SimOutcome out = run_aggregation(cfg);
    EXPECT_FALSE(out.result.success);
    EXPECT_EQ(out.result.abort_round, 2);
    EXPECT_EQ(out.scenario.user_aborts.size(), cfg.protocol.n);
    for (const auto& line : out.metrics.transcript) {
      EXPECT_NE(line.tag, MsgTag::kMaskedInput);
      EXPECT_NE(line.tag, MsgTag::kShareSum);
    }
  }
}

TEST(Adversary, SplitViewNeverCollectsTwoQuorums) {
  SimConfig cfg = base_config(9, 7, 2, Mode::kActiveAdversary);
  cfg.adversary.scenario = Scenario::kSplitView;
  SimOutcome out = run_aggregation(cfg);
  EXPECT_FALSE(out.result.success);
  // One half is below t, so its members abort and never sign or reveal.
  EXPECT_FALSE(out.scenario.reconstruct_a_possible && out.scenario.reconstruct_b_possible);
  EXPECT_LT(std::min(out.scenario.sigs_list_a, out.scenario.sigs_list_b), cfg.protocol.t);
  EXPECT_LT(out.scenario.sharesums_list_a + out.scenario.sharesums_list_b, 2 * cfg.protocol.t);
}

TEST(Adversary, SplitViewExplicitPartition) {
  SimConfig cfg = base_config(6, 5, 2, Mode::kActiveAdversary);
  cfg.adversary.scenario = Scenario::kSplitView;
  cfg.adversary.view_a = {0, 1, 2, 3, 4};
  cfg.adversary.view_b = {5};
  SimOutcome out = run_aggregation(cfg);
  EXPECT_EQ(out.scenario.sigs_list_a, 5u);
  EXPECT_EQ(out.scenario.sigs_list_b, 0u);  // a one-member list is below t
  EXPECT_TRUE(out.scenario.reconstruct_a_possible);
  EXPECT_FALSE(out.scenario.reconstruct_b_possible);
}

TEST(Adversary, SplitViewCountingModelMatchesSimulation) {
  SimConfig cfg = base_config(8, 6, 2, Mode::kActiveAdversary);
  cfg.adversary.scenario = Scenario::kSplitView;
  cfg.adversary.view_a = {0, 1, 2, 3, 4, 5};
  cfg.adversary.view_b = {6, 7};
  SimOutcome out = run_aggregation(cfg);
  auto [sigs_a, sigs_b] =
      split_view_signature_counts(cfg.adversary.view_a, cfg.adversary.view_b, cfg.protocol.t);
  EXPECT_EQ(out.scenario.sigs_list_a, sigs_a);
  EXPECT_EQ(out.scenario.sigs_list_b, sigs_b);
}

TEST(Adversary, ReplayRegistrationRejected) {
  SimConfig cfg = base_config(5, 4, 2, Mode::kActiveAdversary);
  cfg.adversary.scenario = Scenario::kReplayRegistration;
  cfg.adversary.forge_target = 2;
  SimOutcome out = run_aggregation(cfg);
  EXPECT_TRUE(out.scenario.replay_rejected);
  // The board kept the original key, so the run is unaffected.
  ASSERT_TRUE(out.result.success) << out.result.abort_reason;
  EXPECT_EQ(out.result.output, out.expected_sum(out.result.u3, cfg.protocol.p));
}

TEST(Adversary, WithholdBroadcastVictimsAbortNonVictimsFinish) {
  SimConfig cfg = base_config(8, 6, 2, Mode::kActiveAdversary);
  cfg.adversary.scenario = Scenario::kWithholdBroadcast;
  cfg.adversary.withhold_from = {1, 4};
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success) << out.result.abort_reason;
  EXPECT_EQ(out.scenario.user_aborts.size(), 2u);
  EXPECT_TRUE(out.scenario.user_aborts.count(1));
  EXPECT_TRUE(out.scenario.user_aborts.count(4));
  // The victims' masked inputs were already in and still count.
  EXPECT_EQ(out.result.u3.size(), 8u);
  EXPECT_EQ(out.result.u5.size(), 6u);
  EXPECT_EQ(out.result.output, out.expected_sum(out.result.u3, cfg.protocol.p));
}

TEST(Sim, ScenarioNames) {
  EXPECT_EQ(scenario_from_name("split_view"), Scenario::kSplitView);
  EXPECT_EQ(scenario_from_name("none"), Scenario::kNone);
  EXPECT_STREQ(scenario_name(Scenario::kTamperCiphertext), "tamper_ciphertext");
  EXPECT_THROW(scenario_from_name("bogus"), ConfigError);
}

TEST(Sim, WallTimesPopulated) {
  SimConfig cfg = base_config(4, 3, 2, Mode::kSemiHonest);
  cfg.latency_ms = 235.0;
  SimOutcome out = run_aggregation(cfg);
  ASSERT_TRUE(out.result.success);
  // Rounds 0, 1, 2 and 4 carry traffic; round 3 is skipped in this mode.
  EXPECT_GT(out.metrics.round_wall_ms[0], 2 * 235.0 - 1);
  EXPECT_EQ(out.metrics.round_wall_ms[3], 0.0);
  EXPECT_GT(out.metrics.total_wall_ms(), 4 * 2 * 235.0 - 1);
}

}  // namespace
}  // namespace ahsecagg
