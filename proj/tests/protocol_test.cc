#include "ahsecagg/protocol.h"

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace ahsecagg {
namespace {

ProtocolConfig small_config(Mode mode) {
  ProtocolConfig cfg;
  cfg.n = 3;
  cfg.t = 2;
  cfg.m = 2;
  cfg.mode = mode;
  if (mode == Mode::kActiveAdversary) {
    cfg.n = 4;
    cfg.t = 3;  // floor(2n/3) + 1
  }
  cfg.mask_r = 3;
  return cfg;
}

TEST(ProtocolConfig, Validation) {
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  EXPECT_NO_THROW(cfg.validate());

  ProtocolConfig bad = cfg;
  bad.t = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.t = 3;  // t must stay below n
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.n = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.m = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.mask_r = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.mask_r = bad.p;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.mask_group = &Group::desk_dh();  // order != p
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ProtocolConfig, ActiveModeThreshold) {
  ProtocolConfig cfg = small_config(Mode::kActiveAdversary);
  cfg.n = 9;
  cfg.t = 7;  // floor(18/3) + 1
  EXPECT_NO_THROW(cfg.validate());
  cfg.t = 6;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.mode = Mode::kSemiHonest;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Codecs, AdvertRoundTrip) {
  Bytes pk1{1, 2, 3};
  Bytes pk2{9};
  Bytes payload = advert_payload({pk1, pk2});
  auto pks = parse_advert(payload);
  ASSERT_EQ(pks.size(), 2u);
  EXPECT_EQ(pks[0], pk1);
  EXPECT_EQ(pks[1], pk2);

  payload.push_back(0);  // trailing byte
  EXPECT_THROW(parse_advert(payload), DecodeError);
  EXPECT_THROW(parse_advert(advert_payload({})), DecodeError);
}

TEST(Codecs, KeyBroadcastRoundTrip) {
  std::vector<BroadcastEntry> entries{{4, {1, 2}, {3}}, {7, {5}, {}}};
  auto back = parse_key_broadcast(key_broadcast_payload(entries));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, 4u);
  EXPECT_EQ(back[0].advert, (Bytes{1, 2}));
  EXPECT_EQ(back[0].sig, Bytes{3});
  EXPECT_EQ(back[1].id, 7u);
  EXPECT_TRUE(back[1].sig.empty());
}

TEST(Codecs, EncShareAndPlaintext) {
  Bytes payload = enc_share_payload(3, 8, {0xaa, 0xbb});
  uint32_t from, to;
  Bytes ct;
  parse_enc_share(payload, &from, &to, &ct);
  EXPECT_EQ(from, 3u);
  EXPECT_EQ(to, 8u);
  EXPECT_EQ(ct, (Bytes{0xaa, 0xbb}));

  Bytes pt = share_plaintext(3, 8, {12345});
  EXPECT_EQ(parse_share_plaintext(pt, 3, 8), std::vector<uint64_t>{12345});
  EXPECT_THROW(parse_share_plaintext(pt, 3, 9), DecodeError);
  EXPECT_THROW(parse_share_plaintext(pt, 4, 8), DecodeError);
}

TEST(Codecs, ShareRouteRoundTrip) {
  std::vector<uint32_t> u2{1, 2, 5};
  std::vector<RouteEntry> entries{{1, {7, 7}, {}}, {5, {8}, {9}}};
  std::vector<uint32_t> u2_back;
  std::vector<RouteEntry> back;
  parse_share_route(share_route_payload(u2, entries), &u2_back, &back);
  EXPECT_EQ(u2_back, u2);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].sender, 5u);
  EXPECT_EQ(back[1].ciphertext, Bytes{8});
}

TEST(Codecs, SigEchoAndRecovery) {
  std::vector<EchoEntry> echo{{2, {1}}, {9, {2, 3}}};
  auto echo_back = parse_sig_echo(sig_echo_payload(echo));
  ASSERT_EQ(echo_back.size(), 2u);
  EXPECT_EQ(echo_back[1].id, 9u);

  std::vector<RecoveryEntry> dropped{{1, {5}}};
  std::vector<RecoveryEntry> surviving{{2, {6}}, {3, {7}}};
  std::vector<RecoveryEntry> d_back, s_back;
  parse_recovery(recovery_payload(dropped, surviving), &d_back, &s_back);
  ASSERT_EQ(d_back.size(), 1u);
  ASSERT_EQ(s_back.size(), 2u);
  EXPECT_EQ(s_back[1].id, 3u);
  EXPECT_EQ(s_back[1].value, Bytes{7});
}

TEST(SignedFrame, BindsHeaderAndPayload) {
  Rng rng(5);
  SigKeyPair keys = ds_gen(rng);
  RoundMessage msg;
  msg.round = 2;
  msg.sender = 11;
  msg.receiver = kServerId;
  msg.tag = MsgTag::kMaskedInput;
  msg.payload = {1, 2, 3};
  msg.signature = ds_sign_message(keys.sk, msg);
  EXPECT_TRUE(ds_verify_message(keys.pk, msg));

  RoundMessage other = msg;
  other.round = 3;  // replay into a later round
  EXPECT_FALSE(ds_verify_message(keys.pk, other));
  other = msg;
  other.sender = 12;
  EXPECT_FALSE(ds_verify_message(keys.pk, other));
  other = msg;
  other.tag = MsgTag::kShareSum;
  EXPECT_FALSE(ds_verify_message(keys.pk, other));
  other = msg;
  other.payload[0] ^= 1;
  EXPECT_FALSE(ds_verify_message(keys.pk, other));
  other = msg;
  other.receiver = 0;  // receiver is routing metadata, not covered
  EXPECT_TRUE(ds_verify_message(keys.pk, other));
}

TEST(ListDigest, DistinguishesLists) {
  Bytes a = list_digest({1, 2, 3});
  Bytes b = list_digest({1, 2, 4});
  EXPECT_EQ(a.size(), 32u);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, list_digest({1, 2, 3}));
}

// Drives a full exchange by hand, delivering each party's messages directly.
struct ManualRun {
  explicit ManualRun(const ProtocolConfig& cfg, uint64_t seed = 7) : config(cfg) {
    Rng root(seed);
    server = std::make_unique<AhServer>(config, &pki, root.child(1000));
    server->register_keys(&pki);
    for (uint32_t id = 0; id < config.n; ++id) {
      std::vector<uint64_t> x(config.m);
      for (size_t k = 0; k < config.m; ++k) x[k] = (id + 1) * 100 + k;
      inputs.push_back(x);
      users.push_back(std::make_unique<AhUser>(config, id, x, root.child(id), &pki));
      users.back()->register_keys(&pki);
    }
  }

  // Runs rounds [0, 4], returning the server result. mutate_user_out lets a
  // test tamper with outgoing user messages.
  const AggregationResult& run(
      const std::function<void(int, uint32_t, std::vector<RoundMessage>&)>& mutate = {}) {
    std::map<uint32_t, std::vector<RoundMessage>> boxes;
    for (int round = 0; round <= 4; ++round) {
      if (config.mode == Mode::kSemiHonest && round == 3) continue;
      std::vector<RoundMessage> to_server;
      for (uint32_t id = 0; id < config.n; ++id) {
        if (silent_from_round.count(id) && round >= silent_from_round[id]) continue;
        auto outs = users[id]->on_round(round, boxes[id]);
        if (mutate) mutate(round, id, outs);
        for (auto& m : outs) to_server.push_back(std::move(m));
      }
      boxes.clear();
      for (auto& m : server->on_round(round, to_server)) boxes[m.receiver].push_back(m);
      if (server->aborted()) break;
    }
    return server->result();
  }

  std::vector<uint64_t> expected_sum(const std::vector<uint32_t>& ids) const {
    Field f(config.p);
    std::vector<uint64_t> sum(config.m, 0);
    for (uint32_t id : ids)
      for (size_t k = 0; k < config.m; ++k) sum[k] = f.add(sum[k], inputs[id][k]);
    return sum;
  }

  ProtocolConfig config;
  BulletinBoard pki;
  std::unique_ptr<AhServer> server;
  std::vector<std::unique_ptr<AhUser>> users;
  std::vector<std::vector<uint64_t>> inputs;
  std::map<uint32_t, int> silent_from_round;
};

TEST(Protocol, SemiHonestFullRun) {
  ManualRun run(small_config(Mode::kSemiHonest));
  const auto& result = run.run();
  ASSERT_TRUE(result.success) << result.abort_reason;
  EXPECT_EQ(result.u1, (std::vector<uint32_t>{0, 1, 2}));
  EXPECT_EQ(result.u3, (std::vector<uint32_t>{0, 1, 2}));
  EXPECT_EQ(result.u5, (std::vector<uint32_t>{0, 1, 2}));
  EXPECT_EQ(result.output, run.expected_sum({0, 1, 2}));
}

TEST(Protocol, ActiveFullRun) {
  ProtocolConfig cfg = small_config(Mode::kActiveAdversary);
  cfg.n = 4;
  cfg.t = 3;
  ManualRun run(cfg);
  const auto& result = run.run();
  ASSERT_TRUE(result.success) << result.abort_reason;
  EXPECT_EQ(result.u4, (std::vector<uint32_t>{0, 1, 2, 3}));
  EXPECT_EQ(result.output, run.expected_sum({0, 1, 2, 3}));
}

TEST(Protocol, DropoutAtMaskingRoundStillSucceeds) {
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  cfg.n = 5;
  cfg.t = 3;
  ManualRun run(cfg);
  run.silent_from_round[1] = 2;
  run.silent_from_round[4] = 2;
  const auto& result = run.run();
  ASSERT_TRUE(result.success) << result.abort_reason;
  EXPECT_EQ(result.u3, (std::vector<uint32_t>{0, 2, 3}));
  // The sum covers exactly the masked-round survivors.
  EXPECT_EQ(result.output, run.expected_sum({0, 2, 3}));
}

TEST(Protocol, ServerAbortsBelowThreshold) {
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  cfg.n = 5;
  cfg.t = 4;
  ManualRun run(cfg);
  run.silent_from_round[0] = 2;
  run.silent_from_round[1] = 2;
  const auto& result = run.run();
  EXPECT_FALSE(result.success);
  EXPECT_EQ(result.abort_round, 2);
}

TEST(Protocol, UserRequiresStrictMajorityOfAdvertisements) {
  // |U1| == t makes every user abort in round 1 even though the server
  // tolerates it, so the run dies at the share-collection threshold.
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  cfg.n = 5;
  cfg.t = 3;
  ManualRun run(cfg);
  run.silent_from_round[3] = 0;
  run.silent_from_round[4] = 0;
  const auto& result = run.run();
  EXPECT_FALSE(result.success);
  EXPECT_EQ(result.abort_round, 1);
  for (uint32_t id : {0u, 1u, 2u}) {
    EXPECT_TRUE(run.users[id]->aborted());
    EXPECT_EQ(run.users[id]->abort_reason(), "too few advertisements");
  }
}

TEST(Protocol, TamperedCiphertextAbortsReceivers) {
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  cfg.n = 4;
  cfg.t = 3;
  ManualRun run(cfg);
  const auto& result = run.run([](int round, uint32_t, std::vector<RoundMessage>& outs) {
    if (round != 1) return;
    for (auto& msg : outs) msg.payload.back() ^= 0x01;
  });
  EXPECT_FALSE(result.success);
  EXPECT_EQ(result.abort_round, 2);
  for (const auto& user : run.users) {
    EXPECT_TRUE(user->aborted());
  }
}

TEST(Protocol, ForgedAdvertSignatureAbortsAllUsers) {
  ProtocolConfig cfg = small_config(Mode::kActiveAdversary);
  cfg.n = 4;
  cfg.t = 3;
  ManualRun run(cfg);
  run.server->set_lax_validation(true);  // colluding relay forwards the forgery
  const auto& result = run.run([](int round, uint32_t id, std::vector<RoundMessage>& outs) {
    if (round == 0 && id == 2)
      for (auto& msg : outs) msg.signature[0] ^= 0x01;
  });
  EXPECT_FALSE(result.success);
  EXPECT_EQ(result.abort_round, 1);
  for (const auto& user : run.users) {
    ASSERT_TRUE(user->aborted());
    EXPECT_EQ(user->abort_reason(), "bad advertisement signature");
  }
}

TEST(Protocol, HonestServerDropsForgedAdvertisement) {
  ProtocolConfig cfg = small_config(Mode::kActiveAdversary);
  cfg.n = 7;
  cfg.t = 5;
  ManualRun run(cfg);
  const auto& result = run.run([](int round, uint32_t id, std::vector<RoundMessage>& outs) {
    if (round == 0 && id == 2)
      for (auto& msg : outs) msg.signature[0] ^= 0x01;
  });
  // The server discards the forged advertisement; the remaining six users
  // proceed and the forged sender is simply excluded.
  ASSERT_TRUE(result.success) << result.abort_reason;
  EXPECT_EQ(result.u1, (std::vector<uint32_t>{0, 1, 3, 4, 5, 6}));
  EXPECT_EQ(result.output, run.expected_sum({0, 1, 3, 4, 5, 6}));
}

TEST(Protocol, MismatchedMaskedVectorLengthDropsSender) {
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  cfg.n = 4;
  cfg.t = 3;
  ManualRun run(cfg);
  const auto& result = run.run([](int round, uint32_t id, std::vector<RoundMessage>& outs) {
    if (round == 2 && id == 1)
      for (auto& msg : outs) msg.payload = encode_scalar_vector({1, 2, 3, 4});
  });
  ASSERT_TRUE(result.success) << result.abort_reason;
  EXPECT_EQ(result.u3, (std::vector<uint32_t>{0, 2, 3}));
  EXPECT_EQ(result.output, run.expected_sum({0, 2, 3}));
}

TEST(Protocol, InputLengthMismatchThrows) {
  ProtocolConfig cfg = small_config(Mode::kSemiHonest);
  BulletinBoard pki;
  Rng rng(1);
  EXPECT_THROW(AhUser(cfg, 0, std::vector<uint64_t>(cfg.m + 1, 0), rng, &pki), ConfigError);
}

}  // namespace
}  // namespace ahsecagg
