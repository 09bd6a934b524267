#include "ahsecagg/baselines.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "ahsecagg/encoding.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/masking.h"
#include "ahsecagg/metrics.h"
#include "ahsecagg/protocol.h"
#include "ahsecagg/shamir.h"
#include "driver_common.h"

namespace ahsecagg {

using driver::make_msg;
using driver::run_round;
using driver::sorted_unique;

GroupElement hprg_element(const Group& g, uint64_t s, uint64_t k) {
  return g.exp(g.hash_to_group(encode_scalar(k)), s);
}

std::vector<GroupElement> effiagg_mask(const Group& g, const std::vector<uint64_t>& x,
                                       uint64_t s) {
  std::vector<GroupElement> y;
  y.reserve(x.size());
  for (size_t k = 0; k < x.size(); ++k)
    y.push_back(g.mul(g.exp(g.generator(), x[k]), hprg_element(g, s, k)));
  return y;
}

BsgsTable::BsgsTable(const Group& g, uint64_t bound) : g_(g), bound_(bound) {
  step_ = static_cast<uint64_t>(std::ceil(std::sqrt(static_cast<double>(bound) + 1.0)));
  if (step_ == 0) step_ = 1;
  GroupElement e = g_.identity();
  for (uint64_t j = 0; j < step_; ++j) {
    CounterScope::bump(&Counters::bsgs_steps);
    baby_.emplace(g_.encode(e), j);
    e = g_.mul(e, g_.generator());
  }
  giant_factor_ = g_.inverse(g_.exp(g_.generator(), step_));
}

uint64_t BsgsTable::dlog(const GroupElement& target) const {
  GroupElement cur = target;
  uint64_t giants = bound_ / step_ + 1;
  for (uint64_t i = 0; i < giants; ++i) {
    CounterScope::bump(&Counters::bsgs_steps);
    auto it = baby_.find(g_.encode(cur));
    if (it != baby_.end()) {
      uint64_t candidate = i * step_ + it->second;
      if (candidate <= bound_) return candidate;
    }
    cur = g_.mul(cur, giant_factor_);
  }
  throw RangeExceeded("discrete log outside the searchable range");
}

uint64_t bsgs_dlog(const Group& g, const GroupElement& target, uint64_t bound) {
  return BsgsTable(g, bound).dlog(target);
}

std::vector<uint64_t> effiagg_unmask(const Group& g, const std::vector<GroupElement>& product,
                                     uint64_t s_sum, uint64_t max_sum) {
  BsgsTable table(g, max_sum);
  std::vector<uint64_t> out;
  out.reserve(product.size());
  for (size_t k = 0; k < product.size(); ++k) {
    GroupElement mask = g.exp(g.hash_to_group(encode_scalar(k)), s_sum);
    out.push_back(table.dlog(g.mul(product[k], g.inverse(mask))));
  }
  return out;
}

namespace {

Bytes element_vector_payload(const Group& g, const std::vector<GroupElement>& v) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(v.size()));
  for (const GroupElement& e : v) w.blob(g.encode(e));
  return w.take();
}

std::vector<GroupElement> parse_element_vector(const Group& g, const Bytes& payload) {
  ByteReader r(payload);
  uint32_t count = r.u32();
  std::vector<GroupElement> v;
  v.reserve(count);
  for (uint32_t k = 0; k < count; ++k) v.push_back(g.decode(r.blob()));
  r.expect_done();
  return v;
}

// Rounds: 0 advertise, 1 share s_i, 2 exponent-mask, 3 share sums.
class EffiaggUser {
 public:
  EffiaggUser(const ProtocolConfig& pc, uint32_t id, std::vector<uint64_t> x, Rng rng)
      : pc_(pc), f_(pc.p), id_(id), x_(std::move(x)), rng_(std::move(rng)) {
    if (x_.size() != pc_.m) throw ConfigError("input length does not match m");
  }

  uint32_t id() const { return id_; }
  bool aborted() const { return aborted_; }
  const std::string& abort_reason() const { return reason_; }

  std::vector<RoundMessage> on_round(int round, std::vector<RoundMessage> inbox) {
    std::vector<RoundMessage> out;
    try {
      switch (round) {
        case 0:
          channel_ = dh_gen(*pc_.dh_group, rng_);
          out.push_back(make_msg(0, id_, kServerId, MsgTag::kKeyAdvert,
                                 advert_payload({pc_.dh_group->encode(channel_.pk)})));
          break;
        case 1:
          out = round1_share(inbox);
          break;
        case 2:
          out.push_back(round2_mask(inbox));
          break;
        case 3:
          out.push_back(round3_sharesum(inbox));
          break;
        default:
          break;
      }
    } catch (const DecodeError& e) {
      abort(e.what());
    } catch (const AuthFailure& e) {
      abort(e.what());
    } catch (const MissingShare& e) {
      abort(e.what());
    }
    if (aborted_) return {};
    return out;
  }

 private:
  void abort(std::string reason) {
    aborted_ = true;
    reason_ = std::move(reason);
  }

  std::vector<RoundMessage> round1_share(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kKeyBroadcast) {
      abort("no key broadcast received");
      return {};
    }
    std::set<Bytes> seen;
    std::map<uint32_t, GroupElement> pks;
    for (const BroadcastEntry& e : parse_key_broadcast(inbox[0].payload)) {
      u1_.push_back(e.id);
      if (!seen.insert(e.advert).second) {
        abort("duplicate advertised key");
        return {};
      }
      std::vector<Bytes> raw = parse_advert(e.advert);
      if (raw.size() != 1) {
        abort("advertisement is missing a key");
        return {};
      }
      if (e.id != id_) pks.emplace(e.id, pc_.dh_group->decode(raw[0]));
    }
    std::sort(u1_.begin(), u1_.end());
    if (!sorted_unique(u1_)) {
      abort("duplicate id in key broadcast");
      return {};
    }
    if (u1_.size() <= pc_.t) {
      abort("too few advertisements");
      return {};
    }
    if (!std::binary_search(u1_.begin(), u1_.end(), id_)) {
      abort("own advertisement missing from broadcast");
      return {};
    }
    for (const auto& [peer, pk] : pks)
      channel_keys_.emplace(peer, dh_agree(*pc_.dh_group, channel_.sk, pk));

    s_ = rng_.field_element(f_);
    std::vector<ShareIndex> xs;
    xs.reserve(u1_.size());
    for (uint32_t uid : u1_) xs.push_back(share_index(uid));
    ShareSet shares = sss_share(f_, s_, pc_.t, xs, rng_);
    held_.emplace(id_, shares.shares.at(share_index(id_)));

    std::vector<RoundMessage> out;
    for (uint32_t j : u1_) {
      if (j == id_) continue;
      Bytes pt = share_plaintext(id_, j, {shares.shares.at(share_index(j))});
      Bytes ct = ae_enc(channel_keys_.at(j), pt, derive_nonce(1, id_, j));
      out.push_back(make_msg(1, id_, kServerId, MsgTag::kEncShare, enc_share_payload(id_, j, ct)));
    }
    return out;
  }

  RoundMessage round2_mask(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kShareRoute) {
      abort("no routed shares received");
      return {};
    }
    std::vector<RouteEntry> entries;
    parse_share_route(inbox[0].payload, &u2_, &entries);
    if (!sorted_unique(u2_) ||
        !std::includes(u1_.begin(), u1_.end(), u2_.begin(), u2_.end())) {
      abort("malformed sender set");
      return {};
    }
    if (u2_.size() < pc_.t) {
      abort("too few share senders");
      return {};
    }
    if (!std::binary_search(u2_.begin(), u2_.end(), id_)) {
      abort("own shares were not routed");
      return {};
    }
    std::set<uint32_t> covered;
    for (const RouteEntry& e : entries) {
      if (e.sender == id_) continue;
      Bytes pt = ae_dec(channel_keys_.at(e.sender), e.ciphertext);
      std::vector<uint64_t> values = parse_share_plaintext(pt, e.sender, id_);
      if (values.size() != 1) throw DecodeError("expected a single share");
      held_[e.sender] = values[0];
      covered.insert(e.sender);
    }
    for (uint32_t j : u2_)
      if (j != id_ && !covered.count(j)) {
        abort("missing share from sender " + std::to_string(j));
        return {};
      }
    std::vector<GroupElement> y = effiagg_mask(*pc_.mask_group, x_, s_);
    return make_msg(2, id_, kServerId, MsgTag::kMaskedInput,
                    element_vector_payload(*pc_.mask_group, y));
  }

  RoundMessage round3_sharesum(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kSurvivorList) {
      abort("no survivor list received");
      return {};
    }
    std::vector<uint32_t> u3 = decode_id_list(inbox[0].payload);
    if (!sorted_unique(u3) || !std::includes(u2_.begin(), u2_.end(), u3.begin(), u3.end())) {
      abort("malformed survivor list");
      return {};
    }
    if (u3.size() < pc_.t) {
      abort("too few survivors");
      return {};
    }
    if (!std::binary_search(u3.begin(), u3.end(), id_)) {
      abort("excluded from the survivor list");
      return {};
    }
    uint64_t sum = share_sum_for_unmask(f_, held_, u3);
    return make_msg(3, id_, kServerId, MsgTag::kShareSum, encode_scalar(sum));
  }

  const ProtocolConfig& pc_;
  Field f_;
  uint32_t id_;
  std::vector<uint64_t> x_;
  Rng rng_;
  bool aborted_ = false;
  std::string reason_;

  DhKeyPair channel_;
  uint64_t s_ = 0;
  std::map<uint32_t, AeadKey> channel_keys_;
  std::map<uint32_t, uint64_t> held_;
  std::vector<uint32_t> u1_, u2_;
};

class EffiaggServer {
 public:
  EffiaggServer(const ProtocolConfig& pc, uint64_t input_bound)
      : pc_(pc), f_(pc.p), input_bound_(input_bound) {}

  bool aborted() const { return aborted_; }
  const AggregationResult& result() const { return result_; }

  std::vector<RoundMessage> on_round(int round, std::vector<RoundMessage> inbox) {
    switch (round) {
      case 0:
        return round0_collect(inbox);
      case 1:
        return round1_route(inbox);
      case 2:
        return round2_collect(inbox);
      case 3:
        return round3_unmask(inbox);
      default:
        return {};
    }
  }

 private:
  void abort(int round, std::string reason) {
    aborted_ = true;
    result_.success = false;
    result_.abort_round = round;
    result_.abort_reason = std::move(reason);
  }

  std::vector<RoundMessage> round0_collect(const std::vector<RoundMessage>& inbox) {
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kKeyAdvert || msg.sender >= pc_.n) continue;
      adverts_.emplace(msg.sender, msg.payload);
    }
    for (const auto& [id, advert] : adverts_) result_.u1.push_back(id);
    if (result_.u1.size() < pc_.t) {
      abort(0, "too few advertisements");
      return {};
    }
    std::vector<BroadcastEntry> entries;
    for (const auto& [id, advert] : adverts_) entries.push_back({id, advert, {}});
    Bytes payload = key_broadcast_payload(entries);
    std::vector<RoundMessage> out;
    for (uint32_t id : result_.u1)
      out.push_back(make_msg(0, kServerId, id, MsgTag::kKeyBroadcast, payload));
    return out;
  }

  std::vector<RoundMessage> round1_route(const std::vector<RoundMessage>& inbox) {
    std::map<uint32_t, std::map<uint32_t, Bytes>> per_sender;
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kEncShare) continue;
      if (!std::binary_search(result_.u1.begin(), result_.u1.end(), msg.sender)) continue;
      uint32_t from = 0, to = 0;
      Bytes ct;
      try {
        parse_enc_share(msg.payload, &from, &to, &ct);
      } catch (const DecodeError&) {
        continue;
      }
      if (from != msg.sender || to == from) continue;
      if (!std::binary_search(result_.u1.begin(), result_.u1.end(), to)) continue;
      per_sender[from].emplace(to, std::move(ct));
    }
    for (const auto& [sender, targets] : per_sender)
      if (targets.size() == result_.u1.size() - 1) result_.u2.push_back(sender);
    if (result_.u2.size() < pc_.t) {
      abort(1, "too few share senders");
      return {};
    }
    std::vector<RoundMessage> out;
    for (uint32_t receiver : result_.u2) {
      std::vector<RouteEntry> entries;
      for (uint32_t sender : result_.u2) {
        if (sender == receiver) continue;
        entries.push_back({sender, per_sender.at(sender).at(receiver), {}});
      }
      out.push_back(make_msg(1, kServerId, receiver, MsgTag::kShareRoute,
                             share_route_payload(result_.u2, entries)));
    }
    return out;
  }

  std::vector<RoundMessage> round2_collect(const std::vector<RoundMessage>& inbox) {
    product_.assign(pc_.m, pc_.mask_group->identity());
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kMaskedInput) continue;
      if (!std::binary_search(result_.u2.begin(), result_.u2.end(), msg.sender)) continue;
      if (std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
      std::vector<GroupElement> y;
      try {
        y = parse_element_vector(*pc_.mask_group, msg.payload);
      } catch (const DecodeError&) {
        continue;
      }
      if (y.size() != pc_.m) continue;
      result_.u3.push_back(msg.sender);
      std::sort(result_.u3.begin(), result_.u3.end());
      for (size_t k = 0; k < pc_.m; ++k) product_[k] = pc_.mask_group->mul(product_[k], y[k]);
    }
    if (result_.u3.size() < pc_.t) {
      abort(2, "too few masked inputs");
      return {};
    }
    Bytes payload = encode_id_list(result_.u3);
    std::vector<RoundMessage> out;
    for (uint32_t id : result_.u3)
      out.push_back(make_msg(2, kServerId, id, MsgTag::kSurvivorList, payload));
    return out;
  }

  std::vector<RoundMessage> round3_unmask(const std::vector<RoundMessage>& inbox) {
    std::vector<Share> sums;
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kShareSum) continue;
      if (!std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
      uint64_t value = 0;
      try {
        value = decode_scalar(msg.payload);
      } catch (const DecodeError&) {
        continue;
      }
      if (value >= f_.p()) continue;
      result_.u4.push_back(msg.sender);
      sums.push_back({share_index(msg.sender), value});
    }
    std::sort(result_.u4.begin(), result_.u4.end());
    if (result_.u4.size() < pc_.t) {
      abort(3, "too few share sums");
      return {};
    }
    uint64_t s_sum = sss_reconstruct(f_, pc_.t, sums);
    uint64_t max_sum = static_cast<uint64_t>(result_.u3.size()) * (input_bound_ - 1);
    result_.output = effiagg_unmask(*pc_.mask_group, product_, s_sum, max_sum);
    result_.u5 = result_.u4;
    result_.success = true;
    return {};
  }

  const ProtocolConfig& pc_;
  Field f_;
  uint64_t input_bound_;
  bool aborted_ = false;
  AggregationResult result_;
  std::map<uint32_t, Bytes> adverts_;
  std::vector<GroupElement> product_;
};

}  // namespace

SimOutcome run_effiagg(const SimConfig& cfg) {
  driver::require_plain_semi_honest(cfg, "the effiagg baseline");
  const ProtocolConfig& pc = cfg.protocol;
  uint64_t bound = cfg.input_bound == 0 ? pc.p : std::min(cfg.input_bound, pc.p);
  if (bound < 2 || static_cast<uint64_t>(pc.n) * bound > (uint64_t{1} << 26))
    throw ConfigError("input bound unusable for discrete-log recovery");

  Rng root(cfg.seed);
  SimOutcome outcome;
  outcome.inputs = sample_inputs(cfg);

  std::vector<EffiaggUser> users;
  users.reserve(pc.n);
  for (uint32_t id = 0; id < pc.n; ++id)
    users.emplace_back(pc, id, outcome.inputs.at(id), root.child(simlabel::user(id)));
  EffiaggServer server(pc, bound);

  std::vector<uint32_t> dropped = cfg.dropout.resolve(pc.n, root.child(simlabel::kDropout));
  auto offline = [&](uint32_t id, int round) {
    return cfg.dropout.round >= 0 && round >= cfg.dropout.round &&
           std::binary_search(dropped.begin(), dropped.end(), id);
  };

  RunMetrics& metrics = outcome.metrics;
  metrics.party[kServerId];
  for (uint32_t id = 0; id < pc.n; ++id) metrics.party[id];
  BulletinBoard pki;
  SimNet net(&metrics, &pki, pc.mode);

  for (int round = 0; round <= 3; ++round) {
    run_round(round, users, server, &net, &metrics, offline, cfg.latency_ms);
    if (server.aborted()) break;
  }
  net.finalize();
  outcome.result = server.result();
  for (const auto& u : users)
    if (u.aborted()) outcome.scenario.user_aborts[u.id()] = u.abort_reason();
  return outcome;
}

}  // namespace ahsecagg
