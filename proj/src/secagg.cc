#include "ahsecagg/baselines.h"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "ahsecagg/encoding.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/metrics.h"
#include "ahsecagg/protocol.h"
#include "ahsecagg/shamir.h"
#include "ahsecagg/tskg.h"
#include "driver_common.h"

namespace ahsecagg {

using driver::ids_except;
using driver::make_msg;
using driver::require_plain_semi_honest;
using driver::run_round;
using driver::sorted_unique;

std::vector<uint64_t> secagg_mask(const Field& f, const std::vector<uint64_t>& x, uint64_t b,
                                  uint32_t self_id, const std::vector<uint32_t>& peers,
                                  const std::map<uint32_t, AeadKey>& pairwise) {
  std::vector<uint64_t> y(x.size());
  for (size_t k = 0; k < x.size(); ++k) y[k] = f.reduce(x[k]);
  std::vector<uint64_t> self_mask = Prg::from_field_seed(b).expand(f, x.size());
  for (size_t k = 0; k < y.size(); ++k) y[k] = f.add(y[k], self_mask[k]);
  for (uint32_t j : peers) {
    if (j == self_id) continue;
    auto it = pairwise.find(j);
    if (it == pairwise.end())
      throw ConfigError("no pairwise key for peer " + std::to_string(j));
    std::vector<uint64_t> stream = Prg::from_key(it->second).expand(f, x.size());
    for (size_t k = 0; k < y.size(); ++k)
      y[k] = self_id < j ? f.add(y[k], stream[k]) : f.sub(y[k], stream[k]);
  }
  return y;
}

std::vector<uint64_t> secagg_unmask(
    const Field& f, std::vector<uint64_t> sum_y, const std::vector<uint32_t>& survivors,
    const std::map<uint32_t, uint64_t>& b_of_survivors,
    const std::map<uint32_t, std::map<uint32_t, AeadKey>>& dropped_pairwise) {
  size_t m = sum_y.size();
  for (uint32_t i : survivors) {
    auto it = b_of_survivors.find(i);
    if (it == b_of_survivors.end())
      throw MissingShare("no self-mask seed for survivor " + std::to_string(i));
    std::vector<uint64_t> stream = Prg::from_field_seed(it->second).expand(f, m);
    for (size_t k = 0; k < m; ++k) sum_y[k] = f.sub(sum_y[k], stream[k]);
  }
  for (const auto& [j, keys] : dropped_pairwise) {
    for (uint32_t i : survivors) {
      auto it = keys.find(i);
      if (it == keys.end())
        throw MissingShare("no recovered key between " + std::to_string(j) + " and " +
                           std::to_string(i));
      std::vector<uint64_t> stream = Prg::from_key(it->second).expand(f, m);
      // Survivor i's upload still carries +-PRG(k_ij); the sign follows the
      // i-versus-j order used at masking time.
      for (size_t k = 0; k < m; ++k)
        sum_y[k] = i < j ? f.sub(sum_y[k], stream[k]) : f.add(sum_y[k], stream[k]);
    }
  }
  return sum_y;
}

uint64_t secagg_prg_closed_form(uint64_t n, uint64_t d, uint64_t m) {
  return (d * (n - d) + (n - d)) * m;
}

void NonceRegistry::check(const Bytes& nonce) {
  if (!seen_.insert(nonce).second) throw Rejected("nonce reused within a deployment");
}

namespace {

mpz_class to_exponent(uint64_t v) { return mpz_class(static_cast<unsigned long>(v)); }

// ---- Plain SecAgg parties ----------------------------------------------------

// Rounds: 0 advertise both keys, 1 share (s_i, b_i), 2 mask, 3 recover.
class SecaggUser {
 public:
  SecaggUser(const ProtocolConfig& pc, uint32_t id, std::vector<uint64_t> x, Rng rng)
      : pc_(pc), f_(pc.p), id_(id), x_(std::move(x)), rng_(std::move(rng)) {
    if (x_.size() != pc_.m) throw ConfigError("input length does not match m");
  }

  uint32_t id() const { return id_; }
  bool aborted() const { return aborted_; }
  const std::string& abort_reason() const { return reason_; }
  uint64_t s() const { return s_; }
  uint64_t b() const { return b_; }
  const std::map<uint32_t, std::pair<uint64_t, uint64_t>>& held() const { return held_; }

  std::vector<RoundMessage> on_round(int round, std::vector<RoundMessage> inbox) {
    std::vector<RoundMessage> out;
    try {
      switch (round) {
        case 0:
          out.push_back(round0_advertise());
          break;
        case 1:
          out = round1_share(inbox);
          break;
        case 2:
          absorb_route(inbox);
          if (!aborted_) out.push_back(round2_mask());
          break;
        case 3:
          out.push_back(round3_recover(inbox));
          break;
        default:
          break;
      }
    } catch (const DecodeError& e) {
      abort(e.what());
    } catch (const AuthFailure& e) {
      abort(e.what());
    } catch (const NotFound& e) {
      abort(e.what());
    } catch (const MissingShare& e) {
      abort(e.what());
    }
    if (aborted_) return {};
    return out;
  }

  // Preparation of the reusable-share deployment stops after the shares are
  // stored; no masking follows.
  void finish_preparation(std::vector<RoundMessage> inbox) {
    if (aborted_) return;
    try {
      absorb_route(inbox);
    } catch (const DecodeError& e) {
      abort(e.what());
    } catch (const AuthFailure& e) {
      abort(e.what());
    } catch (const MissingShare& e) {
      abort(e.what());
    }
  }

 private:
  void abort(std::string reason) {
    aborted_ = true;
    reason_ = std::move(reason);
  }

  RoundMessage round0_advertise() {
    channel_ = dh_gen(*pc_.dh_group, rng_);
    mask_ = dh_gen(*pc_.mask_group, rng_);
    Bytes payload = advert_payload(
        {pc_.dh_group->encode(channel_.pk), pc_.mask_group->encode(mask_.pk)});
    return make_msg(0, id_, kServerId, MsgTag::kKeyAdvert, std::move(payload));
  }

  std::vector<RoundMessage> round1_share(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kKeyBroadcast) {
      abort("no key broadcast received");
      return {};
    }
    std::vector<BroadcastEntry> entries = parse_key_broadcast(inbox[0].payload);
    std::set<Bytes> seen;
    for (const BroadcastEntry& e : entries) {
      u1_.push_back(e.id);
      if (!seen.insert(e.advert).second) {
        abort("duplicate advertised key");
        return {};
      }
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
    for (const BroadcastEntry& e : entries) {
      std::vector<Bytes> pks = parse_advert(e.advert);
      if (pks.size() != 2) {
        abort("advertisement is missing a key");
        return {};
      }
      if (e.id == id_) continue;
      GroupElement channel_pk = pc_.dh_group->decode(pks[0]);
      mask_pks_.emplace(e.id, pc_.mask_group->decode(pks[1]));
      channel_keys_.emplace(e.id, dh_agree(*pc_.dh_group, channel_.sk, channel_pk));
    }

    b_ = rng_.field_element(f_);
    s_ = static_cast<uint64_t>(mask_.sk.get_ui());
    std::vector<ShareIndex> xs;
    xs.reserve(u1_.size());
    for (uint32_t uid : u1_) xs.push_back(share_index(uid));
    ShareSet s_shares = sss_share(f_, s_, pc_.t, xs, rng_);
    ShareSet b_shares = sss_share(f_, b_, pc_.t, xs, rng_);
    held_[id_] = {s_shares.shares.at(share_index(id_)), b_shares.shares.at(share_index(id_))};

    std::vector<RoundMessage> out;
    for (uint32_t j : u1_) {
      if (j == id_) continue;
      Bytes pt = share_plaintext(
          id_, j, {s_shares.shares.at(share_index(j)), b_shares.shares.at(share_index(j))});
      Bytes ct = ae_enc(channel_keys_.at(j), pt, derive_nonce(1, id_, j));
      out.push_back(make_msg(1, id_, kServerId, MsgTag::kEncShare, enc_share_payload(id_, j, ct)));
    }
    return out;
  }

  void absorb_route(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kShareRoute) {
      abort("no routed shares received");
      return;
    }
    std::vector<RouteEntry> entries;
    parse_share_route(inbox[0].payload, &u2_, &entries);
    if (!sorted_unique(u2_)) {
      abort("malformed sender set");
      return;
    }
    if (!std::includes(u1_.begin(), u1_.end(), u2_.begin(), u2_.end())) {
      abort("unknown sender in routed shares");
      return;
    }
    if (u2_.size() < pc_.t) {
      abort("too few share senders");
      return;
    }
    if (!std::binary_search(u2_.begin(), u2_.end(), id_)) {
      abort("own shares were not routed");
      return;
    }
    std::set<uint32_t> covered;
    for (const RouteEntry& e : entries) {
      if (e.sender == id_) continue;
      Bytes pt = ae_dec(channel_keys_.at(e.sender), e.ciphertext);
      std::vector<uint64_t> values = parse_share_plaintext(pt, e.sender, id_);
      if (values.size() != 2) throw DecodeError("expected a share pair");
      held_[e.sender] = {values[0], values[1]};
      covered.insert(e.sender);
    }
    for (uint32_t j : u2_)
      if (j != id_ && !covered.count(j)) {
        abort("missing shares from sender " + std::to_string(j));
        return;
      }
  }

  RoundMessage round2_mask() {
    std::vector<uint32_t> peers = ids_except(u2_, id_);
    std::map<uint32_t, AeadKey> pairwise;
    for (uint32_t j : peers)
      pairwise.emplace(j, dh_agree(*pc_.mask_group, mask_.sk, mask_pks_.at(j)));
    std::vector<uint64_t> y = secagg_mask(f_, x_, b_, id_, peers, pairwise);
    return make_msg(2, id_, kServerId, MsgTag::kMaskedInput, encode_scalar_vector(y));
  }

  RoundMessage round3_recover(const std::vector<RoundMessage>& inbox) {
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
    std::vector<RecoveryEntry> dropped, surviving;
    for (uint32_t j : u2_) {
      if (std::binary_search(u3.begin(), u3.end(), j))
        surviving.push_back({j, encode_scalar(held_.at(j).second)});
      else
        dropped.push_back({j, encode_scalar(held_.at(j).first)});
    }
    return make_msg(3, id_, kServerId, MsgTag::kShareBundle, recovery_payload(dropped, surviving));
  }

  const ProtocolConfig& pc_;
  Field f_;
  uint32_t id_;
  std::vector<uint64_t> x_;
  Rng rng_;
  bool aborted_ = false;
  std::string reason_;

  DhKeyPair channel_, mask_;
  uint64_t s_ = 0, b_ = 0;
  std::map<uint32_t, AeadKey> channel_keys_;
  std::map<uint32_t, GroupElement> mask_pks_;
  std::map<uint32_t, std::pair<uint64_t, uint64_t>> held_;  // peer -> (s share, b share)
  std::vector<uint32_t> u1_, u2_;
};

class SecaggServer {
 public:
  explicit SecaggServer(const ProtocolConfig& pc) : pc_(pc), f_(pc.p) {}

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
      adverts_.emplace(msg.sender, msg.payload);  // first advertisement wins
    }
    for (const auto& [id, advert] : adverts_) result_.u1.push_back(id);
    if (result_.u1.size() < pc_.t) {
      abort(0, "too few advertisements");
      return {};
    }
    for (const auto& [id, advert] : adverts_) {
      std::vector<Bytes> pks = parse_advert(advert);
      if (pks.size() == 2) mask_pks_.emplace(id, pc_.mask_group->decode(pks[1]));
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
    sum_y_.assign(pc_.m, 0);
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kMaskedInput) continue;
      if (!std::binary_search(result_.u2.begin(), result_.u2.end(), msg.sender)) continue;
      if (std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
      std::vector<uint64_t> y;
      try {
        y = decode_scalar_vector(msg.payload);
      } catch (const DecodeError&) {
        continue;
      }
      if (y.size() != pc_.m) continue;
      result_.u3.push_back(msg.sender);
      std::sort(result_.u3.begin(), result_.u3.end());
      for (size_t k = 0; k < pc_.m; ++k) sum_y_[k] = f_.add(sum_y_[k], f_.reduce(y[k]));
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
    std::map<uint32_t, std::vector<Share>> s_offers, b_offers;
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kShareBundle) continue;
      if (!std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
      if (std::binary_search(result_.u4.begin(), result_.u4.end(), msg.sender)) continue;
      std::vector<RecoveryEntry> dropped, surviving;
      try {
        parse_recovery(msg.payload, &dropped, &surviving);
      } catch (const DecodeError&) {
        continue;
      }
      result_.u4.push_back(msg.sender);
      std::sort(result_.u4.begin(), result_.u4.end());
      ShareIndex holder = share_index(msg.sender);
      for (const RecoveryEntry& e : dropped)
        s_offers[e.id].push_back({holder, decode_scalar(e.value)});
      for (const RecoveryEntry& e : surviving)
        b_offers[e.id].push_back({holder, decode_scalar(e.value)});
    }
    if (result_.u4.size() < pc_.t) {
      abort(3, "too few recovery bundles");
      return {};
    }

    std::map<uint32_t, std::map<uint32_t, AeadKey>> dropped_pairwise;
    for (uint32_t j : result_.u2) {
      if (std::binary_search(result_.u3.begin(), result_.u3.end(), j)) continue;
      mpz_class sk = to_exponent(sss_reconstruct(f_, pc_.t, s_offers[j]));
      for (uint32_t i : result_.u3)
        dropped_pairwise[j].emplace(i, dh_agree(*pc_.mask_group, sk, mask_pks_.at(i)));
    }
    std::map<uint32_t, uint64_t> b_of_survivors;
    for (uint32_t j : result_.u3)
      b_of_survivors.emplace(j, sss_reconstruct(f_, pc_.t, b_offers[j]));

    result_.output = secagg_unmask(f_, sum_y_, result_.u3, b_of_survivors, dropped_pairwise);
    result_.u5 = result_.u4;
    result_.success = true;
    return {};
  }

  const ProtocolConfig& pc_;
  Field f_;
  bool aborted_ = false;
  AggregationResult result_;
  std::map<uint32_t, Bytes> adverts_;
  std::map<uint32_t, GroupElement> mask_pks_;
  std::vector<uint64_t> sum_y_;
};

// ---- Reusable-share aggregation parties ---------------------------------------

// Rounds: 0 server nonce, 1 temporary-key advertisement, 2 mask, 3 sub-signatures.
class TskgAggUser {
 public:
  TskgAggUser(const ProtocolConfig& pc, uint32_t id, std::vector<uint64_t> x, uint64_t s,
              uint64_t b, const std::map<uint32_t, std::pair<uint64_t, uint64_t>>* held)
      : pc_(pc), f_(pc.p), id_(id), x_(std::move(x)), s_(s), b_(b), held_(held) {}

  uint32_t id() const { return id_; }
  bool aborted() const { return aborted_; }
  const std::string& abort_reason() const { return reason_; }
  bool keyed() const { return !nonce_.empty(); }
  uint64_t sz() const { return sz_; }

  std::vector<RoundMessage> on_round(int round, std::vector<RoundMessage> inbox) {
    std::vector<RoundMessage> out;
    try {
      switch (round) {
        case 0:
          break;  // the server opens the aggregation with its nonce
        case 1:
          out.push_back(round1_advertise(inbox));
          break;
        case 2:
          out.push_back(round2_mask(inbox));
          break;
        case 3:
          out.push_back(round3_subsigs(inbox));
          break;
        default:
          break;
      }
    } catch (const DecodeError& e) {
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

  RoundMessage round1_advertise(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kNonce || inbox[0].payload.size() != 32) {
      abort("no aggregation nonce received");
      return {};
    }
    nonce_ = inbox[0].payload;
    const Group& g = *pc_.mask_group;
    sz_ = ts_trans(f_, g, tskg_temp_key(g, s_, nonce_));
    bz_ = ts_trans(f_, g, tskg_temp_key(g, b_, nonce_));
    GroupElement temp_pk = g.exp(g.generator(), sz_, ExpKind::kSetup);
    return make_msg(1, id_, kServerId, MsgTag::kKeyAdvert, advert_payload({g.encode(temp_pk)}));
  }

  RoundMessage round2_mask(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kKeyBroadcast) {
      abort("no key broadcast received");
      return {};
    }
    const Group& g = *pc_.mask_group;
    for (const BroadcastEntry& e : parse_key_broadcast(inbox[0].payload)) {
      u1_.push_back(e.id);
      std::vector<Bytes> pks = parse_advert(e.advert);
      if (pks.size() != 1) {
        abort("advertisement is missing a key");
        return {};
      }
      if (e.id != id_) temp_pks_.emplace(e.id, g.decode(pks[0]));
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
    std::vector<uint32_t> peers = ids_except(u1_, id_);
    std::map<uint32_t, AeadKey> pairwise;
    for (uint32_t j : peers)
      pairwise.emplace(j, dh_agree(g, to_exponent(sz_), temp_pks_.at(j)));
    std::vector<uint64_t> y = secagg_mask(f_, x_, bz_, id_, peers, pairwise);
    return make_msg(2, id_, kServerId, MsgTag::kMaskedInput, encode_scalar_vector(y));
  }

  RoundMessage round3_subsigs(const std::vector<RoundMessage>& inbox) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kSurvivorList) {
      abort("no survivor list received");
      return {};
    }
    std::vector<uint32_t> u3 = decode_id_list(inbox[0].payload);
    if (!sorted_unique(u3) || !std::includes(u1_.begin(), u1_.end(), u3.begin(), u3.end())) {
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
    const Group& g = *pc_.mask_group;
    std::vector<RecoveryEntry> dropped, surviving;
    for (uint32_t j : u1_) {
      auto it = held_->find(j);
      if (it == held_->end()) throw MissingShare("no stored share for peer " + std::to_string(j));
      if (std::binary_search(u3.begin(), u3.end(), j))
        surviving.push_back({j, g.encode(tskg_sub_sig(g, it->second.second, nonce_))});
      else
        dropped.push_back({j, g.encode(tskg_sub_sig(g, it->second.first, nonce_))});
    }
    return make_msg(3, id_, kServerId, MsgTag::kSubSigBundle, recovery_payload(dropped, surviving));
  }

  const ProtocolConfig& pc_;
  Field f_;
  uint32_t id_;
  std::vector<uint64_t> x_;
  uint64_t s_ = 0, b_ = 0;
  const std::map<uint32_t, std::pair<uint64_t, uint64_t>>* held_;
  bool aborted_ = false;
  std::string reason_;

  Bytes nonce_;
  uint64_t sz_ = 0, bz_ = 0;
  std::vector<uint32_t> u1_;
  std::map<uint32_t, GroupElement> temp_pks_;
};

class TskgAggServer {
 public:
  TskgAggServer(const ProtocolConfig& pc, Bytes nonce, std::vector<uint32_t> participants)
      : pc_(pc), f_(pc.p), nonce_(std::move(nonce)), participants_(std::move(participants)) {}

  bool aborted() const { return aborted_; }
  const AggregationResult& result() const { return result_; }

  std::vector<RoundMessage> on_round(int round, std::vector<RoundMessage> inbox) {
    switch (round) {
      case 0: {
        std::vector<RoundMessage> out;
        for (uint32_t id : participants_)
          out.push_back(make_msg(0, kServerId, id, MsgTag::kNonce, nonce_));
        return out;
      }
      case 1:
        return round1_broadcast(inbox);
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

  std::vector<RoundMessage> round1_broadcast(const std::vector<RoundMessage>& inbox) {
    std::map<uint32_t, Bytes> adverts;
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kKeyAdvert) continue;
      if (!std::binary_search(participants_.begin(), participants_.end(), msg.sender)) continue;
      adverts.emplace(msg.sender, msg.payload);
    }
    for (const auto& [id, advert] : adverts) {
      result_.u1.push_back(id);
      std::vector<Bytes> pks = parse_advert(advert);
      if (pks.size() == 1) temp_pks_.emplace(id, pc_.mask_group->decode(pks[0]));
    }
    if (result_.u1.size() < pc_.t) {
      abort(1, "too few advertisements");
      return {};
    }
    result_.u2 = result_.u1;  // no share round: the reused shares stand in
    std::vector<BroadcastEntry> entries;
    for (const auto& [id, advert] : adverts) entries.push_back({id, advert, {}});
    Bytes payload = key_broadcast_payload(entries);
    std::vector<RoundMessage> out;
    for (uint32_t id : result_.u1)
      out.push_back(make_msg(1, kServerId, id, MsgTag::kKeyBroadcast, payload));
    return out;
  }

  std::vector<RoundMessage> round2_collect(const std::vector<RoundMessage>& inbox) {
    sum_y_.assign(pc_.m, 0);
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kMaskedInput) continue;
      if (!std::binary_search(result_.u1.begin(), result_.u1.end(), msg.sender)) continue;
      if (std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
      std::vector<uint64_t> y;
      try {
        y = decode_scalar_vector(msg.payload);
      } catch (const DecodeError&) {
        continue;
      }
      if (y.size() != pc_.m) continue;
      result_.u3.push_back(msg.sender);
      std::sort(result_.u3.begin(), result_.u3.end());
      for (size_t k = 0; k < pc_.m; ++k) sum_y_[k] = f_.add(sum_y_[k], f_.reduce(y[k]));
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
    const Group& g = *pc_.mask_group;
    std::map<uint32_t, std::vector<std::pair<ShareIndex, GroupElement>>> s_offers, b_offers;
    for (const RoundMessage& msg : inbox) {
      if (msg.tag != MsgTag::kSubSigBundle) continue;
      if (!std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
      if (std::binary_search(result_.u4.begin(), result_.u4.end(), msg.sender)) continue;
      std::vector<RecoveryEntry> dropped, surviving;
      try {
        parse_recovery(msg.payload, &dropped, &surviving);
      } catch (const DecodeError&) {
        continue;
      }
      result_.u4.push_back(msg.sender);
      std::sort(result_.u4.begin(), result_.u4.end());
      ShareIndex holder = share_index(msg.sender);
      for (const RecoveryEntry& e : dropped) s_offers[e.id].push_back({holder, g.decode(e.value)});
      for (const RecoveryEntry& e : surviving)
        b_offers[e.id].push_back({holder, g.decode(e.value)});
    }
    if (result_.u4.size() < pc_.t) {
      abort(3, "too few sub-signature bundles");
      return {};
    }

    std::map<uint32_t, std::map<uint32_t, AeadKey>> dropped_pairwise;
    for (uint32_t j : result_.u1) {
      if (std::binary_search(result_.u3.begin(), result_.u3.end(), j)) continue;
      uint64_t sz = ts_trans(f_, g, tskg_reconstruct(g, f_, pc_.t, s_offers[j]));
      for (uint32_t i : result_.u3)
        dropped_pairwise[j].emplace(i, dh_agree(g, to_exponent(sz), temp_pks_.at(i)));
    }
    std::map<uint32_t, uint64_t> bz_of_survivors;
    for (uint32_t j : result_.u3)
      bz_of_survivors.emplace(j, ts_trans(f_, g, tskg_reconstruct(g, f_, pc_.t, b_offers[j])));

    result_.output = secagg_unmask(f_, sum_y_, result_.u3, bz_of_survivors, dropped_pairwise);
    result_.u5 = result_.u4;
    result_.success = true;
    return {};
  }

  const ProtocolConfig& pc_;
  Field f_;
  Bytes nonce_;
  std::vector<uint32_t> participants_;
  bool aborted_ = false;
  AggregationResult result_;
  std::map<uint32_t, GroupElement> temp_pks_;
  std::vector<uint64_t> sum_y_;
};

}  // namespace

SimOutcome run_secagg(const SimConfig& cfg) {
  require_plain_semi_honest(cfg, "the secagg baseline");
  const ProtocolConfig& pc = cfg.protocol;

  Rng root(cfg.seed);
  SimOutcome outcome;
  outcome.inputs = sample_inputs(cfg);

  std::vector<SecaggUser> users;
  users.reserve(pc.n);
  for (uint32_t id = 0; id < pc.n; ++id)
    users.emplace_back(pc, id, outcome.inputs.at(id), root.child(simlabel::user(id)));
  SecaggServer server(pc);

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

TskgDeploymentOutcome run_secagg_tskg(const SimConfig& cfg, size_t aggregations) {
  require_plain_semi_honest(cfg, "the reusable-share deployment");
  if (aggregations == 0) throw ConfigError("a deployment needs at least one aggregation");
  const ProtocolConfig& pc = cfg.protocol;

  Rng root(cfg.seed);
  Rng server_rng = root.child(simlabel::kServer);
  TskgDeploymentOutcome dep;
  BulletinBoard pki;

  // Preparation: the advertise and share rounds a plain run pays every time.
  std::vector<SecaggUser> prep_users;
  prep_users.reserve(pc.n);
  for (uint32_t id = 0; id < pc.n; ++id)
    prep_users.emplace_back(pc, id, std::vector<uint64_t>(pc.m, 0),
                            root.child(simlabel::user(id)));
  SecaggServer prep_server(pc);
  {
    RunMetrics& metrics = dep.preparation.metrics;
    metrics.party[kServerId];
    for (uint32_t id = 0; id < pc.n; ++id) metrics.party[id];
    SimNet net(&metrics, &pki, pc.mode);
    auto online = [](uint32_t, int) { return false; };
    for (int round = 0; round <= 1; ++round) {
      run_round(round, prep_users, prep_server, &net, &metrics, online, cfg.latency_ms);
      if (prep_server.aborted()) break;
    }
    if (!prep_server.aborted()) {
      for (auto& u : prep_users) {
        CounterScope scope(&metrics.party[u.id()]);
        u.finish_preparation(net.drain(u.id()));
      }
    }
    net.finalize();
  }
  dep.preparation.result = prep_server.result();
  dep.preparation.result.success = !prep_server.aborted();
  for (const auto& u : prep_users)
    if (u.aborted()) {
      dep.preparation.result.success = false;
      dep.preparation.scenario.user_aborts[u.id()] = u.abort_reason();
    }
  if (!dep.preparation.result.success) return dep;

  std::vector<uint32_t> participants;
  for (const auto& u : prep_users)
    if (!u.aborted()) participants.push_back(u.id());

  NonceRegistry nonces;
  for (size_t k = 0; k < aggregations; ++k) {
    Rng agg_root = root.child((uint64_t{6} << 32) | k);
    SimConfig agg_cfg = cfg;
    agg_cfg.seed = agg_root.next_u64();

    SimOutcome out;
    out.inputs = sample_inputs(agg_cfg);
    Bytes nonce = server_rng.bytes(32);
    nonces.check(nonce);

    std::vector<TskgAggUser> users;
    users.reserve(participants.size());
    for (uint32_t id : participants) {
      const SecaggUser& prep = prep_users[id];
      users.emplace_back(pc, id, out.inputs.at(id), prep.s(), prep.b(), &prep.held());
    }
    TskgAggServer server(pc, nonce, participants);

    std::vector<uint32_t> dropped = cfg.dropout.resolve(pc.n, agg_root.child(simlabel::kDropout));
    auto offline = [&](uint32_t id, int round) {
      return cfg.dropout.round >= 0 && round >= cfg.dropout.round &&
             std::binary_search(dropped.begin(), dropped.end(), id);
    };

    RunMetrics& metrics = out.metrics;
    metrics.party[kServerId];
    for (uint32_t id : participants) metrics.party[id];
    SimNet net(&metrics, &pki, pc.mode);

    for (int round = 0; round <= 3; ++round) {
      run_round(round, users, server, &net, &metrics, offline, cfg.latency_ms);
      if (server.aborted()) break;
    }
    net.finalize();
    out.result = server.result();
    for (const auto& u : users) {
      if (u.keyed()) out.user_temp_keys[u.id()] = u.sz();
      if (u.aborted()) out.scenario.user_aborts[u.id()] = u.abort_reason();
    }
    dep.aggregations.push_back(std::move(out));
  }
  return dep;
}

}  // namespace ahsecagg
