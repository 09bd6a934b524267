#include "ahsecagg/protocol.h"

#include <algorithm>
#include <set>

namespace ahsecagg {
namespace {

bool contains(const std::vector<uint32_t>& ids, uint32_t id) {
  return std::binary_search(ids.begin(), ids.end(), id);
}

bool sorted_unique(const std::vector<uint32_t>& ids) {
  return std::is_sorted(ids.begin(), ids.end()) &&
         std::adjacent_find(ids.begin(), ids.end()) == ids.end();
}

bool subset_of(const std::vector<uint32_t>& inner, const std::vector<uint32_t>& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace

const char* mode_name(Mode mode) {
  return mode == Mode::kSemiHonest ? "semi_honest" : "active";
}

Mode mode_from_name(const std::string& name) {
  if (name == "semi_honest" || name == "semi-honest") return Mode::kSemiHonest;
  if (name == "active" || name == "active_adversary") return Mode::kActiveAdversary;
  throw ConfigError("unknown mode: " + name);
}

const char* msg_tag_name(MsgTag tag) {
  switch (tag) {
    case MsgTag::kKeyAdvert: return "key_advert";
    case MsgTag::kKeyBroadcast: return "key_broadcast";
    case MsgTag::kEncShare: return "enc_share";
    case MsgTag::kShareRoute: return "share_route";
    case MsgTag::kMaskedInput: return "masked_input";
    case MsgTag::kSurvivorList: return "survivor_list";
    case MsgTag::kListSig: return "list_sig";
    case MsgTag::kSigEcho: return "sig_echo";
    case MsgTag::kShareSum: return "share_sum";
    case MsgTag::kNonce: return "nonce";
    case MsgTag::kSubSigBundle: return "sub_sig_bundle";
    case MsgTag::kShareBundle: return "share_bundle";
  }
  return "unknown";
}

Bytes signed_frame(const RoundMessage& msg) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(msg.tag));
  w.u8(msg.round);
  w.u32(msg.sender);
  w.raw(msg.payload);
  return w.take();
}

Bytes ds_sign_message(const Bytes& sk, const RoundMessage& msg) {
  return ds_sign(sk, signed_frame(msg));
}

bool ds_verify_message(const Bytes& pk, const RoundMessage& msg) {
  return ds_verify(msg.signature, pk, signed_frame(msg));
}

// ---- Payload codecs ---------------------------------------------------------

Bytes advert_payload(const std::vector<Bytes>& pks) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(pks.size()));
  for (const Bytes& pk : pks) w.blob(pk);
  return w.take();
}

std::vector<Bytes> parse_advert(const Bytes& payload) {
  ByteReader r(payload);
  uint32_t count = r.u32();
  if (count == 0 || count > 4) throw DecodeError("advert: bad key count");
  std::vector<Bytes> pks;
  pks.reserve(count);
  for (uint32_t i = 0; i < count; ++i) pks.push_back(r.blob());
  r.expect_done();
  return pks;
}

Bytes key_broadcast_payload(const std::vector<BroadcastEntry>& entries) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const BroadcastEntry& e : entries) {
    w.u32(e.id);
    w.blob(e.advert);
    w.blob(e.sig);
  }
  return w.take();
}

std::vector<BroadcastEntry> parse_key_broadcast(const Bytes& payload) {
  ByteReader r(payload);
  uint32_t count = r.u32();
  std::vector<BroadcastEntry> entries(count);
  for (auto& e : entries) {
    e.id = r.u32();
    e.advert = r.blob();
    e.sig = r.blob();
  }
  r.expect_done();
  return entries;
}

Bytes enc_share_payload(uint32_t from, uint32_t to, const Bytes& ciphertext) {
  ByteWriter w;
  w.u32(from);
  w.u32(to);
  w.blob(ciphertext);
  return w.take();
}

void parse_enc_share(const Bytes& payload, uint32_t* from, uint32_t* to, Bytes* ciphertext) {
  ByteReader r(payload);
  *from = r.u32();
  *to = r.u32();
  *ciphertext = r.blob();
  r.expect_done();
}

Bytes share_plaintext(uint32_t from, uint32_t to, const std::vector<uint64_t>& values) {
  ByteWriter w;
  w.u32(from);
  w.u32(to);
  w.u32(static_cast<uint32_t>(values.size()));
  for (uint64_t v : values) w.scalar(v);
  return w.take();
}

std::vector<uint64_t> parse_share_plaintext(const Bytes& plaintext, uint32_t expect_from,
                                            uint32_t expect_to) {
  ByteReader r(plaintext);
  uint32_t from = r.u32();
  uint32_t to = r.u32();
  if (from != expect_from || to != expect_to)
    throw DecodeError("share plaintext: address mismatch");
  uint32_t count = r.u32();
  std::vector<uint64_t> values(count);
  for (auto& v : values) v = r.scalar();
  r.expect_done();
  return values;
}

Bytes share_route_payload(const std::vector<uint32_t>& u2, const std::vector<RouteEntry>& entries) {
  ByteWriter w;
  w.raw(encode_id_list(u2));
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const RouteEntry& e : entries) {
    w.u32(e.sender);
    w.blob(e.ciphertext);
    w.blob(e.sig);
  }
  return w.take();
}

void parse_share_route(const Bytes& payload, std::vector<uint32_t>* u2,
                       std::vector<RouteEntry>* entries) {
  ByteReader r(payload);
  uint32_t id_count = r.u32();
  u2->resize(id_count);
  for (auto& id : *u2) id = r.u32();
  uint32_t count = r.u32();
  entries->resize(count);
  for (auto& e : *entries) {
    e.sender = r.u32();
    e.ciphertext = r.blob();
    e.sig = r.blob();
  }
  r.expect_done();
}

Bytes list_digest(const std::vector<uint32_t>& ids) {
  auto d = sha256(encode_id_list(ids));
  return Bytes(d.begin(), d.end());
}

Bytes sig_echo_payload(const std::vector<EchoEntry>& entries) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const EchoEntry& e : entries) {
    w.u32(e.id);
    w.blob(e.sig);
  }
  return w.take();
}

std::vector<EchoEntry> parse_sig_echo(const Bytes& payload) {
  ByteReader r(payload);
  uint32_t count = r.u32();
  std::vector<EchoEntry> entries(count);
  for (auto& e : entries) {
    e.id = r.u32();
    e.sig = r.blob();
  }
  r.expect_done();
  return entries;
}

Bytes recovery_payload(const std::vector<RecoveryEntry>& dropped,
                       const std::vector<RecoveryEntry>& surviving) {
  ByteWriter w;
  auto section = [&w](const std::vector<RecoveryEntry>& entries) {
    w.u32(static_cast<uint32_t>(entries.size()));
    for (const RecoveryEntry& e : entries) {
      w.u32(e.id);
      w.blob(e.value);
    }
  };
  section(dropped);
  section(surviving);
  return w.take();
}

void parse_recovery(const Bytes& payload, std::vector<RecoveryEntry>* dropped,
                    std::vector<RecoveryEntry>* surviving) {
  ByteReader r(payload);
  auto section = [&r](std::vector<RecoveryEntry>* entries) {
    uint32_t count = r.u32();
    entries->resize(count);
    for (auto& e : *entries) {
      e.id = r.u32();
      e.value = r.blob();
    }
  };
  section(dropped);
  section(surviving);
  r.expect_done();
}

// ---- Configuration ----------------------------------------------------------

void ProtocolConfig::validate() const {
  if (n < 2) throw ConfigError("need at least two users");
  if (n >= kServerId) throw ConfigError("user count exceeds the id space");
  if (m == 0) throw ConfigError("vector length must be positive");
  if (!is_prime_u64(p)) throw ConfigError("modulus is not prime");
  if (mask_r < 2 || mask_r >= p) throw ConfigError("chain base out of range");
  if (t < 2 || t >= n) throw ConfigError("threshold must satisfy 1 < t < n");
  if (mode == Mode::kActiveAdversary && t < 2 * n / 3 + 1)
    throw ConfigError("active mode requires t >= floor(2n/3) + 1");
  if (dh_group == nullptr || mask_group == nullptr) throw ConfigError("groups not set");
  if (mask_group->order() != mpz_class(static_cast<unsigned long>(p)))
    throw ConfigError("mask group order must equal the share modulus");
}

// ---- User -------------------------------------------------------------------

AhUser::AhUser(const ProtocolConfig& cfg, uint32_t id, std::vector<uint64_t> input, Rng rng,
               const BulletinBoard* pki)
    : cfg_(cfg),
      field_(cfg.p),
      id_(id),
      input_(std::move(input)),
      rng_(rng),
      pki_(pki),
      sig_keys_(ds_gen(rng_)) {
  if (input_.size() != cfg_.m) throw ConfigError("input length does not match m");
}

void AhUser::register_keys(BulletinBoard* pki) { pki->register_key(id_, sig_keys_.pk); }

RoundMessage AhUser::finish(RoundMessage msg, bool sign) {
  if (sign && cfg_.mode == Mode::kActiveAdversary)
    msg.signature = ds_sign_message(sig_keys_.sk, msg);
  return msg;
}

std::vector<RoundMessage> AhUser::abort(const std::string& reason) {
  aborted_ = true;
  abort_reason_ = reason;
  return {};
}

std::vector<RoundMessage> AhUser::on_round(int round, const std::vector<RoundMessage>& inbox) {
  if (aborted_) return {};
  std::vector<RoundMessage> out;
  try {
    switch (round) {
      case 0:
        out = {round0_key_agreement()};
        break;
      case 1:
        if (inbox.size() != 1 || inbox[0].tag != MsgTag::kKeyBroadcast)
          return abort("no key broadcast received");
        out = round1_key_sharing(inbox[0]);
        break;
      case 2:
        if (inbox.size() != 1 || inbox[0].tag != MsgTag::kShareRoute)
          return abort("no routed shares received");
        out = {round2_masking(inbox[0])};
        break;
      case 3:
        if (inbox.size() != 1 || inbox[0].tag != MsgTag::kSurvivorList)
          return abort("no survivor list received");
        out = {round3_consistency_check(inbox[0])};
        break;
      case 4:
        out = {round4_unmasking(inbox)};
        break;
      default:
        throw ConfigError("unknown round");
    }
  } catch (const DecodeError& e) {
    return abort(e.what());
  } catch (const AuthFailure& e) {
    return abort(e.what());
  } catch (const NotFound& e) {
    return abort(e.what());
  } catch (const MissingShare& e) {
    return abort(e.what());
  }
  if (aborted_) return {};
  return out;
}

RoundMessage AhUser::round0_key_agreement() {
  dh_ = dh_gen(*cfg_.dh_group, rng_);
  RoundMessage msg;
  msg.round = 0;
  msg.sender = id_;
  msg.receiver = kServerId;
  msg.tag = MsgTag::kKeyAdvert;
  msg.payload = advert_payload({cfg_.dh_group->encode(dh_->pk)});
  return finish(std::move(msg), true);
}

std::vector<RoundMessage> AhUser::round1_key_sharing(const RoundMessage& broadcast) {
  auto entries = parse_key_broadcast(broadcast.payload);
  u1_.clear();
  std::map<uint32_t, GroupElement> pks;
  std::set<Bytes> seen_pk_bytes;
  for (const auto& e : entries) {
    u1_.push_back(e.id);
    auto pk_bytes = parse_advert(e.advert);
    if (!seen_pk_bytes.insert(pk_bytes[0]).second) return abort("duplicate public key");
    pks.emplace(e.id, cfg_.dh_group->decode(pk_bytes[0]));
    if (cfg_.mode == Mode::kActiveAdversary) {
      RoundMessage advert;
      advert.round = 0;
      advert.sender = e.id;
      advert.receiver = kServerId;
      advert.tag = MsgTag::kKeyAdvert;
      advert.payload = e.advert;
      advert.signature = e.sig;
      if (!ds_verify_message(pki_->lookup(e.id), advert))
        return abort("bad advertisement signature");
    }
  }
  if (!sorted_unique(u1_)) return abort("malformed survivor set");
  if (u1_.size() <= cfg_.t) return abort("too few advertisements");
  if (!contains(u1_, id_)) return abort("own advertisement missing");

  for (uint32_t j : u1_) {
    if (j == id_) continue;
    channel_keys_.emplace(j, dh_agree(*cfg_.dh_group, dh_->sk, pks.at(j)));
  }

  s_ = rng_.field_element(field_);
  std::vector<ShareIndex> xs;
  xs.reserve(u1_.size());
  for (uint32_t j : u1_) xs.push_back(share_index(j));
  ShareSet shares = sss_share(field_, s_, cfg_.t, xs, rng_);
  held_shares_[id_] = shares.shares.at(share_index(id_));

  std::vector<RoundMessage> out;
  for (uint32_t j : u1_) {
    if (j == id_) continue;
    uint64_t share = shares.shares.at(share_index(j));
    my_outgoing_shares_[j] = share;
    Bytes pt = share_plaintext(id_, j, {share});
    Bytes ct = ae_enc(channel_keys_.at(j), pt, derive_nonce(1, id_, j));
    RoundMessage msg;
    msg.round = 1;
    msg.sender = id_;
    msg.receiver = kServerId;
    msg.tag = MsgTag::kEncShare;
    msg.payload = enc_share_payload(id_, j, ct);
    out.push_back(finish(std::move(msg), true));
  }
  return out;
}

RoundMessage AhUser::round2_masking(const RoundMessage& route) {
  std::vector<uint32_t> u2;
  std::vector<RouteEntry> entries;
  parse_share_route(route.payload, &u2, &entries);
  auto fail = [this](const std::string& reason) {
    abort(reason);
    return RoundMessage{};
  };
  if (!sorted_unique(u2) || !subset_of(u2, u1_)) return fail("malformed survivor set");
  if (u2.size() < cfg_.t) return fail("too few share senders");
  if (!contains(u2, id_)) return fail("excluded from survivor set");
  u2_ = u2;

  std::set<uint32_t> covered{id_};
  for (const auto& e : entries) {
    if (e.sender == id_ || !contains(u2_, e.sender)) return fail("share from unlisted sender");
    if (!covered.insert(e.sender).second) return fail("duplicate share sender");
    RoundMessage orig;
    orig.round = 1;
    orig.sender = e.sender;
    orig.receiver = kServerId;
    orig.tag = MsgTag::kEncShare;
    orig.payload = enc_share_payload(e.sender, id_, e.ciphertext);
    orig.signature = e.sig;
    if (cfg_.mode == Mode::kActiveAdversary && !ds_verify_message(pki_->lookup(e.sender), orig))
      return fail("bad share signature");
    Bytes pt = ae_dec(channel_keys_.at(e.sender), e.ciphertext);
    auto values = parse_share_plaintext(pt, e.sender, id_);
    if (values.size() != 1) return fail("malformed share plaintext");
    held_shares_[e.sender] = values[0];
  }
  if (covered.size() != u2_.size()) return fail("missing share from listed sender");

  std::vector<uint64_t> y = mask(field_, input_, s_, cfg_.mask_params());
  RoundMessage msg;
  msg.round = 2;
  msg.sender = id_;
  msg.receiver = kServerId;
  msg.tag = MsgTag::kMaskedInput;
  msg.payload = encode_scalar_vector(y);
  return finish(std::move(msg), true);
}

RoundMessage AhUser::round3_consistency_check(const RoundMessage& survivor_list) {
  auto fail = [this](const std::string& reason) {
    abort(reason);
    return RoundMessage{};
  };
  if (survivor_list.sender != kServerId ||
      !ds_verify_message(pki_->lookup(kServerId), survivor_list))
    return fail("bad survivor-list signature");
  std::vector<uint32_t> u3 = decode_id_list(survivor_list.payload);
  if (!sorted_unique(u3) || !subset_of(u3, u2_)) return fail("malformed survivor set");
  if (u3.size() < cfg_.t) return fail("too few masked-round survivors");
  if (!contains(u3, id_)) return fail("excluded from survivor set");
  u3_ = u3;

  RoundMessage msg;
  msg.round = 3;
  msg.sender = id_;
  msg.receiver = kServerId;
  msg.tag = MsgTag::kListSig;
  msg.payload = list_digest(u3_);
  return finish(std::move(msg), true);
}

RoundMessage AhUser::round4_unmasking(const std::vector<RoundMessage>& inbox) {
  auto fail = [this](const std::string& reason) {
    abort(reason);
    return RoundMessage{};
  };
  if (cfg_.mode == Mode::kSemiHonest) {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kSurvivorList)
      return fail("no survivor list received");
    std::vector<uint32_t> u3 = decode_id_list(inbox[0].payload);
    if (!sorted_unique(u3) || !subset_of(u3, u2_)) return fail("malformed survivor set");
    if (u3.size() < cfg_.t) return fail("too few masked-round survivors");
    if (!contains(u3, id_)) return fail("excluded from survivor set");
    u3_ = u3;
  } else {
    if (inbox.size() != 1 || inbox[0].tag != MsgTag::kSigEcho)
      return fail("no signature echo received");
    auto entries = parse_sig_echo(inbox[0].payload);
    Bytes digest = list_digest(u3_);
    std::set<uint32_t> endorsers;
    for (const auto& e : entries) {
      if (!contains(u3_, e.id) || !endorsers.insert(e.id).second)
        return fail("malformed signature echo");
      RoundMessage orig;
      orig.round = 3;
      orig.sender = e.id;
      orig.receiver = kServerId;
      orig.tag = MsgTag::kListSig;
      orig.payload = digest;
      orig.signature = e.sig;
      if (!ds_verify_message(pki_->lookup(e.id), orig)) return fail("bad consistency signature");
    }
    if (endorsers.size() < cfg_.t) return fail("too few consistency signatures");
  }
  return share_sum_message();
}

RoundMessage AhUser::share_sum_message() {
  uint64_t s_sum = share_sum_for_unmask(field_, held_shares_, u3_);
  RoundMessage msg;
  msg.round = 4;
  msg.sender = id_;
  msg.receiver = kServerId;
  msg.tag = MsgTag::kShareSum;
  msg.payload = encode_scalar(s_sum);
  return finish(std::move(msg), true);
}

// ---- Server -----------------------------------------------------------------

AhServer::AhServer(const ProtocolConfig& cfg, BulletinBoard* pki, Rng rng)
    : cfg_(cfg), field_(cfg.p), pki_(pki), sig_keys_(ds_gen(rng)) {
  cfg_.validate();
}

void AhServer::register_keys(BulletinBoard* pki) { pki->register_key(kServerId, sig_keys_.pk); }

bool AhServer::check_user_sig(const RoundMessage& msg) const {
  if (cfg_.mode == Mode::kSemiHonest || lax_validation_) return true;
  try {
    return ds_verify_message(pki_->lookup(msg.sender), msg);
  } catch (const NotFound&) {
    return false;
  }
}

std::vector<RoundMessage> AhServer::abort(int round, const std::string& reason) {
  aborted_ = true;
  result_.success = false;
  result_.abort_round = round;
  result_.abort_reason = reason;
  return {};
}

std::vector<RoundMessage> AhServer::on_round(int round, const std::vector<RoundMessage>& inbox) {
  if (aborted_ || result_.success) return {};
  switch (round) {
    case 0: return round0_collect(inbox);
    case 1: return round1_collect(inbox);
    case 2: return round2_collect(inbox);
    case 3: return round3_collect(inbox);
    case 4: return round4_collect(inbox);
    default: throw ConfigError("unknown round");
  }
}

std::vector<RoundMessage> AhServer::round0_collect(const std::vector<RoundMessage>& inbox) {
  for (const RoundMessage& msg : inbox) {
    if (msg.tag != MsgTag::kKeyAdvert || msg.sender >= cfg_.n) continue;
    if (adverts_.count(msg.sender)) continue;
    if (!check_user_sig(msg)) continue;
    adverts_.emplace(msg.sender, msg);
  }
  if (adverts_.size() < cfg_.t) return abort(0, "too few advertisements");
  std::vector<BroadcastEntry> entries;
  for (const auto& [id, msg] : adverts_) {
    result_.u1.push_back(id);
    entries.push_back({id, msg.payload, msg.signature});
  }
  Bytes payload = key_broadcast_payload(entries);
  std::vector<RoundMessage> out;
  for (uint32_t id : result_.u1) {
    RoundMessage msg;
    msg.round = 0;
    msg.sender = kServerId;
    msg.receiver = id;
    msg.tag = MsgTag::kKeyBroadcast;
    msg.payload = payload;
    out.push_back(std::move(msg));
  }
  return out;
}

std::vector<RoundMessage> AhServer::round1_collect(const std::vector<RoundMessage>& inbox) {
  for (const RoundMessage& msg : inbox) {
    if (msg.tag != MsgTag::kEncShare) continue;
    if (!std::binary_search(result_.u1.begin(), result_.u1.end(), msg.sender)) continue;
    round1_msgs_[msg.sender].push_back(msg);
  }
  // A sender joins U2 only with a complete, authentic bundle: one share for
  // every other member of U1.
  for (const auto& [sender, msgs] : round1_msgs_) {
    std::set<uint32_t> targets;
    bool ok = true;
    for (const RoundMessage& msg : msgs) {
      uint32_t from, to;
      Bytes ct;
      try {
        parse_enc_share(msg.payload, &from, &to, &ct);
      } catch (const DecodeError&) {
        ok = false;
        break;
      }
      if (from != sender || !check_user_sig(msg) || !targets.insert(to).second) {
        ok = false;
        break;
      }
    }
    if (ok && targets.size() == result_.u1.size() - 1 && !targets.count(sender))
      result_.u2.push_back(sender);
  }
  std::sort(result_.u2.begin(), result_.u2.end());
  if (result_.u2.size() < cfg_.t) return abort(1, "too few share senders");

  std::vector<RoundMessage> out;
  for (uint32_t receiver : result_.u2) {
    std::vector<RouteEntry> entries;
    for (uint32_t sender : result_.u2) {
      if (sender == receiver) continue;
      for (const RoundMessage& msg : round1_msgs_.at(sender)) {
        uint32_t from, to;
        Bytes ct;
        parse_enc_share(msg.payload, &from, &to, &ct);
        if (to == receiver) {
          entries.push_back({sender, ct, msg.signature});
          break;
        }
      }
    }
    RoundMessage msg;
    msg.round = 1;
    msg.sender = kServerId;
    msg.receiver = receiver;
    msg.tag = MsgTag::kShareRoute;
    msg.payload = share_route_payload(result_.u2, entries);
    out.push_back(std::move(msg));
  }
  return out;
}

std::vector<RoundMessage> AhServer::round2_collect(const std::vector<RoundMessage>& inbox) {
  sum_y_.assign(cfg_.m, 0);
  for (const RoundMessage& msg : inbox) {
    if (msg.tag != MsgTag::kMaskedInput) continue;
    if (!std::binary_search(result_.u2.begin(), result_.u2.end(), msg.sender)) continue;
    if (std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
    if (!check_user_sig(msg)) continue;
    std::vector<uint64_t> y;
    try {
      y = decode_scalar_vector(msg.payload);
    } catch (const DecodeError&) {
      continue;
    }
    if (y.size() != cfg_.m) continue;
    for (size_t k = 0; k < cfg_.m; ++k) sum_y_[k] = field_.add(sum_y_[k], field_.reduce(y[k]));
    result_.u3.push_back(msg.sender);
    std::sort(result_.u3.begin(), result_.u3.end());
  }
  if (result_.u3.size() < cfg_.t) return abort(2, "too few masked inputs");

  std::vector<RoundMessage> out;
  for (uint32_t id : result_.u3) out.push_back(make_survivor_broadcast(result_.u3, id));
  return out;
}

RoundMessage AhServer::make_survivor_broadcast(const std::vector<uint32_t>& list,
                                               uint32_t receiver) const {
  RoundMessage msg;
  msg.round = 2;
  msg.sender = kServerId;
  msg.receiver = receiver;
  msg.tag = MsgTag::kSurvivorList;
  msg.payload = encode_id_list(list);
  if (cfg_.mode == Mode::kActiveAdversary) msg.signature = ds_sign_message(sig_keys_.sk, msg);
  return msg;
}

std::vector<RoundMessage> AhServer::round3_collect(const std::vector<RoundMessage>& inbox) {
  if (cfg_.mode == Mode::kSemiHonest) return {};
  Bytes digest = list_digest(result_.u3);
  for (const RoundMessage& msg : inbox) {
    if (msg.tag != MsgTag::kListSig) continue;
    if (!std::binary_search(result_.u3.begin(), result_.u3.end(), msg.sender)) continue;
    if (std::binary_search(result_.u4.begin(), result_.u4.end(), msg.sender)) continue;
    if (msg.payload != digest || !check_user_sig(msg)) continue;
    result_.u4.push_back(msg.sender);
    std::sort(result_.u4.begin(), result_.u4.end());
  }
  if (result_.u4.size() < cfg_.t) return abort(3, "too few consistency signatures");

  std::vector<EchoEntry> entries;
  std::map<uint32_t, Bytes> sigs;
  for (const RoundMessage& msg : inbox)
    if (msg.tag == MsgTag::kListSig) sigs.emplace(msg.sender, msg.signature);
  for (uint32_t id : result_.u4) entries.push_back({id, sigs.at(id)});
  Bytes payload = sig_echo_payload(entries);

  std::vector<RoundMessage> out;
  for (uint32_t id : result_.u4) {
    RoundMessage msg;
    msg.round = 3;
    msg.sender = kServerId;
    msg.receiver = id;
    msg.tag = MsgTag::kSigEcho;
    msg.payload = payload;
    out.push_back(std::move(msg));
  }
  return out;
}

std::vector<RoundMessage> AhServer::round4_collect(const std::vector<RoundMessage>& inbox) {
  const std::vector<uint32_t>& eligible =
      cfg_.mode == Mode::kActiveAdversary ? result_.u4 : result_.u3;
  std::vector<Share> shares;
  for (const RoundMessage& msg : inbox) {
    if (msg.tag != MsgTag::kShareSum) continue;
    if (!std::binary_search(eligible.begin(), eligible.end(), msg.sender)) continue;
    if (std::binary_search(result_.u5.begin(), result_.u5.end(), msg.sender)) continue;
    if (!check_user_sig(msg)) continue;
    uint64_t value;
    try {
      value = decode_scalar(msg.payload);
    } catch (const DecodeError&) {
      continue;
    }
    if (value >= field_.p()) continue;
    shares.push_back({share_index(msg.sender), value});
    result_.u5.push_back(msg.sender);
    std::sort(result_.u5.begin(), result_.u5.end());
  }
  if (result_.u5.size() < cfg_.t) return abort(4, "too few share sums");

  uint64_t s_sum = sss_reconstruct(field_, cfg_.t, shares);
  result_.output = unmask_sum(field_, sum_y_, s_sum, cfg_.mask_params());
  result_.success = true;
  return {};
}

}  // namespace ahsecagg
