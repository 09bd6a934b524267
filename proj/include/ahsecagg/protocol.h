#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ahsecagg/crypto.h"
#include "ahsecagg/encoding.h"
#include "ahsecagg/field.h"
#include "ahsecagg/group.h"
#include "ahsecagg/masking.h"
#include "ahsecagg/shamir.h"

namespace ahsecagg {

inline constexpr uint32_t kServerId = 0xffffffffu;

enum class Mode { kSemiHonest, kActiveAdversary };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);  // ConfigError on unknown

enum class MsgTag : uint8_t {
  kKeyAdvert = 1,      // user -> server: public key advertisement
  kKeyBroadcast = 2,   // server -> users: advertisements of the first survivor set
  kEncShare = 3,       // user -> server (relayed): one encrypted share
  kShareRoute = 4,     // server -> user: routed ciphertexts plus the sender set
  kMaskedInput = 5,    // user -> server: masked vector
  kSurvivorList = 6,   // server -> users: masked-round survivor set
  kListSig = 7,        // user -> server: endorsement of the survivor set
  kSigEcho = 8,        // server -> users: collected endorsements
  kShareSum = 9,       // user -> server: summed shares for unmasking
  kNonce = 10,         // server -> users: per-aggregation nonce
  kSubSigBundle = 11,  // user -> server: sub-signatures for recovery
  kShareBundle = 12,   // user -> server: shares of dropped/surviving peers
};

const char* msg_tag_name(MsgTag tag);

struct RoundMessage {
  uint8_t round = 0;
  uint32_t sender = 0;
  uint32_t receiver = 0;
  MsgTag tag = MsgTag::kKeyAdvert;
  Bytes payload;
  Bytes signature;  // empty when the message is unsigned

  // Accounted transfer size: 10 header bytes + payload + signature.
  size_t wire_size() const { return 10 + payload.size() + signature.size(); }
};

// The exact bytes a signature covers: tag, round, sender, payload. Binding
// the header prevents replaying a signature in another round or identity.
Bytes signed_frame(const RoundMessage& msg);
Bytes ds_sign_message(const Bytes& sk, const RoundMessage& msg);
bool ds_verify_message(const Bytes& pk, const RoundMessage& msg);

// ---- Payload codecs ---------------------------------------------------------

// Key advertisement: one or more public-key encodings.
Bytes advert_payload(const std::vector<Bytes>& pks);
std::vector<Bytes> parse_advert(const Bytes& payload);

// Key broadcast: per listed user, the advert payload and its signature.
struct BroadcastEntry {
  uint32_t id = 0;
  Bytes advert;
  Bytes sig;
};
Bytes key_broadcast_payload(const std::vector<BroadcastEntry>& entries);
std::vector<BroadcastEntry> parse_key_broadcast(const Bytes& payload);

// Encrypted share: sender, receiver, AEAD ciphertext.
Bytes enc_share_payload(uint32_t from, uint32_t to, const Bytes& ciphertext);
void parse_enc_share(const Bytes& payload, uint32_t* from, uint32_t* to, Bytes* ciphertext);

// Share plaintext carried inside the ciphertext: sender, receiver, values.
Bytes share_plaintext(uint32_t from, uint32_t to, const std::vector<uint64_t>& values);
std::vector<uint64_t> parse_share_plaintext(const Bytes& plaintext, uint32_t expect_from,
                                            uint32_t expect_to);

// Routed bundle: the round-1 sender set and this receiver's ciphertexts.
struct RouteEntry {
  uint32_t sender = 0;
  Bytes ciphertext;
  Bytes sig;  // the sender's signature over its kEncShare message
};
Bytes share_route_payload(const std::vector<uint32_t>& u2, const std::vector<RouteEntry>& entries);
void parse_share_route(const Bytes& payload, std::vector<uint32_t>* u2,
                       std::vector<RouteEntry>* entries);

// Survivor-set endorsement: the digest of the canonical sorted id list.
Bytes list_digest(const std::vector<uint32_t>& ids);

// Signature echo: (id, signature) pairs.
struct EchoEntry {
  uint32_t id = 0;
  Bytes sig;
};
Bytes sig_echo_payload(const std::vector<EchoEntry>& entries);
std::vector<EchoEntry> parse_sig_echo(const Bytes& payload);

// Recovery bundle: (peer id, opaque value) pairs in two sections, one for
// dropped peers and one for survivors.
struct RecoveryEntry {
  uint32_t id = 0;
  Bytes value;
};
Bytes recovery_payload(const std::vector<RecoveryEntry>& dropped,
                       const std::vector<RecoveryEntry>& surviving);
void parse_recovery(const Bytes& payload, std::vector<RecoveryEntry>* dropped,
                    std::vector<RecoveryEntry>* surviving);

// ---- Configuration ----------------------------------------------------------

struct ProtocolConfig {
  uint32_t n = 0;
  uint32_t t = 0;
  size_t m = 0;
  Mode mode = Mode::kSemiHonest;
  uint64_t p = kDefaultPrime;
  // Chain base, sampled once per deployment from [2, p).
  uint64_t mask_r = 3;
  const Group* dh_group = &Group::desk_dh();
  const Group* mask_group = &Group::desk_mask();

  // Throws ConfigError on violation. Semi-honest requires 1 < t < n; the
  // active mode requires t >= floor(2n/3) + 1 so that conflicting survivor
  // views can never both gather t endorsements.
  void validate() const;
  Field field() const { return Field(p); }
  MaskParams mask_params() const { return {mask_r, m}; }
};

// Share index of a user id: evaluation points are ids shifted by one so that
// zero (the secret's position) is never used.
inline ShareIndex share_index(uint32_t id) { return static_cast<ShareIndex>(id) + 1; }

struct AggregationResult {
  bool success = false;
  int abort_round = -1;
  std::string abort_reason;
  std::vector<uint64_t> output;
  std::vector<uint32_t> u1, u2, u3, u4, u5;
};

// ---- Party state machines ---------------------------------------------------

// User-side state machine. Each round consumes the server's previous
// emission and produces this user's messages. A user that aborts is terminal
// and emits nothing further.
class AhUser {
 public:
  AhUser(const ProtocolConfig& cfg, uint32_t id, std::vector<uint64_t> input, Rng rng,
         const BulletinBoard* pki);

  // Registers this user's signature key (active mode; called before round 0).
  void register_keys(BulletinBoard* pki);

  std::vector<RoundMessage> on_round(int round, const std::vector<RoundMessage>& inbox);

  RoundMessage round0_key_agreement();
  std::vector<RoundMessage> round1_key_sharing(const RoundMessage& broadcast);
  RoundMessage round2_masking(const RoundMessage& route);
  RoundMessage round3_consistency_check(const RoundMessage& survivor_list);
  RoundMessage round4_unmasking(const std::vector<RoundMessage>& inbox);

  uint32_t id() const { return id_; }
  bool aborted() const { return aborted_; }
  const std::string& abort_reason() const { return abort_reason_; }
  uint64_t secret() const { return s_; }

 private:
  RoundMessage finish(RoundMessage msg, bool sign);
  std::vector<RoundMessage> abort(const std::string& reason);
  RoundMessage share_sum_message();

  ProtocolConfig cfg_;
  Field field_;
  uint32_t id_;
  std::vector<uint64_t> input_;
  Rng rng_;
  const BulletinBoard* pki_;
  SigKeyPair sig_keys_;

  std::optional<DhKeyPair> dh_;
  std::map<uint32_t, AeadKey> channel_keys_;
  uint64_t s_ = 0;
  std::map<uint32_t, uint64_t> my_outgoing_shares_;  // receiver id -> share
  std::map<uint32_t, uint64_t> held_shares_;         // peer id -> that peer's share for me
  std::vector<uint32_t> u1_, u2_, u3_;
  bool aborted_ = false;
  std::string abort_reason_;
};

// Server-side state machine; collects each round as an unordered multiset
// keyed by sender, enforces the survivor threshold, and finalizes the sum.
class AhServer {
 public:
  AhServer(const ProtocolConfig& cfg, BulletinBoard* pki, Rng rng);

  void register_keys(BulletinBoard* pki);

  std::vector<RoundMessage> on_round(int round, const std::vector<RoundMessage>& inbox);

  const AggregationResult& result() const { return result_; }
  bool aborted() const { return aborted_; }

  // Scripted-adversary hooks: a colluding server may skip signature checks
  // and emit survivor lists of its choosing under its real key.
  void set_lax_validation(bool lax) { lax_validation_ = lax; }
  RoundMessage make_survivor_broadcast(const std::vector<uint32_t>& list, uint32_t receiver) const;
  const Bytes& sig_sk() const { return sig_keys_.sk; }

 private:
  std::vector<RoundMessage> round0_collect(const std::vector<RoundMessage>& inbox);
  std::vector<RoundMessage> round1_collect(const std::vector<RoundMessage>& inbox);
  std::vector<RoundMessage> round2_collect(const std::vector<RoundMessage>& inbox);
  std::vector<RoundMessage> round3_collect(const std::vector<RoundMessage>& inbox);
  std::vector<RoundMessage> round4_collect(const std::vector<RoundMessage>& inbox);
  std::vector<RoundMessage> abort(int round, const std::string& reason);
  bool check_user_sig(const RoundMessage& msg) const;

  ProtocolConfig cfg_;
  Field field_;
  BulletinBoard* pki_;
  SigKeyPair sig_keys_;
  bool lax_validation_ = false;

  std::map<uint32_t, RoundMessage> adverts_;
  std::map<uint32_t, std::vector<RoundMessage>> round1_msgs_;
  std::vector<uint64_t> sum_y_;
  AggregationResult result_;
  bool aborted_ = false;
};

}  // namespace ahsecagg
