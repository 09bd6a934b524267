#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ahsecagg/metrics.h"
#include "ahsecagg/protocol.h"

namespace ahsecagg {

// ---- Scripts ----------------------------------------------------------------

// Victims stop sending from the given round on (they still computed earlier
// rounds). Either an explicit victim list or a fraction resolved from the
// run seed: floor(rate * n) victims drawn without replacement.
struct DropoutScript {
  int round = -1;  // -1: nobody drops
  std::vector<uint32_t> victims;
  double rate = 0.0;

  std::vector<uint32_t> resolve(uint32_t n, Rng rng) const;
};

enum class Scenario {
  kNone,
  kForgeSignature,      // one advertisement signature is forged in transit and
                        // relayed by a colluding server
  kTamperCiphertext,    // every routed share ciphertext is flipped in transit
  kSplitView,           // the server shows two disjoint survivor lists
  kReplayRegistration,  // a second registration is attempted for a user's id
  kWithholdBroadcast,   // the survivor list is withheld from some survivors
};

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct AdversaryScript {
  Scenario scenario = Scenario::kNone;
  uint32_t forge_target = 0;
  // Split-view partition; when empty the survivor set is split into halves.
  std::vector<uint32_t> view_a, view_b;
  std::vector<uint32_t> withhold_from;
};

struct ScenarioReport {
  size_t sigs_list_a = 0;
  size_t sigs_list_b = 0;
  size_t sharesums_list_a = 0;
  size_t sharesums_list_b = 0;
  bool reconstruct_a_possible = false;
  bool reconstruct_b_possible = false;
  bool replay_rejected = false;
  std::map<uint32_t, std::string> user_aborts;  // id -> reason
};

// Signature counts a split-view server can gather when each member of the
// survivor set is shown exactly one of two disjoint lists and honest users
// endorse only a list that contains them and has at least t members.
std::pair<size_t, size_t> split_view_signature_counts(const std::vector<uint32_t>& view_a,
                                                      const std::vector<uint32_t>& view_b,
                                                      uint32_t t);

// Worst case over colluder placement: up to n_c colluding members endorse
// their view even when it is below t; every user still endorses at most one
// view per run (the consistency round accepts a single endorsement each).
std::pair<size_t, size_t> split_view_worst_counts(size_t size_a, size_t size_b, uint32_t t,
                                                  size_t n_c);

// ---- Metrics and transcript ---------------------------------------------------

struct TranscriptLine {
  int round = 0;
  uint32_t sender = 0;
  uint32_t receiver = 0;
  MsgTag tag = MsgTag::kKeyAdvert;
  size_t bytes = 0;
  bool valid_sig = true;
};

std::string transcript_csv(const std::vector<TranscriptLine>& lines);

struct RunMetrics {
  std::map<uint32_t, Counters> party;  // users by id, server under kServerId
  std::array<double, 5> round_wall_ms{};
  std::vector<TranscriptLine> transcript;
  size_t undelivered_bytes = 0;

  const Counters& server() const { return party.at(kServerId); }
  Counters user_total() const;
  double total_wall_ms() const;
};

// ---- Network ------------------------------------------------------------------

// Star-topology store-and-forward queue. Bytes are charged to the sender at
// send time and to the receiver at delivery; messages drained by nobody remain
// queued and are reported as undelivered.
class SimNet {
 public:
  SimNet(RunMetrics* metrics, const BulletinBoard* pki, Mode mode);

  void send(int round, RoundMessage msg);
  std::vector<RoundMessage> drain(uint32_t receiver);
  void finalize();  // accumulate undelivered bytes into the metrics

 private:
  bool signature_valid(const RoundMessage& msg) const;

  RunMetrics* metrics_;
  const BulletinBoard* pki_;
  Mode mode_;
  std::map<uint32_t, std::vector<RoundMessage>> queues_;
};

// ---- Run orchestration ----------------------------------------------------------

struct SimConfig {
  ProtocolConfig protocol;
  uint64_t seed = 1;
  // Advisory per-message one-way latency added to round wall times.
  double latency_ms = 0.0;
  // Inputs are sampled uniformly below min(input_bound, p).
  uint64_t input_bound = uint64_t{1} << 32;
  DropoutScript dropout;
  AdversaryScript adversary;
};

struct SimOutcome {
  AggregationResult result;
  RunMetrics metrics;
  ScenarioReport scenario;
  std::map<uint32_t, std::vector<uint64_t>> inputs;
  // secagg_tskg aggregations record each user's temporary key here.
  std::map<uint32_t, uint64_t> user_temp_keys;

  // Componentwise sum mod p of the listed users' inputs (the oracle the
  // protocol output is checked against).
  std::vector<uint64_t> expected_sum(const std::vector<uint32_t>& ids, uint64_t p) const;
};

SimOutcome run_aggregation(const SimConfig& cfg);

// Deterministic per-party seed derivation shared by all scheme drivers.
namespace simlabel {
inline uint64_t user(uint32_t id) { return (uint64_t{1} << 32) | id; }
inline uint64_t input(uint32_t id) { return (uint64_t{2} << 32) | id; }
inline constexpr uint64_t kServer = uint64_t{3} << 32;
inline constexpr uint64_t kDropout = uint64_t{4} << 32;
inline constexpr uint64_t kAdversary = uint64_t{5} << 32;
}  // namespace simlabel

// Samples every user's input vector from the run seed, uniformly below
// min(input_bound, p).
std::map<uint32_t, std::vector<uint64_t>> sample_inputs(const SimConfig& cfg);

}  // namespace ahsecagg
