#include "ahsecagg/sim.h"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace ahsecagg {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

using simlabel::input;
using simlabel::kAdversary;
using simlabel::kDropout;
using simlabel::kServer;

uint64_t user_label(uint32_t id) { return simlabel::user(id); }

}  // namespace

std::map<uint32_t, std::vector<uint64_t>> sample_inputs(const SimConfig& cfg) {
  Rng root(cfg.seed);
  uint64_t p = cfg.protocol.p;
  uint64_t bound = std::min(cfg.input_bound == 0 ? p : cfg.input_bound, p);
  std::map<uint32_t, std::vector<uint64_t>> inputs;
  for (uint32_t id = 0; id < cfg.protocol.n; ++id) {
    Rng input_rng = root.child(input(id));
    std::vector<uint64_t> x(cfg.protocol.m);
    for (auto& v : x) v = input_rng.uniform_below(bound);
    inputs.emplace(id, std::move(x));
  }
  return inputs;
}

std::vector<uint32_t> DropoutScript::resolve(uint32_t n, Rng rng) const {
  if (round < 0) return {};
  std::vector<uint32_t> out = victims;
  if (out.empty() && rate > 0.0) {
    auto k = static_cast<uint32_t>(rate * n + 1e-9);
    std::set<uint32_t> picked;
    while (picked.size() < k) picked.insert(static_cast<uint32_t>(rng.uniform_below(n)));
    out.assign(picked.begin(), picked.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (uint32_t id : out)
    if (id >= n) throw ConfigError("dropout victim id out of range");
  return out;
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kNone: return "none";
    case Scenario::kForgeSignature: return "forge_signature";
    case Scenario::kTamperCiphertext: return "tamper_ciphertext";
    case Scenario::kSplitView: return "split_view";
    case Scenario::kReplayRegistration: return "replay_registration";
    case Scenario::kWithholdBroadcast: return "withhold_broadcast";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::kNone, Scenario::kForgeSignature, Scenario::kTamperCiphertext,
                     Scenario::kSplitView, Scenario::kReplayRegistration,
                     Scenario::kWithholdBroadcast})
    if (name == scenario_name(s)) return s;
  throw ConfigError("unknown scenario: " + name);
}

std::pair<size_t, size_t> split_view_signature_counts(const std::vector<uint32_t>& view_a,
                                                      const std::vector<uint32_t>& view_b,
                                                      uint32_t t) {
  size_t sigs_a = view_a.size() >= t ? view_a.size() : 0;
  size_t sigs_b = view_b.size() >= t ? view_b.size() : 0;
  return {sigs_a, sigs_b};
}

std::pair<size_t, size_t> split_view_worst_counts(size_t size_a, size_t size_b, uint32_t t,
                                                  size_t n_c) {
  auto count = [&](size_t size) { return size >= t ? size : std::min(size, n_c); };
  return {count(size_a), count(size_b)};
}

std::string transcript_csv(const std::vector<TranscriptLine>& lines) {
  std::ostringstream out;
  out << "round,sender,receiver,tag,bytes,valid_sig\n";
  for (const auto& l : lines)
    out << l.round << ',' << l.sender << ',' << l.receiver << ',' << msg_tag_name(l.tag) << ','
        << l.bytes << ',' << (l.valid_sig ? 1 : 0) << '\n';
  return out.str();
}

Counters RunMetrics::user_total() const {
  Counters total;
  for (const auto& [id, c] : party)
    if (id != kServerId) total += c;
  return total;
}

double RunMetrics::total_wall_ms() const {
  double total = 0;
  for (double ms : round_wall_ms) total += ms;
  return total;
}

SimNet::SimNet(RunMetrics* metrics, const BulletinBoard* pki, Mode mode)
    : metrics_(metrics), pki_(pki), mode_(mode) {}

bool SimNet::signature_valid(const RoundMessage& msg) const {
  // Vacuously valid for unsigned transport messages; a present signature is
  // actually checked against the board.
  if (mode_ == Mode::kSemiHonest || msg.signature.empty()) return true;
  try {
    return ds_verify_message(pki_->lookup(msg.sender), msg);
  } catch (const NotFound&) {
    return false;
  }
}

void SimNet::send(int round, RoundMessage msg) {
  size_t bytes = msg.wire_size();
  metrics_->party[msg.sender].bytes_sent += bytes;
  metrics_->transcript.push_back(
      {round, msg.sender, msg.receiver, msg.tag, bytes, signature_valid(msg)});
  queues_[msg.receiver].push_back(std::move(msg));
}

std::vector<RoundMessage> SimNet::drain(uint32_t receiver) {
  auto it = queues_.find(receiver);
  if (it == queues_.end()) return {};
  std::vector<RoundMessage> out = std::move(it->second);
  queues_.erase(it);
  for (const RoundMessage& msg : out) metrics_->party[receiver].bytes_received += msg.wire_size();
  return out;
}

void SimNet::finalize() {
  for (const auto& [receiver, msgs] : queues_)
    for (const RoundMessage& msg : msgs) metrics_->undelivered_bytes += msg.wire_size();
}

std::vector<uint64_t> SimOutcome::expected_sum(const std::vector<uint32_t>& ids, uint64_t p) const {
  Field f(p);
  std::vector<uint64_t> sum;
  for (uint32_t id : ids) {
    const auto& x = inputs.at(id);
    if (sum.empty()) sum.assign(x.size(), 0);
    for (size_t k = 0; k < x.size(); ++k) sum[k] = f.add(sum[k], x[k]);
  }
  return sum;
}

namespace {

// Split-view scripted server, active mode only: rounds 0 and 1 run through the
// honest server; from round 2 on the adversary serves each half of the
// survivor set its own list and tallies what it can collect.
struct SplitViewState {
  std::vector<uint32_t> list_a, list_b;
  Bytes digest_a, digest_b;
};

}  // namespace

SimOutcome run_aggregation(const SimConfig& cfg) {
  const ProtocolConfig& pc = cfg.protocol;
  pc.validate();
  const Scenario scenario = cfg.adversary.scenario;
  if ((scenario == Scenario::kForgeSignature || scenario == Scenario::kSplitView) &&
      pc.mode != Mode::kActiveAdversary)
    throw ConfigError("scenario requires the active-adversary mode");

  Rng root(cfg.seed);
  SimOutcome outcome;
  Field field(pc.p);
  BulletinBoard pki;
  AhServer server(pc, &pki, root.child(kServer));
  std::vector<std::unique_ptr<AhUser>> users;
  outcome.inputs = sample_inputs(cfg);
  for (uint32_t id = 0; id < pc.n; ++id) {
    users.push_back(std::make_unique<AhUser>(pc, id, outcome.inputs.at(id),
                                             root.child(user_label(id)), &pki));
  }

  server.register_keys(&pki);
  for (auto& user : users) user->register_keys(&pki);
  if (scenario == Scenario::kReplayRegistration) {
    Rng adv_rng = root.child(kAdversary);
    SigKeyPair attacker = ds_gen(adv_rng);
    uint32_t victim = cfg.adversary.forge_target;
    Bytes before = pki.lookup(victim);
    try {
      pki.register_key(victim, attacker.pk);
    } catch (const Rejected&) {
      outcome.scenario.replay_rejected = true;
    }
    outcome.scenario.replay_rejected =
        outcome.scenario.replay_rejected && pki.lookup(victim) == before;
  }
  if (scenario == Scenario::kForgeSignature || scenario == Scenario::kTamperCiphertext)
    server.set_lax_validation(true);

  std::vector<uint32_t> dropped = cfg.dropout.resolve(pc.n, root.child(kDropout));
  auto is_dropped = [&](uint32_t id, int round) {
    return cfg.dropout.round >= 0 && round >= cfg.dropout.round &&
           std::binary_search(dropped.begin(), dropped.end(), id);
  };

  RunMetrics& metrics = outcome.metrics;
  metrics.party[kServerId];
  for (uint32_t id = 0; id < pc.n; ++id) metrics.party[id];
  SimNet net(&metrics, &pki, pc.mode);

  SplitViewState split;
  bool split_active = scenario == Scenario::kSplitView;

  for (int round = 0; round <= 4; ++round) {
    if (pc.mode == Mode::kSemiHonest && round == 3) continue;
    auto start = Clock::now();
    size_t messages_flowed = metrics.transcript.size();

    for (uint32_t id = 0; id < pc.n; ++id) {
      if (is_dropped(id, round)) continue;  // offline: neither receives nor sends
      std::vector<RoundMessage> inbox = net.drain(id);
      if (users[id]->aborted()) continue;
      std::vector<RoundMessage> outs;
      {
        CounterScope scope(&metrics.party[id]);
        outs = users[id]->on_round(round, inbox);
      }
      if (scenario == Scenario::kForgeSignature && round == 0 && id == cfg.adversary.forge_target)
        for (auto& msg : outs) msg.signature[0] ^= 0x01;
      if (scenario == Scenario::kTamperCiphertext && round == 1)
        for (auto& msg : outs) msg.payload.back() ^= 0x01;
      for (auto& msg : outs) net.send(round, std::move(msg));
    }

    std::vector<RoundMessage> sinbox = net.drain(kServerId);
    std::vector<RoundMessage> souts;
    if (!split_active || round < 2) {
      CounterScope scope(&metrics.party[kServerId]);
      souts = server.on_round(round, sinbox);
    } else {
      CounterScope scope(&metrics.party[kServerId]);
      // Colluding server: survivor set = valid masked inputs, then one list
      // per half; endorsements and share sums are tallied per list.
      if (round == 2) {
        std::vector<uint32_t> u3;
        for (const RoundMessage& msg : sinbox)
          if (msg.tag == MsgTag::kMaskedInput &&
              ds_verify_message(pki.lookup(msg.sender), msg))
            u3.push_back(msg.sender);
        std::sort(u3.begin(), u3.end());
        split.list_a = cfg.adversary.view_a;
        split.list_b = cfg.adversary.view_b;
        if (split.list_a.empty() && split.list_b.empty()) {
          size_t half = (u3.size() + 1) / 2;
          split.list_a.assign(u3.begin(), u3.begin() + half);
          split.list_b.assign(u3.begin() + half, u3.end());
        }
        split.digest_a = list_digest(split.list_a);
        split.digest_b = list_digest(split.list_b);
        for (uint32_t id : split.list_a) souts.push_back(server.make_survivor_broadcast(split.list_a, id));
        for (uint32_t id : split.list_b) souts.push_back(server.make_survivor_broadcast(split.list_b, id));
      } else if (round == 3) {
        std::vector<EchoEntry> echo_a, echo_b;
        for (const RoundMessage& msg : sinbox) {
          if (msg.tag != MsgTag::kListSig) continue;
          if (!ds_verify_message(pki.lookup(msg.sender), msg)) continue;
          if (msg.payload == split.digest_a) {
            ++outcome.scenario.sigs_list_a;
            echo_a.push_back({msg.sender, msg.signature});
          } else if (msg.payload == split.digest_b) {
            ++outcome.scenario.sigs_list_b;
            echo_b.push_back({msg.sender, msg.signature});
          }
        }
        auto echo_to = [&](const std::vector<EchoEntry>& entries, uint32_t receiver) {
          RoundMessage msg;
          msg.round = 3;
          msg.sender = kServerId;
          msg.receiver = receiver;
          msg.tag = MsgTag::kSigEcho;
          msg.payload = sig_echo_payload(entries);
          souts.push_back(std::move(msg));
        };
        for (const auto& e : echo_a) echo_to(echo_a, e.id);
        for (const auto& e : echo_b) echo_to(echo_b, e.id);
      } else {
        for (const RoundMessage& msg : sinbox) {
          if (msg.tag != MsgTag::kShareSum) continue;
          if (!ds_verify_message(pki.lookup(msg.sender), msg)) continue;
          if (std::binary_search(split.list_a.begin(), split.list_a.end(), msg.sender))
            ++outcome.scenario.sharesums_list_a;
          else if (std::binary_search(split.list_b.begin(), split.list_b.end(), msg.sender))
            ++outcome.scenario.sharesums_list_b;
        }
        outcome.scenario.reconstruct_a_possible = outcome.scenario.sharesums_list_a >= pc.t;
        outcome.scenario.reconstruct_b_possible = outcome.scenario.sharesums_list_b >= pc.t;
      }
    }
    if (scenario == Scenario::kWithholdBroadcast && round == 2)
      std::erase_if(souts, [&](const RoundMessage& msg) {
        return std::find(cfg.adversary.withhold_from.begin(), cfg.adversary.withhold_from.end(),
                         msg.receiver) != cfg.adversary.withhold_from.end();
      });
    for (auto& msg : souts) net.send(round, std::move(msg));

    double latency = metrics.transcript.size() > messages_flowed ? 2 * cfg.latency_ms : 0;
    metrics.round_wall_ms[static_cast<size_t>(round)] = ms_since(start) + latency;
    if (server.aborted()) break;
  }

  net.finalize();
  outcome.result = server.result();
  if (split_active) {
    outcome.result.success = false;
    outcome.result.abort_round = 4;
    outcome.result.abort_reason = "split-view scripted server";
  }
  for (uint32_t id = 0; id < pc.n; ++id)
    if (users[id]->aborted()) outcome.scenario.user_aborts.emplace(id, users[id]->abort_reason());
  return outcome;
}

}  // namespace ahsecagg
