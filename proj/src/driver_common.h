#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "ahsecagg/errors.h"
#include "ahsecagg/metrics.h"
#include "ahsecagg/protocol.h"
#include "ahsecagg/sim.h"

// Scaffolding shared by the baseline scheme drivers.
namespace ahsecagg::driver {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline RoundMessage make_msg(int round, uint32_t sender, uint32_t receiver, MsgTag tag,
                             Bytes payload) {
  RoundMessage msg;
  msg.round = round;
  msg.sender = sender;
  msg.receiver = receiver;
  msg.tag = tag;
  msg.payload = std::move(payload);
  return msg;
}

inline bool sorted_unique(const std::vector<uint32_t>& ids) {
  return std::is_sorted(ids.begin(), ids.end()) &&
         std::adjacent_find(ids.begin(), ids.end()) == ids.end();
}

inline std::vector<uint32_t> ids_except(const std::vector<uint32_t>& ids, uint32_t self) {
  std::vector<uint32_t> out;
  out.reserve(ids.size());
  for (uint32_t id : ids)
    if (id != self) out.push_back(id);
  return out;
}

inline void require_plain_semi_honest(const SimConfig& cfg, const char* scheme) {
  cfg.protocol.validate();
  if (cfg.protocol.mode != Mode::kSemiHonest)
    throw ConfigError(std::string(scheme) + " runs semi-honest only");
  if (cfg.adversary.scenario != Scenario::kNone)
    throw ConfigError("adversary scenarios target the main protocol");
}

// One synchronous round: every online user drains its inbox and acts, then
// the server. Wall time gets the advisory two-trip latency when any message
// flowed.
template <typename UserSeq, typename ServerT, typename OfflineFn>
void run_round(int round, UserSeq& users, ServerT& server, SimNet* net, RunMetrics* metrics,
               OfflineFn offline, double latency_ms) {
  auto start = Clock::now();
  size_t flowed = metrics->transcript.size();
  for (auto& u : users) {
    if (offline(u.id(), round)) continue;  // offline: neither receives nor sends
    std::vector<RoundMessage> inbox = net->drain(u.id());
    if (u.aborted()) continue;
    std::vector<RoundMessage> outs;
    {
      CounterScope scope(&metrics->party[u.id()]);
      outs = u.on_round(round, std::move(inbox));
    }
    for (auto& msg : outs) net->send(round, std::move(msg));
  }
  if (!server.aborted()) {
    std::vector<RoundMessage> inbox = net->drain(kServerId);
    std::vector<RoundMessage> outs;
    {
      CounterScope scope(&metrics->party[kServerId]);
      outs = server.on_round(round, std::move(inbox));
    }
    for (auto& msg : outs) net->send(round, std::move(msg));
  }
  bool traffic = metrics->transcript.size() > flowed;
  metrics->round_wall_ms[round] = ms_since(start) + (traffic ? 2 * latency_ms : 0);
}

}  // namespace ahsecagg::driver
