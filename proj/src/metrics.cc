#include "ahsecagg/metrics.h"

namespace ahsecagg {

namespace {
thread_local Counters* g_current = nullptr;
}

Counters& Counters::operator+=(const Counters& o) {
  modexp_agreement += o.modexp_agreement;
  modexp_setup += o.modexp_setup;
  modexp_other += o.modexp_other;
  group_inversions += o.group_inversions;
  prg_element_expansions += o.prg_element_expansions;
  shamir_sharings += o.shamir_sharings;
  shamir_reconstructions += o.shamir_reconstructions;
  lagrange_terms += o.lagrange_terms;
  unmask_field_ops += o.unmask_field_ops;
  bsgs_steps += o.bsgs_steps;
  bytes_sent += o.bytes_sent;
  bytes_received += o.bytes_received;
  return *this;
}

uint64_t Counters::compute_ops_total() const {
  return modexp_agreement + modexp_setup + modexp_other + group_inversions +
         prg_element_expansions + shamir_sharings + shamir_reconstructions + lagrange_terms +
         unmask_field_ops + bsgs_steps;
}

const std::vector<std::string>& counter_names() {
  static const std::vector<std::string> names = {
      "modexp_agreement", "modexp_setup",
      "modexp_other",     "group_inversions",
      "prg_element_expansions", "shamir_sharings",
      "shamir_reconstructions", "lagrange_terms",
      "unmask_field_ops", "bsgs_steps",
      "bytes_sent",       "bytes_received",
  };
  return names;
}

std::vector<uint64_t> counter_values(const Counters& c) {
  return {c.modexp_agreement, c.modexp_setup,
          c.modexp_other,     c.group_inversions,
          c.prg_element_expansions, c.shamir_sharings,
          c.shamir_reconstructions, c.lagrange_terms,
          c.unmask_field_ops, c.bsgs_steps,
          c.bytes_sent,       c.bytes_received};
}

CounterScope::CounterScope(Counters* sink) : prev_(g_current) { g_current = sink; }

CounterScope::~CounterScope() { g_current = prev_; }

Counters* CounterScope::current() { return g_current; }

void CounterScope::bump(uint64_t Counters::* field, uint64_t amount) {
  if (g_current != nullptr) g_current->*field += amount;
}

}  // namespace ahsecagg
