#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ahsecagg {

// Exact operation counters. Increments happen at the instrumented call sites
// (dh_gen/dh_agree, group exponentiation, PRG expansion, Shamir share and
// reconstruct, BSGS search, message delivery) and are routed to the party
// whose CounterScope is active on the current thread.
struct Counters {
  uint64_t modexp_agreement = 0;       // key agreements (dh_agree)
  uint64_t modexp_setup = 0;           // key generation (dh_gen); outside the
                                       // per-aggregation agreement budget
  uint64_t modexp_other = 0;           // all remaining group exponentiations
  uint64_t group_inversions = 0;
  uint64_t prg_element_expansions = 0; // one per expanded vector element
  uint64_t shamir_sharings = 0;
  uint64_t shamir_reconstructions = 0;
  uint64_t lagrange_terms = 0;         // subset size per reconstruction
  uint64_t unmask_field_ops = 0;       // chain + subtraction of a final unmask
  uint64_t bsgs_steps = 0;
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;

  Counters& operator+=(const Counters& o);
  bool operator==(const Counters& o) const = default;

  uint64_t modexp_total() const { return modexp_agreement + modexp_setup + modexp_other; }
  // Compute-only total used by the scaling analysis: every counted operation
  // except traffic, so the value is invariant to who happened to drop out.
  uint64_t compute_ops_total() const;
};

// Stable column order for CSV output and reports.
const std::vector<std::string>& counter_names();
std::vector<uint64_t> counter_values(const Counters& c);

// RAII redirection of counter increments to a sink, typically one scope per
// simulated party step. Scopes nest; the innermost sink wins. With no active
// scope increments are dropped.
class CounterScope {
 public:
  explicit CounterScope(Counters* sink);
  ~CounterScope();
  CounterScope(const CounterScope&) = delete;
  CounterScope& operator=(const CounterScope&) = delete;

  static Counters* current();
  static void bump(uint64_t Counters::* field, uint64_t amount = 1);

 private:
  Counters* prev_;
};

}  // namespace ahsecagg
