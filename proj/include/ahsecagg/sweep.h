#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ahsecagg/baselines.h"
#include "ahsecagg/sim.h"

namespace ahsecagg {

enum class SchemeKind { kAhsecagg, kSecagg, kSecaggTskg, kEffiagg };

const char* scheme_name(SchemeKind scheme);
SchemeKind scheme_from_name(const std::string& name);  // ConfigError on unknown

// One aggregation of the named scheme. secagg_tskg runs a preparation first
// and reports its first aggregation, so rows compare per-aggregation cost.
SimOutcome run_scheme(SchemeKind scheme, const SimConfig& cfg);

// Short stable digest of an output vector for logs and cross-run comparison.
std::string output_checksum(const std::vector<uint64_t>& output);

inline constexpr int kCsvSchemaVersion = 1;

struct SweepPoint {
  SchemeKind scheme = SchemeKind::kAhsecagg;
  Mode mode = Mode::kSemiHonest;
  uint32_t n = 0, t = 0;
  size_t m = 0;
  int dropout_round = -1;
  double dropout_rate = 0.0;
  uint64_t seed = 0;
  SimOutcome outcome;
};

struct SweepSpec {
  std::vector<SchemeKind> schemes = {SchemeKind::kAhsecagg};
  std::vector<uint32_t> ns = {10, 20, 40, 70, 100};
  std::vector<size_t> ms = {100, 500, 2000, 10000};
  std::vector<double> dropout_rates = {0.0};
  int dropout_round = 2;
  Mode mode = Mode::kSemiHonest;
  uint64_t seed = 1;
  double latency_ms = 0.0;
  uint64_t input_bound = 0;  // 0: scheme default (2^32; 2^10 for effiagg)
};

// Runs every (scheme, n, m, rate) combination; row seeds derive from the
// spec seed so a sweep is reproducible point by point.
std::vector<SweepPoint> run_sweep(const SweepSpec& spec);

// One row per run. Columns: run identity, then the server's counters, then
// the users' summed counters, then wall times.
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepPoint& point);

// Least squares of y ~ intercept + per_m * m + per_n * n.
struct CostFit {
  double intercept = 0.0;
  double per_m = 0.0;
  double per_n = 0.0;
  double r2 = 1.0;
};

// points are (m, n, y) triples; needs at least three distinct rows.
CostFit fit_linear_mn(const std::vector<std::array<double, 3>>& points);

}  // namespace ahsecagg
