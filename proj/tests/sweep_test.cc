#include "ahsecagg/sweep.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ahsecagg/errors.h"

namespace ahsecagg {
namespace {

size_t count_commas(const std::string& s) {
  size_t count = 0;
  for (char c : s) count += c == ',';
  return count;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

TEST(Scheme, NamesRoundTrip) {
  for (SchemeKind scheme : {SchemeKind::kAhsecagg, SchemeKind::kSecagg, SchemeKind::kSecaggTskg,
                            SchemeKind::kEffiagg})
    EXPECT_EQ(scheme_from_name(scheme_name(scheme)), scheme);
  EXPECT_THROW(scheme_from_name("paillier"), ConfigError);
}

TEST(Scheme, DispatchRunsEveryScheme) {
  for (SchemeKind scheme : {SchemeKind::kAhsecagg, SchemeKind::kSecagg, SchemeKind::kSecaggTskg,
                            SchemeKind::kEffiagg}) {
    SimConfig cfg;
    cfg.protocol.n = 5;
    cfg.protocol.t = 4;
    cfg.protocol.m = 3;
    cfg.seed = 11;
    if (scheme == SchemeKind::kEffiagg) cfg.input_bound = 256;
    SimOutcome out = run_scheme(scheme, cfg);
    ASSERT_TRUE(out.result.success) << scheme_name(scheme) << ": " << out.result.abort_reason;
    EXPECT_EQ(out.result.output, out.expected_sum(out.result.u3, cfg.protocol.p))
        << scheme_name(scheme);
  }
}

TEST(Csv, HeaderAndRowsAgree) {
  SweepSpec spec;
  spec.schemes = {SchemeKind::kAhsecagg, SchemeKind::kSecagg};
  spec.ns = {5, 8};
  spec.ms = {3};
  spec.dropout_rates = {0.0, 0.25};
  spec.seed = 7;
  std::vector<SweepPoint> points = run_sweep(spec);
  ASSERT_EQ(points.size(), 8u);

  std::string header = sweep_csv_header();
  EXPECT_EQ(header.rfind("schema_version,scheme,mode,n,t,m,", 0), 0u);
  std::set<uint64_t> seeds;
  for (const SweepPoint& p : points) {
    ASSERT_TRUE(p.outcome.result.success);
    std::string row = sweep_csv_row(p);
    EXPECT_EQ(count_commas(row), count_commas(header));
    EXPECT_EQ(row.rfind("1,", 0), 0u);  // schema version
    seeds.insert(p.seed);
  }
  EXPECT_EQ(seeds.size(), points.size());
}

TEST(Csv, DeterministicSweep) {
  SweepSpec spec;
  spec.schemes = {SchemeKind::kSecaggTskg};
  spec.ns = {6};
  spec.ms = {4};
  spec.dropout_rates = {0.3};
  std::vector<SweepPoint> a = run_sweep(spec);
  std::vector<SweepPoint> b = run_sweep(spec);
  ASSERT_EQ(a.size(), 1u);
  std::vector<std::string> names = split_csv(sweep_csv_header());
  std::vector<std::string> ra = split_csv(sweep_csv_row(a[0]));
  std::vector<std::string> rb = split_csv(sweep_csv_row(b[0]));
  ASSERT_EQ(ra.size(), names.size());
  ASSERT_EQ(rb.size(), names.size());
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i].find("wall_ms") != std::string::npos) continue;  // timings are advisory
    EXPECT_EQ(ra[i], rb[i]) << names[i];
  }
}

TEST(Fit, RecoversAnExactPlane) {
  std::vector<std::array<double, 3>> points;
  for (double m : {10.0, 20.0, 40.0})
    for (double n : {5.0, 9.0, 13.0}) points.push_back({m, n, 2.0 + 3.0 * m + 5.0 * n});
  CostFit fit = fit_linear_mn(points);
  EXPECT_NEAR(fit.intercept, 2.0, 1e-6);
  EXPECT_NEAR(fit.per_m, 3.0, 1e-9);
  EXPECT_NEAR(fit.per_n, 5.0, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
}

TEST(Fit, RejectsDegenerateDesigns) {
  EXPECT_THROW(fit_linear_mn({{1, 1, 1}, {1, 1, 2}}), ConfigError);
  EXPECT_THROW(fit_linear_mn({{3, 4, 1}, {3, 4, 2}, {3, 4, 3}, {3, 4, 4}}), DegenerateInput);
}

TEST(Fit, ServerComputeCostIsPlanarInMAndN) {
  SweepSpec spec;
  spec.ns = {6, 9, 12, 15};
  spec.ms = {10, 20, 40};
  std::vector<std::array<double, 3>> points;
  for (const SweepPoint& p : run_sweep(spec)) {
    ASSERT_TRUE(p.outcome.result.success);
    points.push_back({static_cast<double>(p.m), static_cast<double>(p.n),
                     static_cast<double>(p.outcome.metrics.server().compute_ops_total())});
  }
  CostFit fit = fit_linear_mn(points);
  EXPECT_GE(fit.r2, 0.99);
  EXPECT_NEAR(fit.per_m, 2.0, 0.05);  // chain multiply + subtract per component
}

TEST(Fit, ServerComputeCostInvariantToDropouts) {
  std::set<uint64_t> totals;
  for (double rate : {0.0, 0.1, 0.2, 0.3}) {
    SimConfig cfg;
    cfg.protocol.n = 10;
    cfg.protocol.t = 7;
    cfg.protocol.m = 12;
    cfg.seed = 5;
    cfg.dropout.round = rate > 0 ? 2 : -1;
    cfg.dropout.rate = rate;
    SimOutcome out = run_aggregation(cfg);
    ASSERT_TRUE(out.result.success);
    totals.insert(out.metrics.server().compute_ops_total());
  }
  EXPECT_EQ(totals.size(), 1u);
}

}  // namespace
}  // namespace ahsecagg
