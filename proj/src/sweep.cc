#include "ahsecagg/sweep.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ahsecagg/crypto.h"
#include "ahsecagg/encoding.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/metrics.h"

namespace ahsecagg {

const char* scheme_name(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::kAhsecagg:
      return "ahsecagg";
    case SchemeKind::kSecagg:
      return "secagg";
    case SchemeKind::kSecaggTskg:
      return "secagg_tskg";
    case SchemeKind::kEffiagg:
      return "effiagg";
  }
  return "unknown";
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "ahsecagg") return SchemeKind::kAhsecagg;
  if (name == "secagg") return SchemeKind::kSecagg;
  if (name == "secagg_tskg") return SchemeKind::kSecaggTskg;
  if (name == "effiagg") return SchemeKind::kEffiagg;
  throw ConfigError("unknown scheme: " + name);
}

SimOutcome run_scheme(SchemeKind scheme, const SimConfig& cfg) {
  switch (scheme) {
    case SchemeKind::kAhsecagg:
      return run_aggregation(cfg);
    case SchemeKind::kSecagg:
      return run_secagg(cfg);
    case SchemeKind::kSecaggTskg: {
      TskgDeploymentOutcome dep = run_secagg_tskg(cfg, 1);
      if (!dep.preparation.result.success) return dep.preparation;
      return dep.aggregations.front();
    }
    case SchemeKind::kEffiagg:
      return run_effiagg(cfg);
  }
  throw ConfigError("unknown scheme");
}

std::string output_checksum(const std::vector<uint64_t>& output) {
  std::array<uint8_t, 32> digest = sha256(encode_scalar_vector(output));
  char buf[17];
  for (int i = 0; i < 8; ++i) std::snprintf(buf + 2 * i, 3, "%02x", digest[i]);
  return std::string(buf, 16);
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec) {
  std::vector<SweepPoint> points;
  uint64_t row = 0;
  for (SchemeKind scheme : spec.schemes) {
    for (uint32_t n : spec.ns) {
      for (size_t m : spec.ms) {
        for (double rate : spec.dropout_rates) {
          SweepPoint point;
          point.scheme = scheme;
          point.mode = spec.mode;
          point.n = n;
          point.t = (2 * n + 2) / 3;
          point.m = m;
          point.dropout_rate = rate;
          point.dropout_round = rate > 0 ? spec.dropout_round : -1;
          point.seed = spec.seed + row++;

          SimConfig cfg;
          cfg.protocol.n = n;
          cfg.protocol.t = point.t;
          cfg.protocol.m = m;
          cfg.protocol.mode = spec.mode;
          cfg.seed = point.seed;
          cfg.latency_ms = spec.latency_ms;
          if (spec.input_bound != 0)
            cfg.input_bound = spec.input_bound;
          else if (scheme == SchemeKind::kEffiagg)
            cfg.input_bound = uint64_t{1} << 10;
          cfg.dropout.round = point.dropout_round;
          cfg.dropout.rate = rate;

          point.outcome = run_scheme(scheme, cfg);
          points.push_back(std::move(point));
        }
      }
    }
  }
  return points;
}

std::string sweep_csv_header() {
  std::ostringstream out;
  out << "schema_version,scheme,mode,n,t,m,dropout_round,dropout_rate,seed,success,abort_round,"
         "survivors,output_checksum";
  for (const std::string& name : counter_names()) out << ",server_" << name;
  for (const std::string& name : counter_names()) out << ",user_total_" << name;
  for (int r = 0; r < 5; ++r) out << ",round_wall_ms_" << r;
  out << ",total_wall_ms,undelivered_bytes";
  return out.str();
}

std::string sweep_csv_row(const SweepPoint& point) {
  const SimOutcome& o = point.outcome;
  std::ostringstream row;
  row << kCsvSchemaVersion << ',' << scheme_name(point.scheme) << ',' << mode_name(point.mode)
      << ',' << point.n << ',' << point.t << ',' << point.m << ','
      << point.dropout_round << ',' << point.dropout_rate << ',' << point.seed << ','
      << (o.result.success ? 1 : 0) << ',' << o.result.abort_round << ',' << o.result.u3.size()
      << ',' << output_checksum(o.result.output);
  for (uint64_t v : counter_values(o.metrics.server())) row << ',' << v;
  for (uint64_t v : counter_values(o.metrics.user_total())) row << ',' << v;
  for (double ms : o.metrics.round_wall_ms) row << ',' << ms;
  row << ',' << o.metrics.total_wall_ms() << ',' << o.metrics.undelivered_bytes;
  return row.str();
}

CostFit fit_linear_mn(const std::vector<std::array<double, 3>>& points) {
  if (points.size() < 3) throw ConfigError("a plane fit needs at least three points");
  // Normal equations for y ~ (1, m, n).
  double a[3][3] = {};
  double b[3] = {};
  for (const auto& [m, n, y] : points) {
    double v[3] = {1.0, m, n};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += v[i] * v[j];
      b[i] += v[i] * y;
    }
  }
  // Gaussian elimination with partial pivoting.
  int order[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(a[order[r]][col]) > std::fabs(a[order[pivot]][col])) pivot = r;
    std::swap(order[col], order[pivot]);
    double diag = a[order[col]][col];
    if (std::fabs(diag) < 1e-12) throw DegenerateInput("singular design matrix");
    for (int r = col + 1; r < 3; ++r) {
      double factor = a[order[r]][col] / diag;
      for (int c = col; c < 3; ++c) a[order[r]][c] -= factor * a[order[col]][c];
      b[order[r]] -= factor * b[order[col]];
    }
  }
  double coef[3];
  for (int col = 2; col >= 0; --col) {
    double acc = b[order[col]];
    for (int c = col + 1; c < 3; ++c) acc -= a[order[col]][c] * coef[c];
    coef[col] = acc / a[order[col]][col];
  }

  CostFit fit;
  fit.intercept = coef[0];
  fit.per_m = coef[1];
  fit.per_n = coef[2];

  double mean = 0;
  for (const auto& p : points) mean += p[2];
  mean /= static_cast<double>(points.size());
  double ss_res = 0, ss_tot = 0;
  for (const auto& [m, n, y] : points) {
    double pred = fit.intercept + fit.per_m * m + fit.per_n * n;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean) * (y - mean);
  }
  fit.r2 = ss_tot < 1e-12 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace ahsecagg
