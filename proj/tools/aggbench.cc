// Benchmark and verification driver for the aggregation library.
//
//   aggbench run    one seeded aggregation, checked against the plain sum
//   aggbench sweep  a (scheme, n, m, dropout) grid, one CSV row per run
//   aggbench verify fast property suites (sss, masking, tskg, adversary)
//   aggbench rank   rank of the mask-equation system a curious server sees

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ahsecagg/baselines.h"
#include "ahsecagg/errors.h"
#include "ahsecagg/masking.h"
#include "ahsecagg/sim.h"
#include "ahsecagg/sweep.h"
#include "ahsecagg/tskg.h"

namespace {

using namespace ahsecagg;

struct RunOptions {
  std::string scheme = "ahsecagg";
  std::string mode = "semi_honest";
  std::string scenario = "none";
  uint32_t n = 10;
  uint32_t t = 0;  // 0: floor(2n/3) + 1
  size_t m = 100;
  int dropout_round = -1;
  double dropout_rate = 0.0;
  std::vector<uint32_t> victims;
  uint64_t seed = 1;
  double latency_ms = 0.0;
  uint64_t input_bound = 0;  // 0: scheme default
  std::string transcript_path;
};

SimConfig to_sim_config(const RunOptions& opt) {
  SimConfig cfg;
  cfg.protocol.n = opt.n;
  cfg.protocol.t = opt.t != 0 ? opt.t : (2 * opt.n) / 3 + 1;
  cfg.protocol.m = opt.m;
  cfg.protocol.mode = mode_from_name(opt.mode);
  cfg.seed = opt.seed;
  cfg.latency_ms = opt.latency_ms;
  if (opt.input_bound != 0) cfg.input_bound = opt.input_bound;
  cfg.dropout.round = opt.dropout_round;
  cfg.dropout.rate = opt.dropout_rate;
  cfg.dropout.victims = opt.victims;
  if (opt.dropout_round < 0 && (opt.dropout_rate > 0 || !opt.victims.empty()))
    cfg.dropout.round = 2;
  cfg.adversary.scenario = scenario_from_name(opt.scenario);
  return cfg;
}

int cmd_run(const RunOptions& opt) {
  SimConfig cfg = to_sim_config(opt);
  SchemeKind scheme = scheme_from_name(opt.scheme);
  if (scheme == SchemeKind::kEffiagg && opt.input_bound == 0) cfg.input_bound = uint64_t{1} << 10;

  SimOutcome out = run_scheme(scheme, cfg);
  std::printf("scheme=%s mode=%s n=%u t=%u m=%zu seed=%" PRIu64 "\n", scheme_name(scheme),
              mode_name(cfg.protocol.mode), cfg.protocol.n, cfg.protocol.t, cfg.protocol.m,
              cfg.seed);
  std::printf("survivors=%zu/%u wall_ms=%.3f bytes_sent=%" PRIu64 "\n", out.result.u3.size(),
              cfg.protocol.n, out.metrics.total_wall_ms(),
              out.metrics.server().bytes_sent + out.metrics.user_total().bytes_sent);

  if (!opt.transcript_path.empty()) {
    std::ofstream f(opt.transcript_path);
    if (!f) throw ConfigError("cannot open transcript file: " + opt.transcript_path);
    f << transcript_csv(out.metrics.transcript);
    std::printf("transcript=%s (%zu messages)\n", opt.transcript_path.c_str(),
                out.metrics.transcript.size());
  }

  if (cfg.adversary.scenario == Scenario::kSplitView) {
    std::printf("scenario=split_view sigs=(%zu,%zu) sharesums=(%zu,%zu)\n",
                out.scenario.sigs_list_a, out.scenario.sigs_list_b,
                out.scenario.sharesums_list_a, out.scenario.sharesums_list_b);
    bool defended =
        !(out.scenario.reconstruct_a_possible && out.scenario.reconstruct_b_possible);
    std::printf("%s\n", defended ? "at most one view reached the unmasking threshold"
                                 : "ERROR: both views reached the unmasking threshold");
    return defended ? 0 : 1;
  }
  if (cfg.adversary.scenario != Scenario::kNone) {
    std::printf("scenario=%s user_aborts=%zu\n", scenario_name(cfg.adversary.scenario),
                out.scenario.user_aborts.size());
    bool defended = !out.result.success;
    std::printf("%s\n", defended ? "aborted before any sum was revealed"
                                 : "ERROR: protocol completed under attack");
    return defended ? 0 : 1;
  }

  if (!out.result.success) {
    std::printf("abort round=%d reason=%s\n", out.result.abort_round,
                out.result.abort_reason.c_str());
    return 1;
  }
  bool match = out.result.output == out.expected_sum(out.result.u3, cfg.protocol.p);
  std::printf("output_checksum=%s oracle=%s\n", output_checksum(out.result.output).c_str(),
              match ? "match" : "MISMATCH");
  return match ? 0 : 1;
}

struct SweepOptions {
  std::vector<std::string> schemes = {"ahsecagg"};
  std::vector<uint32_t> ns;
  std::vector<size_t> ms;
  std::vector<double> dropout_rates;
  int dropout_round = 2;
  std::string mode = "semi_honest";
  uint64_t seed = 1;
  double latency_ms = 0.0;
  uint64_t input_bound = 0;
  std::string out_path;
  bool fit = false;
};

int cmd_sweep(const SweepOptions& opt) {
  SweepSpec spec;
  spec.schemes.clear();
  for (const std::string& name : opt.schemes) spec.schemes.push_back(scheme_from_name(name));
  if (!opt.ns.empty()) spec.ns = opt.ns;
  if (!opt.ms.empty()) spec.ms = opt.ms;
  if (!opt.dropout_rates.empty()) spec.dropout_rates = opt.dropout_rates;
  spec.dropout_round = opt.dropout_round;
  spec.mode = mode_from_name(opt.mode);
  spec.seed = opt.seed;
  spec.latency_ms = opt.latency_ms;
  spec.input_bound = opt.input_bound;

  std::vector<SweepPoint> points = run_sweep(spec);

  std::ofstream file;
  std::ostream* sink = &std::cout;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path);
    if (!file) throw ConfigError("cannot open output file: " + opt.out_path);
    sink = &file;
  }
  *sink << sweep_csv_header() << "\n";
  size_t failures = 0;
  for (const SweepPoint& p : points) {
    *sink << sweep_csv_row(p) << "\n";
    failures += !p.outcome.result.success;
  }
  if (!opt.out_path.empty())
    std::fprintf(stderr, "wrote %zu rows to %s\n", points.size(), opt.out_path.c_str());

  if (opt.fit) {
    for (SchemeKind scheme : spec.schemes) {
      std::vector<std::array<double, 3>> samples;
      for (const SweepPoint& p : points)
        if (p.scheme == scheme && p.outcome.result.success)
          samples.push_back({static_cast<double>(p.m), static_cast<double>(p.n),
                            static_cast<double>(p.outcome.metrics.server().compute_ops_total())});
      if (samples.size() < 3) continue;
      CostFit f = fit_linear_mn(samples);
      std::fprintf(stderr, "fit scheme=%s server_ops ~ %.3f + %.4f*m + %.4f*n (R2=%.6f)\n",
                   scheme_name(scheme), f.intercept, f.per_m, f.per_n, f.r2);
    }
  }
  return failures == 0 ? 0 : 1;
}

// ---- verify suites ------------------------------------------------------------

bool report(const std::string& name, bool ok) {
  std::printf("%s %s\n", ok ? "ok  " : "FAIL", name.c_str());
  return ok;
}

bool verify_sss(uint64_t seed) {
  Field f(kDefaultPrime);
  Rng rng(seed);
  bool ok = true;

  bool subsets = true;
  std::vector<ShareIndex> X = sss_init(f, 6, rng);
  uint64_t secret = rng.field_element(f);
  ShareSet set = sss_share(f, secret, 3, X, rng);
  std::vector<Share> all;
  for (auto& [holder, value] : set.shares) all.push_back({holder, value});
  for (size_t a = 0; a < all.size() && subsets; ++a)
    for (size_t b = a + 1; b < all.size() && subsets; ++b)
      for (size_t c = b + 1; c < all.size() && subsets; ++c)
        subsets = sss_reconstruct(f, 3, {all[a], all[b], all[c]}) == secret;
  ok &= report("sss/every-t-subset-agrees", subsets);

  uint64_t s2 = rng.field_element(f);
  ShareSet other = sss_share(f, s2, 3, X, rng);
  ShareSet sum = sss_add(f, set, other);
  std::vector<Share> sum_shares;
  for (auto& [holder, value] : sum.shares) sum_shares.push_back({holder, value});
  ok &= report("sss/additive-homomorphism",
               sss_reconstruct(f, 3, sum_shares) == f.add(secret, s2));

  // At p = 31 and t = 3, sweep every polynomial: the two shares held by any
  // t-1 coalition take every possible value pair once per candidate secret,
  // so observing them narrows nothing down.
  bool hiding = true;
  Field small(31);
  for (uint64_t s = 0; s < 31 && hiding; ++s) {
    std::set<std::pair<uint64_t, uint64_t>> pairs;
    for (uint64_t a1 = 0; a1 < 31; ++a1)
      for (uint64_t a2 = 0; a2 < 31; ++a2) {
        uint64_t y1 = small.add(s, small.add(a1, a2));                       // at x=1
        uint64_t y2 = small.add(s, small.add(small.mul(a1, 2), small.mul(a2, 4)));  // at x=2
        pairs.emplace(y1, y2);
      }
    hiding = pairs.size() == 31 * 31;
  }
  ok &= report("sss/below-threshold-hides", hiding);
  return ok;
}

bool verify_masking(uint64_t seed) {
  Field f(kDefaultPrime);
  Rng rng(seed);
  bool ok = true;

  MaskParams params{rng.uniform_range(2, f.p() - 1), 32};
  std::vector<uint64_t> sum_y(params.m, 0);
  uint64_t s_sum = 0;
  std::vector<uint64_t> plain(params.m, 0);
  for (int u = 0; u < 5; ++u) {
    std::vector<uint64_t> x;
    for (size_t k = 0; k < params.m; ++k) x.push_back(rng.uniform_below(uint64_t{1} << 20));
    uint64_t s = rng.field_element(f);
    std::vector<uint64_t> y = mask(f, x, s, params);
    for (size_t k = 0; k < params.m; ++k) {
      sum_y[k] = f.add(sum_y[k], y[k]);
      plain[k] = f.add(plain[k], x[k]);
    }
    s_sum = f.add(s_sum, s);
  }
  ok &= report("masking/sum-unmasks-exactly", unmask_sum(f, sum_y, s_sum, params) == plain);

  std::vector<uint64_t> y1 = mask(f, plain, s_sum, params);
  MaskEquations chained = build_mask_equations_chained(f, y1, params);
  MaskEquations per_comp = build_mask_equations_per_component(f, y1);
  ok &= report("masking/chained-rank-deficient",
               chained.unknowns == params.m + 1 && rank_zp(f, chained.coeff) == params.m);
  ok &= report("masking/per-component-rank-deficient",
               per_comp.unknowns == 2 * params.m && rank_zp(f, per_comp.coeff) == params.m);
  return ok;
}

bool verify_tskg(uint64_t seed) {
  Field f(kDefaultPrime);
  const Group& g = Group::desk_mask();
  Rng rng(seed);
  bool ok = true;

  bool recon = true;
  for (int trial = 0; trial < 5 && recon; ++trial) {
    uint64_t s = rng.field_element(f);
    Bytes nonce = rng.bytes(32);
    std::vector<ShareIndex> X = sss_init(f, 7, rng);
    ShareSet shares = sss_share(f, s, 4, X, rng);
    std::vector<std::pair<ShareIndex, GroupElement>> subs;
    for (auto& [holder, value] : shares.shares)
      subs.push_back({holder, tskg_sub_sig(g, value, nonce)});
    recon = tskg_reconstruct(g, f, 4, subs) == tskg_temp_key(g, s, nonce);
  }
  ok &= report("tskg/sub-signatures-recover-temp-key", recon);

  SimConfig cfg;
  cfg.protocol.n = 6;
  cfg.protocol.t = 4;
  cfg.protocol.m = 8;
  cfg.seed = seed;
  cfg.dropout.round = 2;
  cfg.dropout.rate = 0.3;
  TskgDeploymentOutcome dep = run_secagg_tskg(cfg, 3);
  bool aggs = dep.preparation.result.success && dep.aggregations.size() == 3;
  std::set<uint64_t> temp_keys;
  size_t participants = dep.preparation.result.u2.size();
  for (const SimOutcome& agg : dep.aggregations) {
    aggs = aggs && agg.result.success &&
           agg.result.output == agg.expected_sum(agg.result.u3, cfg.protocol.p);
    for (auto& [id, key] : agg.user_temp_keys) temp_keys.insert(key);
    for (const TranscriptLine& line : agg.metrics.transcript)
      aggs = aggs && line.tag != MsgTag::kEncShare && line.tag != MsgTag::kShareBundle;
  }
  ok &= report("tskg/aggregations-exact-after-one-preparation", aggs);
  ok &= report("tskg/temp-keys-fresh-per-aggregation",
               temp_keys.size() == dep.aggregations.size() * participants);
  return ok;
}

bool verify_adversary(uint64_t seed) {
  bool ok = true;
  for (Scenario scenario : {Scenario::kForgeSignature, Scenario::kTamperCiphertext}) {
    SimConfig cfg;
    cfg.protocol.n = 8;
    cfg.protocol.t = 6;
    cfg.protocol.m = 4;
    cfg.protocol.mode = Mode::kActiveAdversary;
    cfg.seed = seed;
    cfg.adversary.scenario = scenario;
    SimOutcome out = run_aggregation(cfg);
    bool defended = !out.result.success && !out.scenario.user_aborts.empty();
    for (const TranscriptLine& line : out.metrics.transcript)
      defended = defended && line.tag != MsgTag::kShareSum;
    ok &= report(std::string("adversary/") + scenario_name(scenario) + "-causes-abort", defended);
  }

  bool split = true;
  for (uint32_t n = 6; n <= 12 && split; ++n) {
    uint32_t t = 2 * n / 3 + 1;
    size_t n_c = (n + 2) / 3 + 1;
    for (size_t a = 0; a <= n && split; ++a) {
      auto [sa, sb] = split_view_worst_counts(a, n - a, t, n_c);
      split = !(sa >= t && sb >= t);
    }
  }
  ok &= report("adversary/split-view-never-two-quorums", split);
  return ok;
}

int cmd_verify(const std::string& suite, uint64_t seed) {
  bool ok = true;
  if (suite == "sss" || suite == "all") ok &= verify_sss(seed);
  if (suite == "masking" || suite == "all") ok &= verify_masking(seed);
  if (suite == "tskg" || suite == "all") ok &= verify_tskg(seed);
  if (suite == "adversary" || suite == "all") ok &= verify_adversary(seed);
  std::printf("%s\n", ok ? "all checks passed" : "CHECKS FAILED");
  return ok ? 0 : 1;
}

int cmd_rank(size_t m, const std::string& layout, uint64_t seed) {
  Field f(kDefaultPrime);
  Rng rng(seed);
  MaskParams params{rng.uniform_range(2, f.p() - 1), m};
  std::vector<uint64_t> x;
  for (size_t k = 0; k < m; ++k) x.push_back(rng.field_element(f));
  std::vector<uint64_t> y = mask(f, x, rng.field_element(f), params);

  bool chained = layout == "ours" || layout == "chained";
  MaskEquations eq = chained ? build_mask_equations_chained(f, y, params)
                             : build_mask_equations_per_component(f, y);
  size_t rank = rank_zp(f, eq.coeff);
  std::printf("layout=%s m=%zu unknowns=%zu rank=%zu deficiency=%zu\n",
              chained ? "chained" : "per-component", m, eq.unknowns, rank, eq.unknowns - rank);
  return rank == m ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secure-aggregation benchmark driver"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file (keys like run.users=20)");

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "run one aggregation and check it");
  run_cmd->fallthrough();
  const std::vector<std::string> scheme_names = {"ahsecagg", "secagg", "secagg_tskg", "effiagg"};
  const std::vector<std::string> mode_names = {"semi_honest", "semi-honest", "active",
                                               "active_adversary"};
  run_cmd->add_option("--scheme", run.scheme, "ahsecagg|secagg|secagg_tskg|effiagg")
      ->check(CLI::IsMember(scheme_names))
      ->capture_default_str();
  run_cmd->add_option("-n,--users", run.n, "number of users")->capture_default_str();
  run_cmd->add_option("-t,--threshold", run.t, "threshold (0: floor(2n/3)+1)")
      ->capture_default_str();
  run_cmd->add_option("-m,--length", run.m, "vector length")->capture_default_str();
  run_cmd->add_option("--mode", run.mode, "semi_honest|active")
      ->check(CLI::IsMember(mode_names))
      ->capture_default_str();
  run_cmd->add_option("--dropout-round", run.dropout_round, "round victims stop sending");
  run_cmd->add_option("--dropout-rate", run.dropout_rate, "fraction of users that drop");
  run_cmd->add_option("--victims", run.victims, "explicit victim ids");
  run_cmd->add_option("--seed", run.seed, "run seed")
      ->envname("AGGBENCH_SEED")
      ->capture_default_str();
  run_cmd->add_option("--latency-ms", run.latency_ms, "advisory per-message latency");
  run_cmd->add_option("--input-bound", run.input_bound, "inputs sampled below this bound");
  run_cmd->add_option("--scenario", run.scenario,
                      "none|forge_signature|tamper_ciphertext|split_view|replay_registration|"
                      "withhold_broadcast")
      ->check(CLI::IsMember({"none", "forge_signature", "tamper_ciphertext", "split_view",
                             "replay_registration", "withhold_broadcast"}));
  run_cmd->add_option("--transcript", run.transcript_path, "write the transcript CSV here");

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid of runs, CSV per run");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("--schemes", sweep.schemes, "schemes to sweep")
      ->check(CLI::IsMember(scheme_names))
      ->capture_default_str();
  sweep_cmd->add_option("--n-list", sweep.ns, "user counts (default 10 20 40 70 100)");
  sweep_cmd->add_option("--m-list", sweep.ms, "vector lengths (default 100 500 2000 10000)");
  sweep_cmd->add_option("--dropout-rates", sweep.dropout_rates, "dropout fractions (default 0)");
  sweep_cmd->add_option("--dropout-round", sweep.dropout_round, "round victims stop sending")
      ->capture_default_str();
  sweep_cmd->add_option("--mode", sweep.mode, "semi_honest|active")
      ->check(CLI::IsMember(mode_names))
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "sweep base seed")
      ->envname("AGGBENCH_SEED")
      ->capture_default_str();
  sweep_cmd->add_option("--latency-ms", sweep.latency_ms, "advisory per-message latency");
  sweep_cmd->add_option("--input-bound", sweep.input_bound, "0: scheme default");
  sweep_cmd->add_option("-o,--out", sweep.out_path, "CSV file (default stdout)");
  sweep_cmd->add_flag("--fit", sweep.fit, "fit server ops ~ a + b*m + c*n, report on stderr");

  std::string suite = "all";
  uint64_t verify_seed = 1;
  CLI::App* verify_cmd = app.add_subcommand("verify", "fast property checks");
  verify_cmd->fallthrough();
  verify_cmd->add_option("--suite", suite, "sss|masking|tskg|adversary|all")
      ->check(CLI::IsMember({"sss", "masking", "tskg", "adversary", "all"}))
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed, "suite seed")
      ->envname("AGGBENCH_SEED")
      ->capture_default_str();

  size_t rank_m = 8;
  std::string layout = "ours";
  uint64_t rank_seed = 1;
  CLI::App* rank_cmd = app.add_subcommand("rank", "mask-equation rank for one masked vector");
  rank_cmd->fallthrough();
  rank_cmd->add_option("-m,--length", rank_m, "vector length")->capture_default_str();
  rank_cmd->add_option("--layout", layout, "ours|chained|others|per-component")
      ->check(CLI::IsMember({"ours", "chained", "others", "per-component"}))
      ->capture_default_str();
  rank_cmd->add_option("--seed", rank_seed, "instance seed")
      ->envname("AGGBENCH_SEED")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (verify_cmd->parsed()) return cmd_verify(suite, verify_seed);
    if (rank_cmd->parsed()) return cmd_rank(rank_m, layout, rank_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
