#include "ahsecagg/masking.h"

#include "ahsecagg/metrics.h"

namespace ahsecagg {

namespace {

void check_params(const Field& f, const MaskParams& params) {
  if (params.r == 0 || params.r == 1 || params.r >= f.p()) {
    throw ConfigError("mask: chain base r must lie in [2, p)");
  }
}

}  // namespace

std::vector<uint64_t> mask_chain(const Field& f, uint64_t s, const MaskParams& params) {
  check_params(f, params);
  std::vector<uint64_t> chain(params.m);
  uint64_t acc = f.reduce(s);
  for (size_t k = 0; k < params.m; ++k) {
    acc = f.mul(acc, params.r);
    chain[k] = acc;
  }
  return chain;
}

std::vector<uint64_t> mask(const Field& f, const std::vector<uint64_t>& x, uint64_t s,
                           const MaskParams& params) {
  if (x.size() != params.m) throw ConfigError("mask: input length != m");
  std::vector<uint64_t> y = mask_chain(f, s, params);
  for (size_t k = 0; k < params.m; ++k) y[k] = f.add(y[k], f.reduce(x[k]));
  return y;
}

std::vector<uint64_t> unmask_sum(const Field& f, const std::vector<uint64_t>& sum_y,
                                 uint64_t s_sum, const MaskParams& params) {
  if (sum_y.size() != params.m) throw ConfigError("unmask_sum: input length != m");
  CounterScope::bump(&Counters::unmask_field_ops, 2 * params.m);
  std::vector<uint64_t> chain = mask_chain(f, s_sum, params);
  std::vector<uint64_t> out(params.m);
  for (size_t k = 0; k < params.m; ++k) out[k] = f.sub(sum_y[k], chain[k]);
  return out;
}

uint64_t share_sum_for_unmask(const Field& f, const std::map<uint32_t, uint64_t>& my_shares,
                              const std::vector<uint32_t>& u3) {
  uint64_t acc = 0;
  for (uint32_t j : u3) {
    auto it = my_shares.find(j);
    if (it == my_shares.end()) throw MissingShare("share_sum_for_unmask: no share for listed peer");
    acc = f.add(acc, it->second);
  }
  return acc;
}

MaskEquations build_mask_equations_chained(const Field& f, const std::vector<uint64_t>& y,
                                           const MaskParams& params) {
  check_params(f, params);
  size_t m = y.size();
  MaskEquations eq;
  eq.unknowns = m + 1;
  uint64_t rk = 1;
  for (size_t k = 0; k < m; ++k) {
    rk = f.mul(rk, params.r);  // r^(k+1)
    std::vector<uint64_t> row(m + 1, 0);
    row[0] = rk;      // coefficient of s
    row[k + 1] = 1;   // coefficient of x(k+1)
    eq.coeff.push_back(row);
    row.push_back(f.reduce(y[k]));
    eq.augmented.push_back(std::move(row));
  }
  return eq;
}

MaskEquations build_mask_equations_per_component(const Field& f, const std::vector<uint64_t>& y) {
  size_t m = y.size();
  MaskEquations eq;
  eq.unknowns = 2 * m;
  for (size_t k = 0; k < m; ++k) {
    std::vector<uint64_t> row(2 * m, 0);
    row[k] = 1;      // coefficient of s(k+1)
    row[m + k] = 1;  // coefficient of x(k+1)
    eq.coeff.push_back(row);
    row.push_back(f.reduce(y[k]));
    eq.augmented.push_back(std::move(row));
  }
  return eq;
}

size_t rank_zp(const Field& f, std::vector<std::vector<uint64_t>> rows) {
  if (rows.empty()) return 0;
  size_t cols = rows[0].size();
  size_t rank = 0;
  for (size_t col = 0; col < cols && rank < rows.size(); ++col) {
    size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    uint64_t inv = f.inv(rows[rank][col]);
    for (size_t c = col; c < cols; ++c) rows[rank][c] = f.mul(rows[rank][c], inv);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      uint64_t factor = rows[r][col];
      for (size_t c = col; c < cols; ++c) {
        rows[r][c] = f.sub(rows[r][c], f.mul(factor, rows[rank][c]));
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace ahsecagg
