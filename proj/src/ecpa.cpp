// Copyright 2026 The pditqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pditqkd/ecpa.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pditqkd/qcore.hpp"

namespace pditqkd {

namespace {

PauliRates normalized(PauliRates r) {
  const double s = r.i + r.x + r.y + r.z;
  if (s <= 0.0) throw std::domain_error("two-way step: no surviving probability mass");
  return {r.i / s, r.x / s, r.y / s, r.z / s};
}

double one_way_rate(const PauliRates& r) {
  return 1.0 - binary_entropy(std::clamp(r.phase(), 0.0, 1.0)) - binary_entropy(std::clamp(r.bit(), 0.0, 1.0));
}

std::vector<std::uint64_t> pack(std::span<const std::uint8_t> bits) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
  for (std::size_t k = 0; k < bits.size(); ++k)
    if (bits[k]) words[k / 64] |= std::uint64_t{1} << (k % 64);
  return words;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t k = 0; k < bits.size(); k += 4) {
    unsigned v = 0;
    for (std::size_t j = 0; j < 4; ++j) v = (v << 1) | ((k + j < bits.size() && bits[k + j]) ? 1u : 0u);
    out.push_back(digits[v]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-way steps. The rate updates follow Gottesman and Lo, "Proof of security
// of quantum key distribution with two-way classical communications", IEEE
// Trans. Inf. Theory 49, 457 (2003).

PauliRates b_step_rates(const PauliRates& r) {
  return normalized({r.i * r.i + r.z * r.z, r.x * r.x + r.y * r.y, 2.0 * r.x * r.y, 2.0 * r.i * r.z});
}

double b_step_keep_probability(const PauliRates& r) {
  const double ok = r.i + r.z;
  const double flip = r.x + r.y;
  return ok * ok + flip * flip;
}

PauliRates p_step_rates(const PauliRates& r) {
  // (bit flag, phase flag, weight) for I, X, Y, Z.
  const std::array<std::array<double, 3>, 4> kinds{{{0, 0, r.i}, {1, 0, r.x}, {1, 1, r.y}, {0, 1, r.z}}};
  PauliRates out{0, 0, 0, 0};
  for (const auto& a : kinds)
    for (const auto& b : kinds)
      for (const auto& c : kinds) {
        const int bit = (static_cast<int>(a[0]) ^ static_cast<int>(b[0]) ^ static_cast<int>(c[0]));
        const int phase = (a[1] + b[1] + c[1]) >= 2.0 ? 1 : 0;
        const double w = a[2] * b[2] * c[2];
        if (bit && phase) out.y += w;
        else if (bit) out.x += w;
        else if (phase) out.z += w;
        else out.i += w;
      }
  return normalized(out);
}

TwoWayPlan plan_two_way(double e_x, double e_z, std::size_t round_cap, std::size_t grid_points) {
  if (grid_points < 2) grid_points = 2;
  const double lo = std::max(0.0, e_x + e_z - 1.0);
  const double hi = std::min(e_x, e_z);
  std::vector<PauliRates> grid;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double y = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    grid.push_back({std::max(0.0, 1.0 - e_x - e_z + y), e_z - y, y, e_x - y});
  }
  auto worst = [&]() {
    std::size_t arg = 0;
    double rate = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double v = one_way_rate(grid[g]);
      if (v < rate) {
        rate = v;
        arg = g;
      }
    }
    return std::make_pair(arg, rate);
  };

  TwoWayPlan plan;
  auto [arg, rate] = worst();
  while (rate <= 0.0 && plan.steps.size() < round_cap) {
    const bool b_step = grid[arg].bit() >= grid[arg].phase();
    plan.steps.push_back(b_step ? 'B' : 'P');
    for (auto& r : grid) r = b_step ? b_step_rates(r) : p_step_rates(r);
    std::tie(arg, rate) = worst();
  }
  plan.feasible = rate > 0.0;
  plan.rate = rate;
  plan.e_x = grid[arg].phase();
  plan.e_z = grid[arg].bit();
  return plan;
}

void apply_b_step(BitString& alice, BitString& bob, BitString* parities_alice, BitString* parities_bob) {
  BitString na, nb;
  for (std::size_t k = 0; k + 1 < alice.size(); k += 2) {
    const std::uint8_t pa = alice[k] ^ alice[k + 1];
    const std::uint8_t pb = bob[k] ^ bob[k + 1];
    if (parities_alice) parities_alice->push_back(pa);
    if (parities_bob) parities_bob->push_back(pb);
    if (pa == pb) {
      na.push_back(alice[k]);
      nb.push_back(bob[k]);
    }
  }
  alice = std::move(na);
  bob = std::move(nb);
}

void apply_p_step(BitString& alice, BitString& bob) {
  BitString na, nb;
  for (std::size_t k = 0; k + 2 < alice.size(); k += 3) {
    na.push_back(alice[k] ^ alice[k + 1] ^ alice[k + 2]);
    nb.push_back(bob[k] ^ bob[k + 1] ^ bob[k + 2]);
  }
  alice = std::move(na);
  bob = std::move(nb);
}

// ---------------------------------------------------------------------------
// Toeplitz hashing

ToeplitzHash::ToeplitzHash(std::uint64_t seed, std::size_t in_len, std::size_t out_len)
    : in_len_(in_len), out_len_(out_len) {
  RngStream rng(seed);
  const std::size_t bits = in_len + out_len;
  diagonal_.resize(bits / 64 + 3);
  for (auto& w : diagonal_) w = rng.next_u64();
}

BitString ToeplitzHash::apply(std::span<const std::uint8_t> x) const {
  if (x.size() != in_len_) throw std::invalid_argument("ToeplitzHash: input length mismatch");
  // Row i is the window diagonal_[i, i + in_len) against x reversed.
  BitString reversed(x.rbegin(), x.rend());
  const auto y = pack(reversed);
  BitString out(out_len_, 0);
  for (std::size_t i = 0; i < out_len_; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < y.size(); ++w) {
      const std::size_t base = i + 64 * w;
      const std::size_t word = base / 64;
      const unsigned r = base % 64;
      std::uint64_t window = diagonal_[word] >> r;
      if (r) window |= diagonal_[word + 1] << (64 - r);
      acc ^= window & y[w];
    }
    out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LDPC syndrome coding

SparseParityCheck SparseParityCheck::random(std::size_t rows, std::size_t cols, std::size_t column_weight,
                                            std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("SparseParityCheck: empty matrix");
  const std::size_t w = std::min(column_weight, rows);
  RngStream rng(seed);
  // Near-regular row degrees: deal row sockets round-robin, then shuffle.
  std::vector<std::uint32_t> sockets(cols * w);
  for (std::size_t k = 0; k < sockets.size(); ++k) sockets[k] = static_cast<std::uint32_t>(k % rows);
  for (std::size_t k = sockets.size(); k > 1; --k) std::swap(sockets[k - 1], sockets[rng.below(k)]);

  SparseParityCheck h;
  h.check_vars_.assign(rows, {});
  h.var_checks_.assign(cols, {});
  for (std::size_t c = 0; c < cols; ++c) {
    auto& checks = h.var_checks_[c];
    for (std::size_t s = 0; s < w; ++s) {
      const std::size_t pos = c * w + s;
      auto duplicate = [&] { return std::find(checks.begin(), checks.end(), sockets[pos]) != checks.end(); };
      for (int attempt = 0; attempt < 20 && duplicate() && pos + 1 < sockets.size(); ++attempt)
        std::swap(sockets[pos], sockets[pos + 1 + rng.below(sockets.size() - pos - 1)]);
      if (!duplicate()) checks.push_back(sockets[pos]);
    }
    std::sort(checks.begin(), checks.end());
    for (auto r : checks) h.check_vars_[r].push_back(static_cast<std::uint32_t>(c));
  }
  return h;
}

BitString SparseParityCheck::syndrome(std::span<const std::uint8_t> x) const {
  if (x.size() != cols()) throw std::invalid_argument("SparseParityCheck: input length mismatch");
  BitString s(rows(), 0);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::uint8_t acc = 0;
    for (auto v : check_vars_[r]) acc ^= x[v];
    s[r] = acc;
  }
  return s;
}

std::optional<BitString> SparseParityCheck::decode(std::span<const std::uint8_t> s, double p,
                                                   std::size_t max_iterations) const {
  if (s.size() != rows()) throw std::invalid_argument("SparseParityCheck: syndrome length mismatch");
  BitString e(cols(), 0);
  if (std::all_of(s.begin(), s.end(), [](std::uint8_t b) { return b == 0; })) return e;
  p = std::clamp(p, 1e-9, 0.5 - 1e-9);
  const double prior = std::log((1.0 - p) / p);
  constexpr double kClamp = 1.0 - 1e-15;

  // Edges grouped by check; var_edges lists the edge ids of each variable.
  std::vector<std::size_t> offset(rows() + 1, 0);
  for (std::size_t r = 0; r < rows(); ++r) offset[r + 1] = offset[r] + check_vars_[r].size();
  const std::size_t edges = offset.back();
  std::vector<std::vector<std::size_t>> var_edges(cols());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t k = 0; k < check_vars_[r].size(); ++k) var_edges[check_vars_[r][k]].push_back(offset[r] + k);

  std::vector<double> to_check(edges, prior), to_var(edges, 0.0), prefix, t;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t r = 0; r < rows(); ++r) {
      const std::size_t deg = check_vars_[r].size();
      if (deg == 0) continue;
      t.resize(deg);
      prefix.assign(deg + 1, 1.0);
      for (std::size_t k = 0; k < deg; ++k) {
        t[k] = std::tanh(to_check[offset[r] + k] / 2.0);
        prefix[k + 1] = prefix[k] * t[k];
      }
      const double sign = s[r] ? -1.0 : 1.0;
      double suffix = 1.0;
      for (std::size_t k = deg; k-- > 0;) {
        const double prod = std::clamp(prefix[k] * suffix, -kClamp, kClamp);
        to_var[offset[r] + k] = sign * 2.0 * std::atanh(prod);
        suffix *= t[k];
      }
    }
    for (std::size_t v = 0; v < cols(); ++v) {
      double total = prior;
      for (auto ed : var_edges[v]) total += to_var[ed];
      e[v] = total < 0.0 ? 1 : 0;
      for (auto ed : var_edges[v]) to_check[ed] = std::clamp(total - to_var[ed], -60.0, 60.0);
    }
    if (syndrome(e) == BitString(s.begin(), s.end())) return e;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

EcPaResult ec_pa(const BitString& alice, const BitString& bob, double e_x, double e_z, RngStream& rng,
                 const EcPaParams& params, Transcript* transcript) {
  if (alice.size() != bob.size()) throw std::invalid_argument("ec_pa: key strings differ in length");
  if (!(e_x >= 0.0 && e_x < 0.5) || !(e_z >= 0.0 && e_z < 0.5))
    throw std::invalid_argument("ec_pa: error estimates must lie in [0, 1/2)");

  EcPaResult res;
  auto abort_with = [&](const std::string& reason) {
    res.aborted = true;
    res.abort_reason = reason;
    res.alice.clear();
    res.bob.clear();
    note(transcript, "ec_pa", "abort", {{"reason", reason}});
    return res;
  };

  const TwoWayPlan plan = plan_two_way(e_x, e_z, params.round_cap);
  note(transcript, "ec_pa", "two_way_plan",
       {{"steps", plan.steps}, {"feasible", plan.feasible}, {"e_x", plan.e_x}, {"e_z", plan.e_z}});
  if (!plan.feasible) return abort_with("round_cap");

  BitString a = alice, b = bob;
  for (char step : plan.steps) {
    if (step == 'B') {
      BitString pa, pb;
      apply_b_step(a, b, &pa, &pb);
      note(transcript, "ec_pa", "b_step", {{"parities_alice", to_hex(pa)}, {"parities_bob", to_hex(pb)}});
    } else {
      apply_p_step(a, b);
      note(transcript, "ec_pa", "p_step", {{"length", a.size()}});
    }
    res.two_way_steps.push_back(step);
  }
  const std::size_t len = a.size();
  if (len == 0) return abort_with("too_short");
  res.e_x_final = plan.e_x;
  res.e_z_final = plan.e_z;

  // Blind reconciliation: each failed attempt is retried with a fresh
  // parity-check matrix sized for a higher design error rate.
  double design = plan.e_z > 0.0 ? std::min(plan.e_z + params.design_margin, 0.5) : 0.0;
  std::string failure;
  bool reconciled = false;
  for (std::size_t attempt = 0; attempt < params.reconcile_attempts && !reconciled; ++attempt) {
    if (attempt > 0) design = std::min(std::max(2.0 * design, design + 2.0 * params.design_margin), 0.5);
    BitString corrected = b;
    const auto r = static_cast<std::size_t>(
        std::ceil(params.syndrome_overhead * static_cast<double>(len) * binary_entropy(design)));
    if (r >= len) {
      failure = attempt == 0 ? "too_short" : failure;
      break;
    }
    if (r > 0) {
      const std::uint64_t seed = rng.next_u64();
      const auto h = SparseParityCheck::random(r, len, params.column_weight, seed);
      const BitString sa = h.syndrome(a);
      const BitString sb = h.syndrome(b);
      BitString diff(r);
      for (std::size_t k = 0; k < r; ++k) diff[k] = sa[k] ^ sb[k];
      res.syndrome_bits += r;
      note(transcript, "ec_pa", "syndrome",
           {{"attempt", attempt}, {"design_error", design}, {"matrix_seed", seed}, {"rows", r}, {"syndrome", to_hex(sa)}});
      const auto e = h.decode(diff, design, params.bp_iterations);
      if (!e) {
        failure = "decode";
        note(transcript, "ec_pa", "decode_failed", {{"attempt", attempt}});
        continue;
      }
      for (std::size_t k = 0; k < len; ++k) corrected[k] ^= (*e)[k];
    }
    const std::uint64_t tag_seed = rng.next_u64();
    const ToeplitzHash tag(tag_seed, len, params.hash_bits);
    const BitString ta = tag.apply(a);
    const BitString tb = tag.apply(corrected);
    note(transcript, "ec_pa", "verify_hash",
         {{"attempt", attempt}, {"seed", tag_seed}, {"tag_alice", to_hex(ta)}, {"tag_bob", to_hex(tb)}});
    if (ta != tb) {
      failure = "hash_mismatch";
      continue;
    }
    b = std::move(corrected);
    reconciled = true;
  }
  if (!reconciled) return abort_with(failure.empty() ? "decode" : failure);
  res.reconciled_len = len;

  const double raw = std::floor(static_cast<double>(len) * plan.rate) - static_cast<double>(params.safety_bits);
  if (raw <= 0.0) return abort_with("length");
  const auto out_len = static_cast<std::size_t>(raw);
  const std::uint64_t pa_seed = rng.next_u64();
  const ToeplitzHash pa(pa_seed, len, out_len);
  res.alice = pa.apply(a);
  res.bob = pa.apply(b);
  note(transcript, "ec_pa", "privacy_amplification", {{"seed", pa_seed}, {"input_len", len}, {"output_len", out_len}});
  return res;
}

}  // namespace pditqkd
