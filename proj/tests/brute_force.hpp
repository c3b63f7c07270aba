#pragma once

// Test-only brute force over every datum feature set and every ordered pair
// of class-y hypotheses, with plain bitmasks and std::bitset popcounts. Kept
// separate from the library's enumerator so the two can check each other.

#include <bitset>
#include <cstdint>
#include <vector>

#include "ifl/params.hpp"
#include "ifl/rational.hpp"

namespace ifl::testing {

inline std::vector<std::uint32_t> all_subsets(int n, int k) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (static_cast<int>(std::bitset<32>(m).count()) == k) out.push_back(m);
  }
  return out;
}

struct BruteForce {
  Rational acc;
  Rational q1;
  std::vector<Rational> q2;  // index k-1
  Rational q3;
};

/// Pools must be at most 12 features.
inline BruteForce brute_force(const FrameworkParams& p) {
  const Capacities caps = derived_capacities(p);
  const Rational p_d = decimal_rational(p.p_d);
  const auto doms = all_subsets(static_cast<int>(p.t_d), static_cast<int>(caps.c_d));
  const auto rares = all_subsets(static_cast<int>(p.t_r), static_cast<int>(caps.c_r));

  BruteForce out;
  out.acc = 0;
  out.q1 = 0;
  out.q3 = 0;
  out.q2.assign(static_cast<std::size_t>(p.c), Rational(0));
  for (int kind = 0; kind < 2; ++kind) {
    const bool dominant = kind == 0;
    const Rational weight = dominant ? p_d : Rational(1) - p_d;
    const auto data = dominant ? all_subsets(static_cast<int>(p.t_d), static_cast<int>(p.n_d))
                               : all_subsets(static_cast<int>(p.t_r), static_cast<int>(p.n_r));
    long correct_halves = 0;
    long singles = 0;
    long a_count = 0;
    long c_count = 0;
    std::vector<long> b_count(static_cast<std::size_t>(p.c) + 1, 0);
    long pairs = 0;
    for (const auto x : data) {
      for (const auto fd : doms) {
        for (const auto fr : rares) {
          const bool f_hit = ((dominant ? fd : fr) & x) != 0;
          correct_halves += f_hit ? 2 : 1;
          ++singles;
          for (const auto gd : doms) {
            for (const auto gr : rares) {
              const bool g_hit = ((dominant ? gd : gr) & x) != 0;
              ++pairs;
              if (f_hit && g_hit) {
                ++a_count;
                continue;
              }
              const auto k = std::bitset<32>(fd & gd).count() + std::bitset<32>(fr & gr).count();
              if (!f_hit && !g_hit && k > 0) {
                ++b_count[k];
              } else {
                ++c_count;
              }
            }
          }
        }
      }
    }
    out.acc += weight * Rational(correct_halves, 2 * singles);
    out.q1 += weight * Rational(a_count, pairs);
    out.q3 += weight * Rational(c_count, pairs);
    for (std::size_t k = 1; k < b_count.size(); ++k) {
      out.q2[k - 1] += weight * Rational(b_count[k], pairs);
    }
  }
  out.acc.canonicalize();
  out.q1.canonicalize();
  out.q3.canonicalize();
  for (auto& v : out.q2) v.canonicalize();
  return out;
}

}  // namespace ifl::testing
