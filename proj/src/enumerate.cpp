#include "ifl/enumerate.hpp"

#include <array>
#include <bit>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {
namespace {

constexpr std::int64_t kMaxPool = 256;

using Mask = std::array<std::uint64_t, 4>;

bool intersects(const Mask& a, const Mask& b) {
  return (a[0] & b[0]) | (a[1] & b[1]) | (a[2] & b[2]) | (a[3] & b[3]);
}

std::int64_t common(const Mask& a, const Mask& b) {
  return std::popcount(a[0] & b[0]) + std::popcount(a[1] & b[1]) +
         std::popcount(a[2] & b[2]) + std::popcount(a[3] & b[3]);
}

Mask prefix_mask(std::int64_t n) {
  Mask m{};
  for (std::int64_t i = 0; i < n; ++i) m[i >> 6] |= std::uint64_t{1} << (i & 63);
  return m;
}

/// All k-subsets of [0, n) in lexicographic order.
std::vector<Mask> subsets(std::int64_t n, std::int64_t k) {
  std::vector<Mask> out;
  if (k < 0 || k > n) return out;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    Mask m{};
    for (const auto i : idx) m[i >> 6] |= std::uint64_t{1} << (i & 63);
    out.push_back(m);
    std::int64_t pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (std::int64_t j = pos + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

void check_pools(const FrameworkParams& params) {
  if (params.t_d > kMaxPool || params.t_r > kMaxPool) {
    throw ResourceError("enumeration supports pools of at most 256 features");
  }
}

void guard(const BigInt& size, const char* what) {
  if (size > BigInt(static_cast<unsigned long>(kEnumerationLimit))) {
    throw ResourceError(std::string(what) + " enumeration size " + size.get_str() +
                        " exceeds limit " + std::to_string(kEnumerationLimit));
  }
}

struct Hyp {
  Mask dom;
  Mask rare;
};

std::vector<Hyp> class_hypotheses(const FrameworkParams& params, const Capacities& caps) {
  const auto doms = subsets(params.t_d, caps.c_d);
  const auto rares = subsets(params.t_r, caps.c_r);
  std::vector<Hyp> out;
  out.reserve(doms.size() * rares.size());
  for (const auto& d : doms) {
    for (const auto& r : rares) out.push_back({d, r});
  }
  return out;
}

/// Case counts over ordered hypothesis pairs for the canonical datum
/// {0, .., n-1} of one kind.
struct PairCounts {
  std::uint64_t a = 0;
  std::vector<std::uint64_t> b;  // index k
  std::uint64_t c = 0;
};

PairCounts count_pairs(const std::vector<Hyp>& hyps, bool dominant, std::int64_t n,
                       std::int64_t capacity) {
  PairCounts counts;
  counts.b.assign(static_cast<std::size_t>(capacity + 1), 0);
  const Mask x = prefix_mask(n);
  std::vector<char> hit(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hit[i] = intersects(dominant ? hyps[i].dom : hyps[i].rare, x);
  }
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    for (std::size_t j = 0; j < hyps.size(); ++j) {
      if (hit[i] && hit[j]) {
        ++counts.a;
      } else if (!hit[i] && !hit[j]) {
        const std::int64_t k = common(hyps[i].dom, hyps[j].dom) + common(hyps[i].rare, hyps[j].rare);
        if (k > 0) {
          ++counts.b[static_cast<std::size_t>(k)];
        } else {
          ++counts.c;
        }
      } else {
        ++counts.c;
      }
    }
  }
  return counts;
}

Rational frac(std::uint64_t num, std::uint64_t den) {
  Rational q(BigInt(static_cast<unsigned long>(num)), BigInt(static_cast<unsigned long>(den)));
  q.canonicalize();
  return q;
}

struct KindCounts {
  Rational weight;
  PairCounts counts;
};

std::array<KindCounts, 2> pair_counts(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  check_pools(params);
  guard(enum_agreement_size(params), "agreement");
  const auto hyps = class_hypotheses(params, caps);
  const Rational p_d = exact_p_d(params);
  return {KindCounts{p_d, count_pairs(hyps, true, params.n_d, params.c)},
          KindCounts{1 - p_d, count_pairs(hyps, false, params.n_r, params.c)}};
}

}  // namespace

BigInt enum_accuracy_size(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  return binom(params.t_d, caps.c_d) * binom(params.t_r, caps.c_r) *
         (binom(params.t_d, params.n_d) + binom(params.t_r, params.n_r));
}

BigInt enum_agreement_size(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  const BigInt h = binom(params.t_d, caps.c_d) * binom(params.t_r, caps.c_r);
  return 2 * h * h;
}

Rational enum_accuracy(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  check_pools(params);
  guard(enum_accuracy_size(params), "accuracy");
  const auto doms = subsets(params.t_d, caps.c_d);
  const auto rares = subsets(params.t_r, caps.c_r);
  const Rational p_d = exact_p_d(params);

  auto kind_accuracy = [&](bool dominant) {
    const auto data = dominant ? subsets(params.t_d, params.n_d) : subsets(params.t_r, params.n_r);
    std::uint64_t halves = 0;
    std::uint64_t total = 0;
    for (const auto& x : data) {
      for (const auto& d : doms) {
        for (const auto& r : rares) {
          halves += intersects(dominant ? d : r, x) ? 2 : 1;
          total += 2;
        }
      }
    }
    return frac(halves, total);
  };
  Rational acc = p_d * kind_accuracy(true) + (1 - p_d) * kind_accuracy(false);
  acc.canonicalize();
  return acc;
}

exact::QComponents enum_q_components(const FrameworkParams& params) {
  const auto kinds = pair_counts(params);
  exact::QComponents q;
  q.q1 = 0;
  q.q3 = 0;
  q.q2.assign(static_cast<std::size_t>(params.c), Rational(0));
  for (const auto& [weight, counts] : kinds) {
    std::uint64_t total = counts.a + counts.c;
    for (const auto n : counts.b) total += n;
    q.q1 += weight * frac(counts.a, total);
    q.q3 += weight * frac(counts.c, total);
    for (std::int64_t k = 1; k <= params.c; ++k) {
      q.q2[static_cast<std::size_t>(k - 1)] +=
          weight * frac(counts.b[static_cast<std::size_t>(k)], total);
    }
  }
  q.q1.canonicalize();
  q.q3.canonicalize();
  for (auto& v : q.q2) v.canonicalize();
  return q;
}

Rational enum_agreement(const FrameworkParams& params, const AgreementFn& zeta) {
  const auto kinds = pair_counts(params);
  Rational agr = 0;
  for (const auto& [weight, counts] : kinds) {
    std::uint64_t total = counts.a + counts.c;
    for (const auto n : counts.b) total += n;
    Rational sum = Rational(BigInt(static_cast<unsigned long>(counts.a))) +
                   Rational(BigInt(static_cast<unsigned long>(counts.c)), 2);
    for (std::int64_t k = 1; k <= params.c; ++k) {
      const auto n = counts.b[static_cast<std::size_t>(k)];
      if (n > 0) sum += zeta.exact(k, params.c) * Rational(BigInt(static_cast<unsigned long>(n)));
    }
    sum.canonicalize();
    agr += weight * sum / Rational(BigInt(static_cast<unsigned long>(total)));
  }
  agr.canonicalize();
  return agr;
}

}  // namespace ifl
