#include "ifl/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ifl/error.hpp"
#include "ifl/model.hpp"
#include "ifl/parallel.hpp"

namespace ifl {

nlohmann::json to_json(const EstimateResult& r) {
  return nlohmann::json{
      {"mean", r.mean}, {"stderr", r.std_error}, {"n", r.n_samples}, {"seed", r.seed}};
}

namespace {

constexpr std::uint64_t kBlock = 4096;

/// Fixed-width bit set over a feature pool.
class PoolSet {
 public:
  explicit PoolSet(std::int64_t size = 0) : words_(static_cast<std::size_t>((size + 63) / 64)) {}

  void clear() { std::fill(words_.begin(), words_.end(), 0); }
  bool test(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  bool intersects(const PoolSet& other) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] & other.words_[w]) return true;
    }
    return false;
  }

  std::int64_t common(const PoolSet& other) const {
    std::int64_t n = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) n += std::popcount(words_[w] & other.words_[w]);
    return n;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        fn(w * 64 + static_cast<std::uint64_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

 private:
  std::vector<std::uint64_t> words_;
};

/// Floyd's algorithm: a uniform k-subset of [0, n).
void draw_subset(CounterRng& rng, std::int64_t n, std::int64_t k, PoolSet& out) {
  out.clear();
  for (std::int64_t j = n - k; j < n; ++j) {
    const auto t = rng.below(static_cast<std::uint64_t>(j + 1));
    if (out.test(t)) {
      out.set(static_cast<std::uint64_t>(j));
    } else {
      out.set(t);
    }
  }
}

std::vector<FeatureId> to_features(const PoolSet& set, int label, FeatureKind kind) {
  std::vector<FeatureId> out;
  set.for_each([&](std::uint64_t i) {
    out.push_back(FeatureId{label, kind, static_cast<std::uint32_t>(i)});
  });
  return out;
}

bool sorted_intersect(const std::vector<FeatureId>& a, const std::vector<FeatureId>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

std::int64_t sorted_common(const std::vector<FeatureId>& a, const std::vector<FeatureId>& b) {
  std::int64_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

bool shares_with(const Hypothesis& h, const DataPoint& x) {
  const auto label = static_cast<std::size_t>(x.label);
  const auto& pool = x.kind == FeatureKind::Dominant ? h.dominant[label] : h.rare[label];
  return sorted_intersect(pool, x.features);
}

struct BlockSum {
  double sum = 0.0;
  double sum_sq = 0.0;
};

/// Runs value(rng) for every sample index and reduces in block order.
template <class MakeWorker>
EstimateResult estimate(std::uint64_t n_samples, std::uint64_t seed, unsigned threads,
                        MakeWorker make_worker) {
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  const std::uint64_t blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<BlockSum> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    auto worker = make_worker();
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(n_samples, lo + kBlock);
    BlockSum s;
    for (std::uint64_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, i);
      const double v = worker(rng);
      s.sum += v;
      s.sum_sq += v * v;
    }
    partial[b] = s;
  });
  BlockSum total;
  for (const auto& s : partial) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  const double n = static_cast<double>(n_samples);
  EstimateResult r;
  r.mean = total.sum / n;
  r.n_samples = n_samples;
  r.seed = seed;
  if (n_samples > 1) {
    const double var = std::max(0.0, (total.sum_sq - n * r.mean * r.mean) / (n - 1.0));
    r.std_error = std::sqrt(var / n);
  }
  return r;
}

/// Scratch state for one worker: the datum and up to two hypotheses, class y
/// only (the other class never influences a prediction on x).
struct Scratch {
  PoolSet x_dom, x_rare;
  PoolSet f_dom, f_rare, g_dom, g_rare;

  explicit Scratch(const FrameworkParams& p)
      : x_dom(p.t_d), x_rare(p.t_r), f_dom(p.t_d), f_rare(p.t_r), g_dom(p.t_d), g_rare(p.t_r) {}
};

/// Draws the label and kind of a datum and its features; returns true when
/// the datum is dominant.
bool draw_datum(const FrameworkParams& p, CounterRng& rng, Scratch& s) {
  (void)rng.below(2);  // class label; predictions are symmetric in it
  const bool dominant = rng.uniform() < p.p_d;
  if (dominant) {
    draw_subset(rng, p.t_d, p.n_d, s.x_dom);
  } else {
    draw_subset(rng, p.t_r, p.n_r, s.x_rare);
  }
  return dominant;
}

/// Draws a model restricted to the first `pool` features of each kind,
/// learning min(capacity, pool) of them.
void draw_model(CounterRng& rng, std::int64_t pool_d, std::int64_t c_d, std::int64_t pool_r,
                std::int64_t c_r, PoolSet& dom, PoolSet& rare) {
  draw_subset(rng, pool_d, std::min(c_d, pool_d), dom);
  draw_subset(rng, pool_r, std::min(c_r, pool_r), rare);
}

EstimateResult accuracy_kernel(const FrameworkParams& params, std::int64_t pool_d,
                               std::int64_t pool_r, std::uint64_t n_samples, std::uint64_t seed,
                               unsigned threads) {
  const Capacities caps = derived_capacities(params);
  return estimate(n_samples, seed, threads, [&] {
    return [&params, caps, pool_d, pool_r, s = Scratch(params)](CounterRng& rng) mutable {
      const bool dominant = draw_datum(params, rng, s);
      draw_model(rng, pool_d, caps.c_d, pool_r, caps.c_r, s.f_dom, s.f_rare);
      const bool hit = dominant ? s.f_dom.intersects(s.x_dom) : s.f_rare.intersects(s.x_rare);
      return hit ? 1.0 : 0.5;
    };
  });
}

}  // namespace

DataPoint sample_datapoint(const FrameworkParams& params, CounterRng& rng) {
  derived_capacities(params);
  DataPoint x;
  x.label = static_cast<int>(rng.below(2));
  const bool dominant = rng.uniform() < params.p_d;
  x.kind = dominant ? FeatureKind::Dominant : FeatureKind::Rare;
  PoolSet set(dominant ? params.t_d : params.t_r);
  draw_subset(rng, dominant ? params.t_d : params.t_r, dominant ? params.n_d : params.n_r, set);
  x.features = to_features(set, x.label, x.kind);
  return x;
}

Hypothesis sample_hypothesis(const FrameworkParams& params, CounterRng& rng) {
  const Capacities caps = derived_capacities(params);
  Hypothesis h;
  PoolSet dom(params.t_d);
  PoolSet rare(params.t_r);
  for (int label = 0; label < 2; ++label) {
    draw_subset(rng, params.t_d, caps.c_d, dom);
    draw_subset(rng, params.t_r, caps.c_r, rare);
    h.dominant[static_cast<std::size_t>(label)] = to_features(dom, label, FeatureKind::Dominant);
    h.rare[static_cast<std::size_t>(label)] = to_features(rare, label, FeatureKind::Rare);
  }
  return h;
}

double datapoint_correct_prob(const Hypothesis& h, const DataPoint& x) {
  return shares_with(h, x) ? 1.0 : 0.5;
}

PairCase pair_case(const Hypothesis& f, const Hypothesis& g, const DataPoint& x) {
  const bool f_hit = shares_with(f, x);
  const bool g_hit = shares_with(g, x);
  if (f_hit && g_hit) return {PairCase::Kind::A, 0};
  if (!f_hit && !g_hit) {
    const auto y = static_cast<std::size_t>(x.label);
    const std::int64_t k =
        sorted_common(f.dominant[y], g.dominant[y]) + sorted_common(f.rare[y], g.rare[y]);
    if (k > 0) return {PairCase::Kind::B, k};
  }
  return {PairCase::Kind::C, 0};
}

EstimateResult mc_accuracy(const FrameworkParams& params, std::uint64_t n_samples,
                           std::uint64_t seed, unsigned threads) {
  return accuracy_kernel(params, params.t_d, params.t_r, n_samples, seed, threads);
}

EstimateResult mc_coverage_accuracy(const FrameworkParams& params, const CoverageParams& cov,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    unsigned threads) {
  derived_capacities(params);
  validate(cov);
  const std::int64_t pool_d = floor_to_int(decimal_rational(cov.beta_d) * Rational(params.t_d));
  const std::int64_t pool_r = floor_to_int(decimal_rational(cov.beta_r) * Rational(params.t_r));
  return accuracy_kernel(params, pool_d, pool_r, n_samples, seed, threads);
}

EstimateResult mc_agreement(const FrameworkParams& params, const AgreementFn& zeta,
                            std::uint64_t n_samples, std::uint64_t seed, AgreementMode mode,
                            unsigned threads) {
  const Capacities caps = derived_capacities(params);
  std::vector<double> zeta_table(static_cast<std::size_t>(params.c + 1), 0.5);
  for (std::int64_t k = 1; k <= params.c; ++k) {
    zeta_table[static_cast<std::size_t>(k)] = zeta(k, params.c);
  }
  return estimate(n_samples, seed, threads, [&] {
    return [&params, &zeta_table, caps, mode, s = Scratch(params)](CounterRng& rng) mutable {
      const bool dominant = draw_datum(params, rng, s);
      draw_model(rng, params.t_d, caps.c_d, params.t_r, caps.c_r, s.f_dom, s.f_rare);
      draw_model(rng, params.t_d, caps.c_d, params.t_r, caps.c_r, s.g_dom, s.g_rare);
      const PoolSet& x = dominant ? s.x_dom : s.x_rare;
      const bool f_hit = (dominant ? s.f_dom : s.f_rare).intersects(x);
      const bool g_hit = (dominant ? s.g_dom : s.g_rare).intersects(x);
      double p = 0.5;
      if (f_hit && g_hit) {
        p = 1.0;
      } else if (!f_hit && !g_hit) {
        const std::int64_t k = s.f_dom.common(s.g_dom) + s.f_rare.common(s.g_rare);
        if (k > 0) p = zeta_table[static_cast<std::size_t>(k)];
      }
      if (mode == AgreementMode::Bernoulli) return rng.uniform() < p ? 1.0 : 0.0;
      return p;
    };
  });
}

}  // namespace ifl
