#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ifl/params.hpp"
#include "ifl/rng.hpp"
#include "json.hpp"

namespace ifl {

enum class FeatureKind : std::uint8_t { Dominant = 0, Rare = 1 };

/// One feature of the universe: 2 classes x (t_d dominant + t_r rare).
struct FeatureId {
  int class_label = 0;
  FeatureKind kind = FeatureKind::Dominant;
  std::uint32_t index = 0;

  auto operator<=>(const FeatureId&) const = default;
};

struct DataPoint {
  int label = 0;
  FeatureKind kind = FeatureKind::Dominant;
  std::vector<FeatureId> features;  // sorted, distinct
};

/// Features learned by one model, per class.
struct Hypothesis {
  std::array<std::vector<FeatureId>, 2> dominant;
  std::array<std::vector<FeatureId>, 2> rare;
};

struct EstimateResult {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  bool operator==(const EstimateResult&) const = default;
};

nlohmann::json to_json(const EstimateResult& r);

enum class AgreementMode { Rao, Bernoulli };

/// Case of a (f, g, x) triple: A when both models share a feature with x,
/// B when neither does but they share `shared` >= 1 features of x's class,
/// C otherwise.
struct PairCase {
  enum class Kind { A, B, C };
  Kind kind = Kind::C;
  std::int64_t shared = 0;

  bool operator==(const PairCase&) const = default;
};

DataPoint sample_datapoint(const FrameworkParams& params, CounterRng& rng);
Hypothesis sample_hypothesis(const FrameworkParams& params, CounterRng& rng);

/// 1.0 if h has a feature of x, otherwise 0.5 (random guess).
double datapoint_correct_prob(const Hypothesis& h, const DataPoint& x);

PairCase pair_case(const Hypothesis& f, const Hypothesis& g, const DataPoint& x);

// Monte-Carlo estimators. Sample i draws everything from CounterRng(seed, i)
// and samples are reduced in fixed-size blocks in index order, so the result
// is bit-identical for any `threads`.

EstimateResult mc_accuracy(const FrameworkParams& params, std::uint64_t n_samples,
                           std::uint64_t seed, unsigned threads = 1);

EstimateResult mc_agreement(const FrameworkParams& params, const AgreementFn& zeta,
                            std::uint64_t n_samples, std::uint64_t seed,
                            AgreementMode mode = AgreementMode::Rao, unsigned threads = 1);

/// Accuracy when models can only learn from the first floor(beta * t)
/// features of each pool; capacity beyond that is spent on noise.
EstimateResult mc_coverage_accuracy(const FrameworkParams& params, const CoverageParams& cov,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    unsigned threads = 1);

}  // namespace ifl
