#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ifl/tensor.hpp"

namespace ifl {

struct PredictionMatrix {
  std::vector<std::vector<int>> predictions;  // M rows of N labels
  std::vector<int> true_labels;
  int num_classes = 0;

  std::size_t models() const { return predictions.size(); }
  std::size_t data() const { return true_labels.size(); }
  /// Throws ValidationError on ragged rows or labels outside [0, num_classes).
  void validate() const;
};

struct FeatureCount {
  std::uint32_t feature = 0;
  std::uint32_t data_count = 0;
  bool operator==(const FeatureCount&) const = default;
};

/// Data count per feature (any model marks it), sorted by count descending
/// then feature id.
std::vector<FeatureCount> feature_frequency(const InteractionTensor& omega);

/// Fraction of models predicting each datum's true label.
std::vector<double> ensemble_confidence(const PredictionMatrix& preds);

struct DatumRecord {
  std::uint32_t datum = 0;
  double confidence = 0.0;
  std::uint32_t n_features = 0;
  bool operator==(const DatumRecord&) const = default;
};

std::vector<DatumRecord> confidence_feature_table(const InteractionTensor& omega,
                                                  const PredictionMatrix& preds);

/// Per-feature densities of the fully confident data (confidence 1) and of the
/// rest, each normalized by its group's total feature count.
struct SplitDensity {
  std::vector<std::uint32_t> features;  // global frequency order
  std::vector<double> high;
  std::vector<double> low;
  std::size_t high_size = 0;
  std::size_t low_size = 0;
};

SplitDensity split_feature_density(const InteractionTensor& omega, const PredictionMatrix& preds,
                                   Warnings* warnings = nullptr);

struct FeatureModelCount {
  std::uint32_t feature = 0;
  std::uint32_t data_count = 0;
  std::uint32_t model_count = 0;
  bool operator==(const FeatureModelCount&) const = default;
};

struct DataModelCounts {
  std::vector<FeatureModelCount> records;  // feature id order
  std::optional<double> correlation;       // Pearson over features seen at least once
};

DataModelCounts data_model_counts(const InteractionTensor& omega, Warnings* warnings = nullptr);

enum class MistakeMode { Identical, Joint };

MistakeMode parse_mistake_mode(const std::string& text);

struct PairRecord {
  std::uint32_t model_i = 0;
  std::uint32_t model_j = 0;
  std::uint32_t shared_features = 0;
  double shared_error = 0.0;
  bool flagged = false;  // neither model makes a mistake
};

/// All ordered pairs (i, j), including i == j. shared_error is the shared
/// mistake count divided by the mean mistake count of the two models.
std::vector<PairRecord> shared_error_table(const BinaryMatrix& model_features,
                                           const PredictionMatrix& preds, MistakeMode mode,
                                           Warnings* warnings = nullptr);

/// Dice coefficient 2|a & b| / (|a| + |b|); 0 (flagged) when both are empty.
double feature_similarity(std::vector<std::uint32_t> a, std::vector<std::uint32_t> b,
                          Warnings* warnings = nullptr);

struct Neighbor {
  std::uint32_t datum = 0;
  double similarity = 0.0;
  bool operator==(const Neighbor&) const = default;
};

/// Most similar other data to `index`, ties by ascending datum index.
std::vector<Neighbor> nearest_neighbors(const BinaryMatrix& data_features, std::size_t index,
                                        std::size_t top_k);

/// counts[t][c] = number of class-c data containing feature t.
std::vector<std::vector<std::uint32_t>> per_class_frequency(const BinaryMatrix& data_features,
                                                            const std::vector<int>& true_labels,
                                                            int num_classes);

// CSV rendering. Numbers use 12 significant digits. After the rows come
// optional "#key,value" summary lines, then a "#warnings" block listing one
// "# message" line per flag.

std::string format_number(double v);

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows,
                       const Warnings& warnings = {},
                       const std::vector<std::pair<std::string, std::string>>& summary = {});

std::string feature_frequency_csv(const InteractionTensor& omega);
std::string confidence_csv(const InteractionTensor& omega, const PredictionMatrix& preds);
std::string density_csv(const InteractionTensor& omega, const PredictionMatrix& preds);
std::string data_model_csv(const InteractionTensor& omega);
std::string shared_error_csv(const InteractionTensor& omega, const PredictionMatrix& preds,
                             MistakeMode mode);
std::string neighbors_csv(const InteractionTensor& omega, std::size_t index, std::size_t top_k);
std::string per_class_csv(const InteractionTensor& omega, const std::vector<int>& true_labels,
                          int num_classes);

}  // namespace ifl
