#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ifl {

using Warnings = std::vector<std::string>;

/// Penultimate-layer activations of one model: rows are data points.
struct ActivationMatrix {
  std::string model_id;
  Eigen::MatrixXf values;
};

struct ProjectionBasis {
  Eigen::MatrixXd columns;          // d x k, orthonormal
  Eigen::VectorXd singular_values;  // nonincreasing
  Eigen::VectorXd column_means;     // length d
};

struct ProjectedActivations {
  std::string model_id;
  Eigen::MatrixXd values;      // N x k scores
  Eigen::MatrixXd normalized;  // |values| / column max, in [0, 1]
  std::vector<bool> zero_column;
};

/// Lambda[i][j] is the k x k correlation matrix between models i and j.
struct CorrelationTensor {
  std::size_t models = 0;
  std::size_t k = 0;
  std::vector<Eigen::MatrixXd> blocks;  // models * models, row-major

  const Eigen::MatrixXd& block(std::size_t i, std::size_t j) const { return blocks[i * models + j]; }
  double at(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const {
    return block(i, j)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
};

/// Cluster id (0-based, contiguous) of every (model, feature) pair.
struct ClusterAssignment {
  std::size_t models = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> ids;  // models * k, row-major
  std::uint32_t num_clusters = 0;
  double gamma_corr = 0.0;

  std::uint32_t at(std::size_t m, std::size_t a) const { return ids[m * k + a]; }
  std::vector<std::uint32_t> cluster_sizes() const;
};

struct Triple {
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  auto operator<=>(const Triple&) const = default;
};

/// Sparse binary M x N x T tensor, triples sorted and unique.
struct InteractionTensor {
  std::uint32_t models = 0;
  std::uint32_t data = 0;
  std::uint32_t features = 0;
  float gamma_corr = 0.0f;
  float gamma_data = 0.0f;
  std::vector<Triple> entries;

  bool contains(std::uint32_t m, std::uint32_t n, std::uint32_t t) const;
  bool operator==(const InteractionTensor&) const = default;
};

/// Dense row-major 0/1 matrix.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v = true) { bits_[r * cols_ + c] = v ? 1 : 0; }
  std::vector<std::uint32_t> row_set(std::size_t r) const;

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

ProjectionBasis fit_pca(const ActivationMatrix& act, std::size_t k);

ProjectedActivations project(const ActivationMatrix& act, const ProjectionBasis& basis,
                             Warnings* warnings = nullptr);

/// Population Pearson correlation between the score columns of p and q.
Eigen::MatrixXd correlation_matrix(const ProjectedActivations& p, const ProjectedActivations& q,
                                   Warnings* warnings = nullptr);

CorrelationTensor build_lambda(const std::vector<ProjectedActivations>& projections,
                               unsigned threads = 1, Warnings* warnings = nullptr);

/// Nearest-rank percentile: element ceil(p/100 * n) (1-based) of the sorted values.
double percentile_threshold(std::vector<double> values, double p);

/// Greedy clustering over (model, feature) pairs in row-major order.
ClusterAssignment cluster_features(const CorrelationTensor& lambda, double gamma_corr);

struct DataFeatureResult {
  InteractionTensor omega;
  BinaryMatrix data_features;  // N x T, OR of omega over models
};

/// Omega(m, n, t) = 1 iff some feature a of model m has assignment t and
/// normalized |score| > gamma_data.
DataFeatureResult assign_data_features(const std::vector<ProjectedActivations>& projections,
                                       const ClusterAssignment& assignment, double gamma_data);

/// M x T: model m has feature t if it marks t on any datum.
BinaryMatrix model_features(const InteractionTensor& omega);

/// N x T OR of omega over models.
BinaryMatrix data_features(const InteractionTensor& omega);

struct PipelineConfig {
  std::size_t pcs = 50;
  double corr_percentile = 90.0;
  double data_percentile = 90.0;
  double gamma_corr = -1.0;  // negative: derive from corr_percentile
  double gamma_data = -1.0;  // negative: derive from data_percentile
  unsigned threads = 1;
};

struct PipelineResult {
  std::size_t pcs = 0;
  std::vector<ProjectionBasis> bases;
  std::vector<ProjectedActivations> projections;
  CorrelationTensor lambda;
  ClusterAssignment assignment;
  DataFeatureResult features;
  Warnings warnings;
};

/// Runs PCA, Lambda, clustering and data matching end to end. Thresholds are
/// rounded to float before use so the stored tensor header reproduces Omega.
PipelineResult build_interaction_tensor(const std::vector<ActivationMatrix>& models,
                                        const PipelineConfig& config);

}  // namespace ifl
