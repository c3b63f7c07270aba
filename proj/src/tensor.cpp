#include "ifl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "ifl/error.hpp"
#include "ifl/parallel.hpp"
#include "ifl/rational.hpp"

namespace ifl {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string model_label(const std::string& id) { return id.empty() ? std::string("<unnamed>") : id; }

// Column a of v is treated as constant when its spread is negligible next to
// its magnitude (scale free).
bool constant_column(const MatrixXd& centered, const MatrixXd& raw, Index a) {
  const double spread = centered.col(a).norm();
  const double scale = raw.col(a).cwiseAbs().maxCoeff();
  return spread <= 1e-12 * std::sqrt(static_cast<double>(raw.rows())) * scale;
}

MatrixXd centered(const MatrixXd& v) {
  MatrixXd c = v;
  c.rowwise() -= v.colwise().mean();
  return c;
}

// Rounded up so the ranked value itself never passes the strict comparison.
float clamp_threshold(double value, const char* name, Warnings& warnings) {
  float f = static_cast<float>(value);
  if (static_cast<double>(f) < value) f = std::nextafter(f, std::numeric_limits<float>::infinity());
  if (!(f > 0.0f)) {
    f = std::numeric_limits<float>::min();
    warnings.push_back(std::string(name) + " derived as " + std::to_string(value) +
                       "; clamped into (0, 1)");
  } else if (f >= 1.0f) {
    f = std::nextafter(1.0f, 0.0f);
    warnings.push_back(std::string(name) + " derived as " + std::to_string(value) +
                       "; clamped into (0, 1)");
  }
  return f;
}

}  // namespace

std::vector<std::uint32_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::uint32_t> sizes(num_clusters, 0);
  for (const auto id : ids) ++sizes[id];
  return sizes;
}

bool InteractionTensor::contains(std::uint32_t m, std::uint32_t n, std::uint32_t t) const {
  return std::binary_search(entries.begin(), entries.end(), Triple{m, n, t});
}

std::vector<std::uint32_t> BinaryMatrix::row_set(std::size_t r) const {
  std::vector<std::uint32_t> out;
  for (std::size_t c = 0; c < cols_; ++c) {
    if (bits_[r * cols_ + c]) out.push_back(static_cast<std::uint32_t>(c));
  }
  return out;
}

ProjectionBasis fit_pca(const ActivationMatrix& act, std::size_t k) {
  const Index n = act.values.rows();
  const Index d = act.values.cols();
  if (n < 2 || d < 1) {
    throw ValidationError("model '" + model_label(act.model_id) + "': need N >= 2 and d >= 1");
  }
  if (!act.values.allFinite()) {
    throw ValidationError("model '" + model_label(act.model_id) + "': non-finite activation");
  }
  const auto limit = static_cast<std::size_t>(std::min(n, d));
  if (k < 1 || k > limit) {
    throw ValidationError("k = " + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
  }
  MatrixXd x = act.values.cast<double>();
  ProjectionBasis basis;
  basis.column_means = x.colwise().mean().transpose();
  x.rowwise() -= basis.column_means.transpose();

  Eigen::BDCSVD<MatrixXd> svd(x, Eigen::ComputeThinV);
  const auto kk = static_cast<Index>(k);
  basis.columns = svd.matrixV().leftCols(kk);
  basis.singular_values = svd.singularValues().head(kk);
  for (Index a = 0; a < kk; ++a) {
    Index arg = 0;
    basis.columns.col(a).cwiseAbs().maxCoeff(&arg);
    if (basis.columns(arg, a) < 0.0) basis.columns.col(a) *= -1.0;
  }
  return basis;
}

ProjectedActivations project(const ActivationMatrix& act, const ProjectionBasis& basis,
                             Warnings* warnings) {
  if (act.values.cols() != basis.column_means.size() ||
      basis.columns.rows() != basis.column_means.size()) {
    throw ValidationError("model '" + model_label(act.model_id) + "': activation width " +
                          std::to_string(act.values.cols()) + " does not match basis width " +
                          std::to_string(basis.column_means.size()));
  }
  MatrixXd x = act.values.cast<double>();
  x.rowwise() -= basis.column_means.transpose();

  ProjectedActivations out;
  out.model_id = act.model_id;
  out.values = x * basis.columns;
  const Index k = basis.columns.cols();
  out.normalized = out.values.cwiseAbs();
  out.zero_column.assign(static_cast<std::size_t>(k), false);

  const double top = basis.singular_values.size() > 0 ? basis.singular_values(0) : 0.0;
  const double tol = static_cast<double>(std::max(x.rows(), x.cols())) *
                     std::numeric_limits<double>::epsilon() * top;
  for (Index a = 0; a < k; ++a) {
    const double peak = out.normalized.col(a).maxCoeff();
    if (basis.singular_values(a) <= tol || peak == 0.0) {
      out.values.col(a).setZero();
      out.normalized.col(a).setZero();
      out.zero_column[static_cast<std::size_t>(a)] = true;
      if (warnings) {
        warnings->push_back("model '" + model_label(act.model_id) + "': component " +
                            std::to_string(a) + " has zero variance; normalized column set to 0");
      }
    } else {
      out.normalized.col(a) /= peak;
    }
  }
  return out;
}

Eigen::MatrixXd correlation_matrix(const ProjectedActivations& p, const ProjectedActivations& q,
                                   Warnings* warnings) {
  if (p.values.rows() != q.values.rows()) {
    throw ValidationError("correlation needs equal N: " + std::to_string(p.values.rows()) +
                          " vs " + std::to_string(q.values.rows()));
  }
  const MatrixXd pc = centered(p.values);
  const MatrixXd qc = centered(q.values);
  MatrixXd r = pc.transpose() * qc;
  const VectorXd sp = pc.colwise().norm().transpose();
  const VectorXd sq = qc.colwise().norm().transpose();
  std::vector<bool> p_flat(static_cast<std::size_t>(pc.cols()));
  std::vector<bool> q_flat(static_cast<std::size_t>(qc.cols()));
  for (Index a = 0; a < pc.cols(); ++a) {
    p_flat[static_cast<std::size_t>(a)] = constant_column(pc, p.values, a);
    if (p_flat[static_cast<std::size_t>(a)] && warnings) {
      warnings->push_back("model '" + model_label(p.model_id) + "': column " + std::to_string(a) +
                          " has zero variance; correlations set to 0");
    }
  }
  for (Index b = 0; b < qc.cols(); ++b) {
    q_flat[static_cast<std::size_t>(b)] = constant_column(qc, q.values, b);
    if (q_flat[static_cast<std::size_t>(b)] && warnings && &p != &q) {
      warnings->push_back("model '" + model_label(q.model_id) + "': column " + std::to_string(b) +
                          " has zero variance; correlations set to 0");
    }
  }
  for (Index a = 0; a < r.rows(); ++a) {
    for (Index b = 0; b < r.cols(); ++b) {
      if (p_flat[static_cast<std::size_t>(a)] || q_flat[static_cast<std::size_t>(b)]) {
        r(a, b) = 0.0;
      } else {
        r(a, b) = std::clamp(r(a, b) / (sp(a) * sq(b)), -1.0, 1.0);
      }
    }
  }
  return r;
}

CorrelationTensor build_lambda(const std::vector<ProjectedActivations>& projections,
                               unsigned threads, Warnings* warnings) {
  const std::size_t m = projections.size();
  if (m < 2) throw ValidationError("Lambda needs at least two models");
  const Index n = projections[0].values.rows();
  const Index k = projections[0].values.cols();
  for (const auto& p : projections) {
    if (p.values.rows() != n || p.values.cols() != k) {
      throw ValidationError("model '" + model_label(p.model_id) + "' has shape " +
                            std::to_string(p.values.rows()) + "x" + std::to_string(p.values.cols()) +
                            ", expected " + std::to_string(n) + "x" + std::to_string(k));
    }
  }
  CorrelationTensor lambda;
  lambda.models = m;
  lambda.k = static_cast<std::size_t>(k);
  lambda.blocks.resize(m * m);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) pairs.emplace_back(i, j);
  }
  std::vector<Warnings> local(m);
  parallel_for(pairs.size(), threads, [&](std::size_t idx) {
    const auto [i, j] = pairs[idx];
    MatrixXd r = correlation_matrix(projections[i], projections[j], i == j ? &local[i] : nullptr);
    lambda.blocks[j * m + i] = r.transpose();
    lambda.blocks[i * m + j] = std::move(r);
  });
  if (warnings) {
    for (auto& w : local) warnings->insert(warnings->end(), w.begin(), w.end());
  }
  return lambda;
}

double percentile_threshold(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty set");
  if (!(p > 0.0 && p <= 100.0)) throw ValidationError("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const Rational pos = decimal_rational(p) * static_cast<long>(values.size()) / 100;
  std::int64_t rank = -floor_to_int(-pos);
  rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(values.size()));
  return values[static_cast<std::size_t>(rank - 1)];
}

ClusterAssignment cluster_features(const CorrelationTensor& lambda, double gamma_corr) {
  if (!(gamma_corr > 0.0 && gamma_corr < 1.0)) {
    throw ValidationError("gamma_corr must lie in (0, 1)");
  }
  const std::size_t m = lambda.models;
  const std::size_t k = lambda.k;
  if (lambda.blocks.size() != m * m) throw ValidationError("Lambda has the wrong number of blocks");
  for (const auto& b : lambda.blocks) {
    if (static_cast<std::size_t>(b.rows()) != k || static_cast<std::size_t>(b.cols()) != k) {
      throw ValidationError("Lambda block has the wrong shape");
    }
  }

  std::vector<std::int64_t> raw(m * k, -1);
  std::vector<double> maximum(m * k, -1.0);
  std::int64_t current = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (raw[i * k + j] >= 0) continue;
      raw[i * k + j] = current;
      for (std::size_t p = 0; p < m; ++p) {
        if (p == i) continue;
        const MatrixXd& corr = lambda.block(i, p);
        for (std::size_t q = 0; q < k; ++q) {
          const double v = std::abs(corr(static_cast<Index>(j), static_cast<Index>(q)));
          if (v > maximum[p * k + q] && v > gamma_corr) {
            raw[p * k + q] = current;
            maximum[p * k + q] = v;
          }
        }
      }
      ++current;
    }
  }

  // Later seeds can take over every member of an earlier cluster; renumber
  // the surviving ids in creation order.
  std::vector<std::int64_t> remap(static_cast<std::size_t>(current), -1);
  for (const auto id : raw) remap[static_cast<std::size_t>(id)] = 0;
  std::uint32_t next = 0;
  for (auto& r : remap) {
    if (r == 0) r = next++;
  }
  ClusterAssignment out;
  out.models = m;
  out.k = k;
  out.gamma_corr = gamma_corr;
  out.num_clusters = next;
  out.ids.resize(m * k);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.ids[i] = static_cast<std::uint32_t>(remap[static_cast<std::size_t>(raw[i])]);
  }
  return out;
}

DataFeatureResult assign_data_features(const std::vector<ProjectedActivations>& projections,
                                       const ClusterAssignment& assignment, double gamma_data) {
  if (!std::isfinite(gamma_data) || gamma_data < 0.0) {
    throw ValidationError("gamma_data must be a finite nonnegative number");
  }
  if (projections.size() != assignment.models || projections.empty()) {
    throw ValidationError("assignment covers " + std::to_string(assignment.models) +
                          " models but " + std::to_string(projections.size()) + " were given");
  }
  const Index n = projections[0].normalized.rows();
  for (const auto& p : projections) {
    if (p.normalized.rows() != n || static_cast<std::size_t>(p.normalized.cols()) != assignment.k) {
      throw ValidationError("model '" + model_label(p.model_id) +
                            "': projection shape does not match the assignment");
    }
  }
  if (static_cast<std::uint64_t>(n) > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("too many data points");
  }

  DataFeatureResult out;
  auto& omega = out.omega;
  omega.models = static_cast<std::uint32_t>(projections.size());
  omega.data = static_cast<std::uint32_t>(n);
  omega.features = assignment.num_clusters;
  omega.gamma_corr = static_cast<float>(assignment.gamma_corr);
  omega.gamma_data = static_cast<float>(gamma_data);
  for (std::size_t m = 0; m < projections.size(); ++m) {
    const auto& p = projections[m];
    for (std::size_t a = 0; a < assignment.k; ++a) {
      if (!p.zero_column.empty() && p.zero_column[a]) continue;
      const std::uint32_t t = assignment.at(m, a);
      for (Index i = 0; i < n; ++i) {
        if (p.normalized(i, static_cast<Index>(a)) > gamma_data) {
          omega.entries.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(i), t});
        }
      }
    }
  }
  std::sort(omega.entries.begin(), omega.entries.end());
  omega.entries.erase(std::unique(omega.entries.begin(), omega.entries.end()), omega.entries.end());
  out.data_features = data_features(omega);
  return out;
}

BinaryMatrix model_features(const InteractionTensor& omega) {
  BinaryMatrix out(omega.models, omega.features);
  for (const auto& e : omega.entries) out.set(e.m, e.t);
  return out;
}

BinaryMatrix data_features(const InteractionTensor& omega) {
  BinaryMatrix out(omega.data, omega.features);
  for (const auto& e : omega.entries) out.set(e.n, e.t);
  return out;
}

PipelineResult build_interaction_tensor(const std::vector<ActivationMatrix>& models,
                                        const PipelineConfig& config) {
  if (models.size() < 2) throw ValidationError("the pipeline needs at least two models");
  const Index n = models[0].values.rows();
  Index limit = std::numeric_limits<Index>::max();
  for (const auto& act : models) {
    if (act.values.rows() != n) {
      throw ValidationError("model '" + model_label(act.model_id) + "' has " +
                            std::to_string(act.values.rows()) + " rows, expected " +
                            std::to_string(n));
    }
    limit = std::min({limit, act.values.rows(), act.values.cols()});
  }
  if (config.pcs < 1) throw ValidationError("pcs must be at least 1");
  for (const double p : {config.corr_percentile, config.data_percentile}) {
    if (!(p > 0.0 && p <= 100.0)) throw ValidationError("percentiles must lie in (0, 100]");
  }

  PipelineResult out;
  out.pcs = config.pcs;
  if (static_cast<Index>(out.pcs) > limit) {
    out.warnings.push_back("pcs reduced from " + std::to_string(config.pcs) + " to " +
                           std::to_string(limit));
    out.pcs = static_cast<std::size_t>(limit);
  }

  out.bases.resize(models.size());
  out.projections.resize(models.size());
  std::vector<Warnings> local(models.size());
  parallel_for(models.size(), config.threads, [&](std::size_t i) {
    out.bases[i] = fit_pca(models[i], out.pcs);
    out.projections[i] = project(models[i], out.bases[i], &local[i]);
  });
  for (auto& w : local) out.warnings.insert(out.warnings.end(), w.begin(), w.end());

  out.lambda = build_lambda(out.projections, config.threads);

  double gamma_corr = config.gamma_corr;
  if (gamma_corr < 0.0) {
    std::vector<double> pool;
    for (std::size_t i = 0; i < models.size(); ++i) {
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        const auto& b = out.lambda.block(i, j);
        for (Index e = 0; e < b.size(); ++e) pool.push_back(std::abs(b.data()[e]));
      }
    }
    gamma_corr = clamp_threshold(percentile_threshold(std::move(pool), config.corr_percentile),
                                 "gamma_corr", out.warnings);
  } else {
    gamma_corr = static_cast<float>(gamma_corr);
  }
  out.assignment = cluster_features(out.lambda, gamma_corr);

  double gamma_data = config.gamma_data;
  if (gamma_data < 0.0) {
    std::vector<double> pool;
    for (const auto& p : out.projections) {
      pool.insert(pool.end(), p.normalized.data(), p.normalized.data() + p.normalized.size());
    }
    gamma_data = clamp_threshold(percentile_threshold(std::move(pool), config.data_percentile),
                                 "gamma_data", out.warnings);
  } else {
    gamma_data = static_cast<float>(gamma_data);
  }
  out.features = assign_data_features(out.projections, out.assignment, gamma_data);
  return out;
}

}  // namespace ifl
