#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "ifl/tensor.hpp"

namespace ifl::testing {

// Three models whose activations are rotated, noisy copies of four shared
// latent signals with standard deviations 4, 3, 2, 1. Model m has 4 + m
// columns; the extra ones carry noise only.
inline std::vector<ActivationMatrix> planted_models(int n, double sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd latent(n, 4);
  const double scale[4] = {4.0, 3.0, 2.0, 1.0};
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < 4; ++a) latent(i, a) = scale[a] * normal(gen);
  }
  std::vector<ActivationMatrix> out;
  for (int m = 0; m < 3; ++m) {
    const int d = 4 + m;
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) g(i, j) = normal(gen);
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, d);
    x.leftCols(4) = latent;
    x = x * q;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) += sigma * normal(gen);
    }
    out.push_back({"planted" + std::to_string(m), x.cast<float>()});
  }
  return out;
}

struct HandFixture {
  std::vector<ProjectedActivations> projections;
  ClusterAssignment assignment;
};

// Two models, three data, two features each. Clusters: model 0 features
// map to {0, 1}, model 1 features to {1, 2}.
inline HandFixture hand_fixture() {
  HandFixture fx;
  Eigen::MatrixXd m0(3, 2);
  m0 << 1.0, 0.2, 0.5, 1.0, 0.1, 0.7;
  Eigen::MatrixXd m1(3, 2);
  m1 << 0.3, 1.0, 1.0, 0.0, 0.6, 0.4;
  fx.projections.push_back({"m0", m0, m0, {false, false}});
  fx.projections.push_back({"m1", m1, m1, {false, false}});
  fx.assignment.models = 2;
  fx.assignment.k = 2;
  fx.assignment.ids = {0, 1, 1, 2};
  fx.assignment.num_clusters = 3;
  fx.assignment.gamma_corr = 0.9;
  return fx;
}

}  // namespace ifl::testing
