#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kernelrmt/hermite.hpp"
#include "kernelrmt/rmt_sim.hpp"

namespace kernelrmt {

// 0 on |x| <= 0.8 tau, sign(x)(|x| - tau) on |x| >= 1.2 tau, and the
// C^1-matching quadratic (1.25 / tau)(|x| - 0.8 tau)^2 in between.
struct ThresholdFunction {
  double tau = 1.0;
  double inner_fraction = 0.8;
  double outer_fraction = 1.2;

  double operator()(double x) const;
  double derivative(double x) const;
};

double smoothed_soft_threshold(double x, double tau);

// The threshold as a declared-odd KernelSpec named "soft_threshold(tau)".
KernelSpec threshold_kernel(double tau);

struct SpikedModelConfig {
  double lambda = 1.0;
  int n = 2;
  double gamma = 1.0;
  // ||v||_0 = floor(sparsity_c sqrt(n)) unless an explicit count is given.
  double sparsity_c = 0.3;
  std::optional<int> sparsity;
  std::uint64_t seed = 0;

  int p() const;
  int support_size() const;
};

struct SpikedSample {
  Eigen::MatrixXd X;  // p x n
  Eigen::VectorXd v;  // unit spike direction
};

// Columns N(0, I + lambda v v^T) as g + sqrt(lambda) w_j v with w_j ~ N(0, 1).
SpikedSample sample_spiked_data(const SpikedModelConfig& cfg);

// k_tau(sqrt(n) S_ii') / sqrt(n) for every entry, diagonal included.
Eigen::MatrixXd thresholded_covariance(const Eigen::MatrixXd& X, double tau);

struct NullPrediction {
  double a = 0.0;
  double nu = 0.0;
  double norm = 0.0;
  double max_edge = 0.0;
  double prediction = 0.0;  // norm + 1
};

NullPrediction null_prediction_detail(double tau, double gamma);
double null_prediction(double tau, double gamma);

struct SweepResult {
  std::vector<double> taus;
  std::vector<double> null_mean, null_se;
  std::vector<double> spiked_mean, spiked_se;
  std::vector<double> prediction;
  // per-trial values, indexed [tau][trial]
  std::vector<std::vector<double>> null_lambda_max;
  std::vector<std::vector<double>> spiked_lambda_max;
};

inline constexpr int kDefaultSweepTrials = 5;
inline constexpr int kDefaultSweepPoints = 25;

// Each trial draws one null and one spiked data matrix, reused across the
// whole tau grid.
SweepResult sweep_tau(const DataMatrixConfig& null_cfg, const SpikedModelConfig& spiked_cfg,
                      const std::vector<double>& taus, int trials = kDefaultSweepTrials);

// tau,null_mean,null_se,spiked_mean,spiked_se,prediction
std::string sweep_csv(const SweepResult& result);

}  // namespace kernelrmt
