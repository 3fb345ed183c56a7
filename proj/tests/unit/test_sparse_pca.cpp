#include "doctest.h"

#include <cmath>
#include <random>

#include "kernelrmt/sparse_pca.hpp"

using namespace kernelrmt;

TEST_CASE("smoothed soft threshold examples") {
  const double tau = 1.7;
  CHECK(smoothed_soft_threshold(0.5 * tau, tau) == 0.0);
  CHECK(smoothed_soft_threshold(2.0 * tau, tau) == doctest::Approx(tau));
  CHECK(smoothed_soft_threshold(1.2 * tau, tau) == doctest::Approx(0.2 * tau).epsilon(1e-14));
  CHECK(smoothed_soft_threshold(-2.0 * tau, tau) == doctest::Approx(-tau));
  // band coefficient 1.25 / tau
  const double x = 1.05 * tau;
  CHECK(smoothed_soft_threshold(x, tau) == doctest::Approx(1.25 / tau * std::pow(x - 0.8 * tau, 2)));
  CHECK_THROWS_AS(smoothed_soft_threshold(1.0, 0.0), ConfigError);
}

TEST_CASE("threshold is odd, C^1 and close to the identity shift") {
  for (double tau : {0.3, 1.0, 2.5}) {
    ThresholdFunction k{tau};
    const double h = 1e-7;
    for (double edge : {0.8 * tau, 1.2 * tau}) {
      double left = (k(edge) - k(edge - h)) / h;
      double right = (k(edge + h) - k(edge)) / h;
      CHECK(std::abs(left - right) < 1e-5);
      CHECK(std::abs(k.derivative(edge) - right) < 1e-5);
    }
    CHECK(k.derivative(0.8 * tau) == 0.0);
    CHECK(k.derivative(1.2 * tau) == 1.0);
    for (double x = -6.0 * tau; x <= 6.0 * tau; x += 0.01 * tau) {
      CHECK(k(-x) == -k(x));
      if (std::abs(x) >= 1.2 * tau) CHECK(std::abs(k(x) - x) <= tau + 1e-12);
    }
  }
}

TEST_CASE("threshold Hermite moments") {
  GaussHermiteRule rule = build_quadrature();
  auto k = threshold_kernel(2.0);
  CHECK(k.is_odd());
  KernelMoments m = kernel_moments(k, rule);
  CHECK(m.a > 0.0);
  CHECK(m.a < 1.0);
  KernelExpansion e = project_kernel(k, 30, rule);
  CHECK(std::abs(m.nu - e.nu) < 1e-4);
  CHECK(e.a == doctest::Approx(m.a).epsilon(1e-10));
  for (int d = 2; d <= 30; d += 2) CHECK(std::abs(e.coefficient(d)) < 1e-8);

  // Monte Carlo cross-check with 1e7 samples
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const int N = 10000000;
  double sa = 0.0, sa2 = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < N; ++i) {
    double x = g(rng);
    double v = k(x);
    sa += x * v;
    sa2 += x * v * x * v;
    sn += v * v;
    sn2 += v * v * v * v;
  }
  double ma = sa / N, mn = sn / N;
  double se_a = std::sqrt((sa2 / N - ma * ma) / N);
  double se_n = std::sqrt((sn2 / N - mn * mn) / N);
  CHECK(std::abs(ma - m.a) < 5.0 * se_a);
  CHECK(std::abs(mn - m.nu) < 5.0 * se_n);
}

TEST_CASE("a(tau) >= 0 and the max edge is the norm") {
  for (double tau = 0.1; tau <= 5.0; tau += 0.3) {
    NullPrediction np = null_prediction_detail(tau, 1.0);
    CHECK(np.a >= 0.0);
    CHECK(np.max_edge == doctest::Approx(np.norm).epsilon(1e-12));
  }
}

TEST_CASE("null prediction") {
  for (double gamma : {0.5, 1.0, 2.0}) {
    double expect = std::pow(1.0 + std::sqrt(gamma), 2);
    CHECK(null_prediction(1e-4, gamma) == doctest::Approx(expect).epsilon(1e-3));
  }
  CHECK(null_prediction(10.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  double at2 = null_prediction(2.0, 1.0);
  CHECK(at2 > 1.0);
  CHECK(at2 < 4.0);
  double prev = null_prediction(0.1, 1.0);
  for (double tau = 0.2; tau <= 6.0; tau += 0.1) {
    double cur = null_prediction(tau, 1.0);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("spiked data") {
  SpikedModelConfig cfg;
  cfg.lambda = 2.0;
  cfg.n = 4000;
  cfg.gamma = 0.05;
  cfg.seed = 5;
  SpikedSample s = sample_spiked_data(cfg);
  CHECK(s.X.rows() == 200);
  CHECK(s.X.cols() == 4000);
  const int nnz = int((s.v.array() != 0.0).count());
  CHECK(nnz == int(std::floor(0.3 * std::sqrt(4000.0))));
  CHECK(std::abs(s.v.norm() - 1.0) < 1e-14);
  const double mag = 1.0 / std::sqrt(double(nnz));
  for (Eigen::Index i = 0; i < s.v.size(); ++i) {
    if (s.v(i) != 0.0) CHECK(std::abs(std::abs(s.v(i)) - mag) < 1e-15);
  }
  // variance along v is 1 + lambda; (v^T x)^2 / (1 + lambda) is chi-square(1)
  Eigen::RowVectorXd proj = s.v.transpose() * s.X;
  double mean_sq = proj.array().square().mean();
  CHECK(std::abs(mean_sq - 3.0) < 5.0 * 3.0 * std::sqrt(2.0 / 4000.0));
  SpikedSample again = sample_spiked_data(cfg);
  CHECK(again.X == s.X);
  CHECK(again.v == s.v);

  cfg.lambda = 0.0;
  CHECK_THROWS_AS(sample_spiked_data(cfg), ConfigError);
  cfg.lambda = 1.0;
  cfg.sparsity = 500;
  CHECK_THROWS_AS(sample_spiked_data(cfg), ConfigError);
}

TEST_CASE("thresholded covariance") {
  const int n = 2000, p = 300;
  const double tau = 1.5;
  Eigen::MatrixXd X = sample_data({n, p, EntryLaw::gaussian(), 8});
  Eigen::MatrixXd M = thresholded_covariance(X, tau);
  Eigen::MatrixXd K = build_kernel_matrix(X, threshold_kernel(tau));
  Eigen::MatrixXd off = M;
  off.diagonal().setZero();
  CHECK((off - K).cwiseAbs().maxCoeff() < 1e-14);
  const double target = 1.0 - tau / std::sqrt(double(n));
  CHECK((M.diagonal().array() - target).abs().maxCoeff() < 5.0 * std::sqrt(std::log(double(p)) / n));

  Eigen::MatrixXd big = thresholded_covariance(X, 10.0);
  Eigen::MatrixXd big_off = big;
  big_off.diagonal().setZero();
  const double zero_frac = double((big_off.array() == 0.0).count()) / big_off.size();
  CHECK(zero_frac > 0.999);
  auto s = spectrum(big);
  CHECK(std::abs(s.lambda_max - big.diagonal().maxCoeff()) < 0.05);
}

TEST_CASE("sweep_tau small run") {
  DataMatrixConfig null_cfg{300, 300, EntryLaw::gaussian(), 1};
  SpikedModelConfig spiked;
  spiked.lambda = 3.0;
  spiked.n = 300;
  spiked.gamma = 1.0;
  spiked.seed = 2;
  std::vector<double> taus{0.5, 1.5, 3.0};
  SweepResult one = sweep_tau(null_cfg, spiked, taus, 1);
  SweepResult five = sweep_tau(null_cfg, spiked, taus, 5);
  CHECK(one.null_se[0] == 0.0);
  REQUIRE(five.taus.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(five.null_se[k] > 0.0);
    CHECK(std::isfinite(five.prediction[k]));
    CHECK(five.prediction[k] > 0.0);
    CHECK(std::abs(five.null_mean[k] - five.prediction[k]) < 0.4);
  }
  // first trial is shared, so the one-trial run is a prefix of the five-trial run
  CHECK(one.null_lambda_max[1][0] == five.null_lambda_max[1][0]);
  std::string csv = sweep_csv(five);
  CHECK(csv.rfind("tau,null_mean,null_se,spiked_mean,spiked_se,prediction\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK_THROWS_AS(sweep_tau(null_cfg, spiked, {}, 1), ConfigError);
}
