#include "kernelrmt/sparse_pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "kernelrmt/csv.hpp"
#include "kernelrmt/errors.hpp"
#include "kernelrmt/limit_law.hpp"
#include "kernelrmt/rng.hpp"

namespace kernelrmt {

double ThresholdFunction::operator()(double x) const {
  const double ax = std::abs(x);
  const double lo = inner_fraction * tau;
  const double hi = outer_fraction * tau;
  double mag;
  if (ax <= lo) {
    mag = 0.0;
  } else if (ax >= hi) {
    mag = ax - tau;
  } else {
    // slope 0 at lo and 1 at hi fixes the coefficient at 1 / (2 (hi - lo))
    mag = (ax - lo) * (ax - lo) / (2.0 * (hi - lo));
  }
  return x < 0.0 ? -mag : mag;
}

double ThresholdFunction::derivative(double x) const {
  const double ax = std::abs(x);
  const double lo = inner_fraction * tau;
  const double hi = outer_fraction * tau;
  if (ax <= lo) return 0.0;
  if (ax >= hi) return 1.0;
  return (ax - lo) / (hi - lo);
}

double smoothed_soft_threshold(double x, double tau) {
  if (!(tau > 0.0)) throw ConfigError("threshold tau must be > 0");
  return ThresholdFunction{tau}(x);
}

KernelSpec threshold_kernel(double tau) {
  if (!(tau > 0.0)) throw ConfigError("threshold tau must be > 0");
  std::ostringstream name;
  name << "soft_threshold(" << tau << ")";
  return make_kernel(ThresholdFunction{tau}, KernelParity::odd, name.str(), "linear growth, C^1");
}

int SpikedModelConfig::p() const { return std::max(2, int(std::lround(gamma * n))); }

int SpikedModelConfig::support_size() const {
  if (sparsity) return *sparsity;
  return int(std::floor(sparsity_c * std::sqrt(double(n))));
}

SpikedSample sample_spiked_data(const SpikedModelConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw ConfigError("spike strength lambda must be > 0");
  if (!(cfg.gamma > 0.0)) throw ConfigError("aspect ratio gamma must be > 0");
  const int p = cfg.p();
  const int s = cfg.support_size();
  if (s < 1 || s > p) {
    throw ConfigError("spike sparsity must lie in [1, p] (got " + std::to_string(s) + ")");
  }
  SpikedSample out;
  out.X = sample_data({cfg.n, p, EntryLaw::gaussian(), cfg.seed});

  Rng vrng = make_rng(cfg.seed, 1);
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), vrng);
  out.v = Eigen::VectorXd::Zero(p);
  const double mag = 1.0 / std::sqrt(double(s));
  for (int k = 0; k < s; ++k) out.v(idx[k]) = (vrng() >> 63) ? mag : -mag;

  Rng wrng = make_rng(cfg.seed, 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::RowVectorXd w(cfg.n);
  for (int j = 0; j < cfg.n; ++j) w(j) = normal(wrng);
  out.X.noalias() += std::sqrt(cfg.lambda) * out.v * w;
  return out;
}

namespace {

Eigen::MatrixXd lower_gram(const Eigen::MatrixXd& X) {
  detail::check_kernel_dimension(X.rows());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(X.rows(), X.rows());
  G.selfadjointView<Eigen::Lower>().rankUpdate(X);
  return G;
}

// Thresholded covariance from the lower triangle of X X^T.
Eigen::MatrixXd threshold_gram(const Eigen::MatrixXd& G, double n, double tau) {
  const ThresholdFunction k{tau};
  const double root_n = std::sqrt(n);
  const Eigen::Index p = G.rows();
  Eigen::MatrixXd M(p, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = j; i < p; ++i) {
      M(i, j) = k(G(i, j) / root_n) / root_n;
      M(j, i) = M(i, j);
    }
  return M;
}

void mean_and_se(const std::vector<double>& xs, double& mean, double& se) {
  const double t = double(xs.size());
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / t;
  if (xs.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (t - 1.0) / t);
}

}  // namespace

Eigen::MatrixXd thresholded_covariance(const Eigen::MatrixXd& X, double tau) {
  if (!(tau > 0.0)) throw ConfigError("threshold tau must be > 0");
  return threshold_gram(lower_gram(X), double(X.cols()), tau);
}

NullPrediction null_prediction_detail(double tau, double gamma) {
  static const GaussHermiteRule rule = build_quadrature(kDefaultQuadratureOrder);
  KernelMoments m = kernel_moments(threshold_kernel(tau), rule);
  NullPrediction out;
  out.a = m.a;
  out.nu = std::max(m.nu, m.a * m.a);
  if (out.nu <= 0.0) {
    // far thresholds underflow to the zero kernel, whose law is a point mass
    out.prediction = 1.0;
    return out;
  }
  SupportIntervals s = support({out.a, out.nu, gamma});
  out.norm = s.norm;
  out.max_edge = s.max_edge;
  out.prediction = s.norm + 1.0;
  return out;
}

double null_prediction(double tau, double gamma) { return null_prediction_detail(tau, gamma).prediction; }

SweepResult sweep_tau(const DataMatrixConfig& null_cfg, const SpikedModelConfig& spiked_cfg,
                      const std::vector<double>& taus, int trials) {
  if (taus.empty()) throw ConfigError("tau grid must be nonempty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  for (double t : taus) {
    if (!(t > 0.0)) throw ConfigError("tau grid values must be > 0");
  }
  SweepResult out;
  out.taus = taus;
  const std::size_t T = taus.size();
  out.null_lambda_max.assign(T, std::vector<double>(trials));
  out.spiked_lambda_max.assign(T, std::vector<double>(trials));

  for (int t = 0; t < trials; ++t) {
    DataMatrixConfig nc = null_cfg;
    nc.seed = derive_seed(null_cfg.seed, std::uint64_t(t));
    const Eigen::MatrixXd Gn = lower_gram(sample_data(nc));
    for (std::size_t k = 0; k < T; ++k) {
      out.null_lambda_max[k][t] = spectrum(threshold_gram(Gn, nc.n, taus[k])).lambda_max;
    }
  }
  for (int t = 0; t < trials; ++t) {
    SpikedModelConfig sc = spiked_cfg;
    sc.seed = derive_seed(spiked_cfg.seed, std::uint64_t(t));
    const Eigen::MatrixXd Gs = lower_gram(sample_spiked_data(sc).X);
    for (std::size_t k = 0; k < T; ++k) {
      out.spiked_lambda_max[k][t] = spectrum(threshold_gram(Gs, sc.n, taus[k])).lambda_max;
    }
  }

  const double gamma = double(null_cfg.p) / double(null_cfg.n);
  for (std::size_t k = 0; k < T; ++k) {
    double m, se;
    mean_and_se(out.null_lambda_max[k], m, se);
    out.null_mean.push_back(m);
    out.null_se.push_back(se);
    mean_and_se(out.spiked_lambda_max[k], m, se);
    out.spiked_mean.push_back(m);
    out.spiked_se.push_back(se);
    out.prediction.push_back(null_prediction(taus[k], gamma));
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "tau,null_mean,null_se,spiked_mean,spiked_se,prediction\n";
  for (std::size_t k = 0; k < r.taus.size(); ++k) {
    out += csv_row({r.taus[k], r.null_mean[k], r.null_se[k], r.spiked_mean[k], r.spiked_se[k], r.prediction[k]});
  }
  return out;
}

}  // namespace kernelrmt
