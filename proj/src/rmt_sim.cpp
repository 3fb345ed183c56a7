#include "kernelrmt/rmt_sim.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "kernelrmt/rng.hpp"

namespace kernelrmt {

Eigen::MatrixXd sample_data(const DataMatrixConfig& cfg) {
  if (cfg.n < 2 || cfg.p < 2) throw ConfigError("data matrix needs n >= 2 and p >= 2");
  Rng rng = make_rng(cfg.seed, 0);
  auto draw = cfg.law.sampler();
  Eigen::MatrixXd X(cfg.p, cfg.n);
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = draw(rng);
  return X;
}

Eigen::MatrixXd build_component_matrix(const Eigen::MatrixXd& X, int d, double a_d) {
  if (d < 1) throw ConfigError("component degree must be >= 1");
  return build_kernel_matrix(X, [d, a_d](double x) { return a_d * hermite_eval(d, x); });
}

SpectrumSummary summarize_eigenvalues(Eigen::VectorXd eigenvalues) {
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<double>());
  SpectrumSummary s;
  s.eigenvalues = std::move(eigenvalues);
  if (s.eigenvalues.size() > 0) {
    s.lambda_max = s.eigenvalues(0);
    s.lambda_min = s.eigenvalues(s.eigenvalues.size() - 1);
    s.spectral_norm = std::max(std::abs(s.lambda_max), std::abs(s.lambda_min));
  }
  return s;
}

double SpectrumSummary::esd_cdf(double x) const {
  if (eigenvalues.size() == 0) return 0.0;
  // eigenvalues are descending: count those <= x from the tail
  auto first_le = std::lower_bound(eigenvalues.begin(), eigenvalues.end(), x, std::greater<double>());
  long below_or_equal = std::distance(first_le, eigenvalues.end());
  return double(below_or_equal) / double(eigenvalues.size());
}

int SpectrumSummary::count_outside(double lo, double hi) const {
  int count = 0;
  for (double v : eigenvalues) count += (v < lo || v > hi) ? 1 : 0;
  return count;
}

double ks_distance(const SpectrumSummary& s, const SpectralLaw& law) {
  const Eigen::Index p = s.size();
  if (p == 0) throw ConfigError("KS distance needs at least one eigenvalue");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    double x = s.eigenvalues(p - 1 - i);  // ascending order
    double F = law.cdf(x);
    worst = std::max({worst, std::abs(F - double(i) / p), std::abs(double(i + 1) / p - F)});
  }
  return worst;
}

double ks_distance(const SpectrumSummary& s, const LimitLawParams& p) {
  return ks_distance(s, SpectralLaw(p));
}

Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& z, int d, bool compensated) {
  if (d < 0) throw ConfigError("symmetric polynomial degree must be >= 0");
  Eigen::VectorXd hi = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(d + 1);
  hi(0) = 1.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double x = z(j);
    for (int k = d; k >= 1; --k) {
      if (!compensated) {
        hi(k) += x * hi(k - 1);
        continue;
      }
      // TwoProduct via fma, TwoSum, then fold both errors into lo.
      const double prod = x * hi(k - 1);
      const double prod_err = std::fma(x, hi(k - 1), -prod) + x * lo(k - 1);
      const double sum = hi(k) + prod;
      const double bp = sum - hi(k);
      const double sum_err = (hi(k) - (sum - bp)) + (prod - bp);
      hi(k) = sum;
      lo(k) += sum_err + prod_err;
    }
  }
  return hi + lo;
}

HermiteSumDecomposition decompose_hermite_sum(const Eigen::VectorXd& z, int d) {
  if (d < 1) throw ConfigError("decomposition degree must be >= 1");
  const Eigen::Index n = z.size();
  if (n < d) {
    throw SizeError("decomposition needs n >= d (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
  }
  const bool compensated = n >= 10000 && d >= 5;
  const double dn = double(n);
  // sqrt(d! / n^d)
  const double scale = std::exp(0.5 * (std::lgamma(d + 1.0) - d * std::log(dn)));
  const Eigen::VectorXd e = elementary_symmetric(z, d, compensated);

  HermiteSumDecomposition out;
  out.d = d;
  out.h_value = hermite_eval(d, z.sum() / std::sqrt(dn));
  out.q = scale * e(d);
  if (d >= 2) {
    // e_k(z without j) = e_k - z_j e_{k-1}(z without j)
    double acc = 0.0, carry = 0.0;
    Eigen::VectorXd loo(d - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      loo(0) = 1.0;
      for (int k = 1; k <= d - 2; ++k) loo(k) = e(k) - z(j) * loo(k - 1);
      double term = (z(j) * z(j) - 1.0) * loo(d - 2) - carry;
      double t = acc + term;
      carry = (t - acc) - term;
      acc = t;
    }
    out.r = 0.5 * scale * acc;
  }
  // d = 1, 2: h_d(S) = q + r is an algebraic identity.
  out.s = d <= 2 ? 0.0 : out.h_value - out.q - out.r;
  return out;
}

HermiteSumDecomposition brute_force_decomposition(const Eigen::VectorXd& z, int d) {
  const int n = int(z.size());
  if (d < 1) throw ConfigError("decomposition degree must be >= 1");
  if (n < d) throw SizeError("decomposition needs n >= d");
  if (n > kBruteForceMaxN) {
    throw SizeError("brute-force decomposition capped at n <= " + std::to_string(kBruteForceMaxN));
  }
  // sum over ordered distinct tuples of length len; the first index may carry z^2 - 1
  std::vector<int> idx(d);
  std::vector<char> used(n, 0);
  auto tuple_sum = [&](int len, bool squared_first) {
    double acc = 0.0;
    auto rec = [&](auto&& self, int pos) -> void {
      if (pos == len) {
        double prod = squared_first ? z(idx[0]) * z(idx[0]) - 1.0 : z(idx[0]);
        for (int k = 1; k < len; ++k) prod *= z(idx[k]);
        acc += prod;
        return;
      }
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        used[j] = 1;
        idx[pos] = j;
        self(self, pos + 1);
        used[j] = 0;
      }
    };
    rec(rec, 0);
    return acc;
  };
  const double norm = 1.0 / std::sqrt(std::pow(double(n), d) * std::tgamma(d + 1.0));
  HermiteSumDecomposition out;
  out.d = d;
  out.h_value = hermite_eval(d, z.sum() / std::sqrt(double(n)));
  out.q = norm * tuple_sum(d, false);
  if (d >= 2) out.r = norm * (d * (d - 1) / 2.0) * tuple_sum(d - 1, true);
  out.s = d <= 2 ? 0.0 : out.h_value - out.q - out.r;
  return out;
}

std::vector<ScalingRow> decomposition_scaling(const std::vector<int>& degrees, const std::vector<int>& ns,
                                              int trials, std::uint64_t seed) {
  if (degrees.empty() || ns.size() < 2) throw ConfigError("scaling needs degrees and at least two n values");
  if (trials < 1) throw ConfigError("scaling needs trials >= 1");
  std::vector<ScalingRow> rows;
  for (std::size_t a = 0; a < degrees.size(); ++a) {
    ScalingRow row;
    row.d = degrees[a];
    row.ns = ns;
    for (std::size_t b = 0; b < ns.size(); ++b) {
      Rng rng = make_rng(seed, a * 1000 + b);
      std::normal_distribution<double> g;
      std::vector<double> abs_s(trials);
      Eigen::VectorXd z(ns[b]);
      for (int t = 0; t < trials; ++t) {
        for (auto& v : z) v = g(rng);
        for (auto& v : z) v *= g(rng);
        abs_s[t] = std::abs(decompose_hermite_sum(z, row.d).s);
      }
      std::nth_element(abs_s.begin(), abs_s.begin() + trials / 2, abs_s.end());
      double med = abs_s[trials / 2];
      if (trials % 2 == 0) med = 0.5 * (med + *std::max_element(abs_s.begin(), abs_s.begin() + trials / 2));
      row.median_abs_s.push_back(med);
    }
    const bool vanishes = std::all_of(row.median_abs_s.begin(), row.median_abs_s.end(),
                                      [](double m) { return m == 0.0; });
    if (vanishes) {
      row.slope = -std::numeric_limits<double>::infinity();
    } else {
      double mx = 0.0, my = 0.0;
      const double k = double(ns.size());
      for (std::size_t b = 0; b < ns.size(); ++b) {
        mx += std::log(double(ns[b])) / k;
        my += std::log(row.median_abs_s[b]) / k;
      }
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t b = 0; b < ns.size(); ++b) {
        const double dx = std::log(double(ns[b])) - mx;
        sxy += dx * (std::log(row.median_abs_s[b]) - my);
        sxx += dx * dx;
      }
      row.slope = sxy / sxx;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Eigen::VectorXd squared_row_excess(const Eigen::MatrixXd& X) {
  const double n = double(X.cols());
  return (X.array().square() - 1.0).rowwise().sum().matrix() / std::sqrt(n);
}

}  // namespace

SpikePrediction rank_two_correction(const Eigen::MatrixXd& X, double a2, double fourth_moment) {
  SpikePrediction out;
  if (a2 == 0.0) return out;
  const double n = double(X.cols());
  const double p = double(X.rows());
  const Eigen::VectorXd v = squared_row_excess(X);
  const double s1 = v.sum();
  const double s2 = v.squaredNorm();
  // Roots of lambda^2 - B lambda + C with B = a2 sqrt2 s1 / n and
  // C = a2^2 (s1^2 - p s2) / (2 n^2); the discriminant is 2 a2^2 p s2 / n^2.
  const double B = a2 * std::sqrt(2.0) * s1 / n;
  const double C = a2 * a2 * (s1 * s1 - p * s2) / (2.0 * n * n);
  const double disc = std::sqrt(std::max(0.0, B * B - 4.0 * C));
  // Cancellation-free pairing for the smaller root.
  const double big = 0.5 * (B + (B >= 0.0 ? disc : -disc));
  const double small = big != 0.0 ? C / big : 0.0;
  out.empirical = {std::max(big, small), std::min(big, small)};
  const double loc = a2 * (p / n) * std::sqrt(std::max(0.0, (fourth_moment - 1.0) / 2.0));
  out.locations = {std::abs(loc), -std::abs(loc)};
  return out;
}

Eigen::MatrixXd rank_two_matrix(const Eigen::MatrixXd& X, double a2) {
  const double n = double(X.cols());
  const Eigen::VectorXd v = squared_row_excess(X);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(X.rows());
  return (a2 / (n * std::sqrt(2.0))) * (v * one.transpose() + one * v.transpose());
}

DeformedModelSample sample_deformed_model(int p_tilde, int n_tilde, const LimitLawParams& params,
                                          std::uint64_t seed) {
  if (p_tilde < 1 || n_tilde < 1) throw ConfigError("deformed model needs p_tilde, n_tilde >= 1");
  if (params.nu < params.a * params.a) {
    std::ostringstream os;
    os << "deformed model needs nu >= a^2 (got a=" << params.a << ", nu=" << params.nu << ")";
    throw ConfigError(os.str());
  }
  if (!(params.gamma > 0.0)) throw ConfigError("deformed model needs gamma > 0");
  detail::check_kernel_dimension(p_tilde);

  DeformedModelSample out;
  Rng wrng = make_rng(seed, 0);
  Rng zrng = make_rng(seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double half = std::sqrt(0.5);
  out.W.resize(p_tilde, p_tilde);
  for (int j = 0; j < p_tilde; ++j) {
    out.W(j, j) = std::complex<double>(normal(wrng), 0.0);
    for (int i = j + 1; i < p_tilde; ++i) {
      double re = half * normal(wrng);
      double im = half * normal(wrng);
      out.W(i, j) = {re, im};
      out.W(j, i) = {re, -im};
    }
  }
  out.Z.resize(p_tilde, n_tilde);
  std::normal_distribution<double> znormal(0.0, 1.0);
  for (int j = 0; j < n_tilde; ++j)
    for (int i = 0; i < p_tilde; ++i) out.Z(i, j) = znormal(zrng);
  out.V = Eigen::MatrixXd::Zero(p_tilde, p_tilde);
  out.V.selfadjointView<Eigen::Lower>().rankUpdate(out.Z);
  for (int j = 0; j < p_tilde; ++j)
    for (int i = j + 1; i < p_tilde; ++i) out.V(j, i) = out.V(i, j);
  out.V.diagonal().setZero();

  const double w_scale = std::sqrt(params.gamma * std::max(0.0, params.nu - params.a * params.a) / p_tilde);
  out.M = w_scale * out.W + (params.a / n_tilde) * out.V.cast<std::complex<double>>();
  return out;
}

ConcentrationTable concentration_probe(const KernelSpec& k, const std::vector<double>& ratios, int n,
                                       int trials, std::uint64_t seed) {
  if (!k.is_odd()) throw ConfigError("concentration probe requires an odd kernel (got '" + k.name + "')");
  if (ratios.empty()) throw ConfigError("concentration probe needs at least one aspect ratio");
  if (trials < 1) throw ConfigError("concentration probe needs trials >= 1");
  ConcentrationTable table;
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    ConcentrationRow row;
    row.ratio = ratios[r];
    row.n = n;
    row.p = std::max(2, int(std::lround(ratios[r] * n)));
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      DataMatrixConfig cfg{n, row.p, EntryLaw::gaussian(), derive_seed(seed, r * 1000003ULL + t)};
      Eigen::MatrixXd X = sample_data(cfg);
      acc += spectrum(build_kernel_matrix(X, k)).spectral_norm;
    }
    row.mean_norm = acc / trials;
    const double g = double(row.p) / n;
    row.statistic = row.mean_norm / std::max(g, std::sqrt(g));
    table.rows.push_back(row);
  }
  table.max_statistic = table.rows.front().statistic;
  table.min_statistic = table.rows.front().statistic;
  for (const auto& row : table.rows) {
    table.max_statistic = std::max(table.max_statistic, row.statistic);
    table.min_statistic = std::min(table.min_statistic, row.statistic);
  }
  return table;
}

}  // namespace kernelrmt
