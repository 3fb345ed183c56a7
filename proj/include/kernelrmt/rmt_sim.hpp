#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "kernelrmt/entry_law.hpp"
#include "kernelrmt/errors.hpp"
#include "kernelrmt/hermite.hpp"
#include "kernelrmt/limit_law.hpp"

namespace kernelrmt {

inline constexpr Eigen::Index kMaxKernelDimension = 12000;

struct DataMatrixConfig {
  int n = 2;
  int p = 2;
  EntryLaw law = EntryLaw::gaussian();
  std::uint64_t seed = 0;
};

// p x n matrix, filled column by column from one stream derived from the seed.
Eigen::MatrixXd sample_data(const DataMatrixConfig& cfg);

namespace detail {

inline void check_kernel_dimension(Eigen::Index p) {
  if (p > kMaxKernelDimension) {
    throw SizeError("kernel matrix dimension " + std::to_string(p) + " exceeds cap " +
                    std::to_string(kMaxKernelDimension));
  }
}

// Entrywise k(sqrt(n) S_ii') / sqrt(n) with S = X X^T / n, computed from the
// lower triangle of the Gram matrix and mirrored.
template <typename Derived, typename Kernel>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_map(
    const Eigen::MatrixBase<Derived>& X, Kernel&& k, bool include_diagonal) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index p = X.rows();
  check_kernel_dimension(p);
  const Scalar root_n = std::sqrt(Scalar(X.cols()));
  Mat G = Mat::Zero(p, p);
  G.template selfadjointView<Eigen::Lower>().rankUpdate(X.derived());
  for (Eigen::Index j = 0; j < p; ++j) {
    G(j, j) = include_diagonal ? Scalar(k(G(j, j) / root_n)) / root_n : Scalar(0);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      G(i, j) = Scalar(k(G(i, j) / root_n)) / root_n;
      G(j, i) = G(i, j);
    }
  }
  return G;
}

}  // namespace detail

// K_ii' = k(sqrt(n) S_ii') / sqrt(n) off the diagonal, 0 on it. `k` is any
// callable double -> double, including KernelSpec.
template <typename Derived, typename Kernel>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> build_kernel_matrix(
    const Eigen::MatrixBase<Derived>& X, Kernel&& k) {
  return detail::kernel_map(X, std::forward<Kernel>(k), false);
}

// Kernel matrix of the single component a_d h_d.
Eigen::MatrixXd build_component_matrix(const Eigen::MatrixXd& X, int d, double a_d);

struct SpectrumSummary {
  Eigen::VectorXd eigenvalues;  // descending
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double spectral_norm = 0.0;

  Eigen::Index size() const { return eigenvalues.size(); }
  // Fraction of eigenvalues <= x.
  double esd_cdf(double x) const;
  // Number of eigenvalues strictly outside [lo, hi].
  int count_outside(double lo, double hi) const;
};

SpectrumSummary summarize_eigenvalues(Eigen::VectorXd eigenvalues);

inline constexpr double kSymmetryTolerance = 1e-10;

// Full self-adjoint eigendecomposition (eigenvalues only) of a real symmetric
// or complex Hermitian matrix.
template <typename Derived>
SpectrumSummary spectrum(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) throw ShapeError("spectrum needs a square matrix");
  if (!m.allFinite()) throw ShapeError("spectrum needs finite entries");
  const Real scale = std::max(Real(1), m.cwiseAbs().maxCoeff());
  const Real asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > Real(kSymmetryTolerance) * scale) {
    throw ShapeError("matrix is not symmetric/Hermitian (max asymmetry " + std::to_string(double(asym)) +
                     ")");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InternalError("eigensolver did not converge");
  Eigen::VectorXd ev = solver.eigenvalues().template cast<double>();
  return summarize_eigenvalues(ev.reverse().eval());
}

// Kolmogorov-Smirnov distance between the ESD and the limit law.
double ks_distance(const SpectrumSummary& s, const SpectralLaw& law);
double ks_distance(const SpectrumSummary& s, const LimitLawParams& p);

// e_0(z), ..., e_d(z). The compensated variant carries a running error term
// for every e_k.
Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& z, int d, bool compensated = false);

struct HermiteSumDecomposition {
  int d = 1;
  double q = 0.0;
  double r = 0.0;
  double s = 0.0;
  double h_value = 0.0;  // h_d(sum(z) / sqrt(n))
};

// Splits h_d(n^{-1/2} sum z) into the distinct-index part q, the single
// squared-index part r and the remainder s. For d <= 2 the split is exact and
// s is returned as 0.
HermiteSumDecomposition decompose_hermite_sum(const Eigen::VectorXd& z, int d);

// q and r by explicit sums over ordered tuples of distinct indices; n <= 12.
inline constexpr int kBruteForceMaxN = 12;
HermiteSumDecomposition brute_force_decomposition(const Eigen::VectorXd& z, int d);

struct ScalingRow {
  int d = 0;
  std::vector<int> ns;
  std::vector<double> median_abs_s;
  double slope = 0.0;  // least-squares slope of log median |s| in log n; -inf if all medians vanish
};

// Median |s_{d,n}| over trials with z_j = x_j y_j, x, y independent standard
// Gaussian vectors.
std::vector<ScalingRow> decomposition_scaling(const std::vector<int>& degrees, const std::vector<int>& ns,
                                              int trials, std::uint64_t seed);

struct SpikePrediction {
  // Empty when a2 = 0 (the correction vanishes).
  std::vector<double> locations;  // +- a2 gamma sqrt((E x^4 - 1) / 2)
  std::vector<double> empirical;  // nonzero eigenvalues of the rank-two matrix, descending
};

SpikePrediction rank_two_correction(const Eigen::MatrixXd& X, double a2, double fourth_moment);
// (a2 / (n sqrt 2)) (v 1^T + 1 v^T) with v_i = sum_j (x_ij^2 - 1) / sqrt(n).
Eigen::MatrixXd rank_two_matrix(const Eigen::MatrixXd& X, double a2);

struct DeformedModelSample {
  Eigen::MatrixXcd W;
  Eigen::MatrixXd Z;
  Eigen::MatrixXd V;
  Eigen::MatrixXcd M;
};

// GUE plus zero-diagonal Wishart combination sharing the limit law. Requires
// nu >= a^2; p_tilde / n_tilde should match params.gamma.
DeformedModelSample sample_deformed_model(int p_tilde, int n_tilde, const LimitLawParams& params,
                                          std::uint64_t seed);

struct ConcentrationRow {
  double ratio = 0.0;
  int p = 0;
  int n = 0;
  double mean_norm = 0.0;
  double statistic = 0.0;  // mean_norm / max(p/n, sqrt(p/n))
};

struct ConcentrationTable {
  std::vector<ConcentrationRow> rows;
  double max_statistic = 0.0;
  double min_statistic = 0.0;
  double spread() const { return min_statistic > 0.0 ? max_statistic / min_statistic : INFINITY; }
};

// Requires an odd kernel (ConfigError otherwise).
ConcentrationTable concentration_probe(const KernelSpec& k, const std::vector<double>& ratios, int n,
                                       int trials, std::uint64_t seed);

}  // namespace kernelrmt
