#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <string>

#include <Eigen/Core>

namespace kernelrmt {

// Orthonormal h_d has leading coefficient 1/sqrt(d!); the monic variant is
// sqrt(d!) h_d. Both orthogonal under the standard normal weight.
enum class HermiteVariant { orthonormal, monic };

template <std::floating_point Scalar>
Scalar hermite_eval(int d, Scalar x, HermiteVariant variant = HermiteVariant::orthonormal) {
  if (d <= 0) return Scalar(1);
  Scalar prev(1);
  Scalar cur = x;
  if (variant == HermiteVariant::monic) {
    // h~_{k+1} = x h~_k - k h~_{k-1}
    for (int k = 1; k < d; ++k) {
      Scalar next = x * cur - Scalar(k) * prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }
  // Same recurrence divided through by sqrt((k+1)!) so nothing overflows.
  for (int k = 1; k < d; ++k) {
    Scalar next = (x * cur - std::sqrt(Scalar(k)) * prev) / std::sqrt(Scalar(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

// Coefficient-wise evaluation over an Eigen array expression.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> hermite_eval(
    int d, const Eigen::ArrayBase<Derived>& x,
    HermiteVariant variant = HermiteVariant::orthonormal) {
  using Scalar = typename Derived::Scalar;
  return x.derived().unaryExpr([=](Scalar v) { return hermite_eval(d, v, variant); });
}

// All of h_0(x), ..., h_D(x) in one recurrence sweep.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> hermite_all(
    int max_degree, Scalar x, HermiteVariant variant = HermiteVariant::orthonormal) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h(max_degree + 1);
  h(0) = Scalar(1);
  if (max_degree >= 1) h(1) = x;
  for (int k = 1; k < max_degree; ++k) {
    if (variant == HermiteVariant::monic) {
      h(k + 1) = x * h(k) - Scalar(k) * h(k - 1);
    } else {
      h(k + 1) = (x * h(k) - std::sqrt(Scalar(k)) * h(k - 1)) / std::sqrt(Scalar(k + 1));
    }
  }
  return h;
}

struct HermiteBasis {
  int max_degree = 1;

  double operator()(int d, double x, HermiteVariant v = HermiteVariant::orthonormal) const {
    return hermite_eval(d, x, v);
  }
  Eigen::VectorXd all(double x, HermiteVariant v = HermiteVariant::orthonormal) const {
    return hermite_all(max_degree, x, v);
  }
};

// Gauss quadrature against the standard normal density: sum(weights) == 1 and
// the rule is exact on polynomials of degree <= 2*order - 1.
struct GaussHermiteRule {
  int order = 0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  template <typename F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) acc += weights(i) * f(nodes(i));
    return acc;
  }
};

inline constexpr int kDefaultQuadratureOrder = 200;
inline constexpr int kDefaultTruncationDegree = 30;

// Throws SizeError when `order` is past the point where the Christoffel weights
// can be computed in double precision.
GaussHermiteRule build_quadrature(int order = kDefaultQuadratureOrder);

enum class KernelParity { odd, general };

struct KernelSpec {
  std::function<double(double)> evaluator;
  KernelParity declared_parity = KernelParity::general;
  std::string growth_note;
  std::string name;

  double operator()(double x) const { return evaluator(x); }
  bool is_odd() const { return declared_parity == KernelParity::odd; }
};

// Builds a KernelSpec and checks a declared odd parity on a grid over [-10, 10].
KernelSpec make_kernel(std::function<double(double)> evaluator, KernelParity parity,
                       std::string name, std::string growth_note = {});

struct KernelExpansion {
  Eigen::VectorXd coefficients;  // a_0 .. a_D; a_0 is zero after the mean check
  double a = 0.0;                // a_1
  double nu = 0.0;               // sum_{d=1}^D a_d^2
  double a2 = 0.0;
  int degree = 0;
  double measured_a0 = 0.0;      // E[k(xi)] before any centering
  double second_moment = 0.0;    // E[(k - a_0)^2] by quadrature
  double truncation_residual = 0.0;  // second_moment - nu

  double coefficient(int d) const {
    return d >= 0 && d < coefficients.size() ? coefficients(d) : 0.0;
  }
};

struct ProjectionOptions {
  bool center = false;
  double mean_tolerance = 1e-8;
};

// Requires rule.order >= 2*degree + 4.
KernelExpansion project_kernel(const KernelSpec& k, int degree, const GaussHermiteRule& rule,
                               const ProjectionOptions& options = {});

struct KernelMoments {
  double a = 0.0;   // E[xi k(xi)]
  double nu = 0.0;  // E[k(xi)^2]
};

KernelMoments kernel_moments(const KernelSpec& k, const GaussHermiteRule& rule,
                             const ProjectionOptions& options = {});

}  // namespace kernelrmt
