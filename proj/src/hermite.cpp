#include "kernelrmt/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kernelrmt/errors.hpp"

namespace kernelrmt {

namespace {

constexpr int kMaxQuadratureOrder = 1000;

// h_N(x) and h_N'(x) = sqrt(N) h_{N-1}(x), orthonormal normalization.
std::pair<double, double> hermite_with_derivative(int order, double x) {
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < order; ++k) {
    double next = (x * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
    prev = cur;
    cur = next;
  }
  return {cur, std::sqrt(double(order)) * prev};
}

}  // namespace

GaussHermiteRule build_quadrature(int order) {
  if (order < 1) throw ConfigError("quadrature order must be >= 1");
  if (order > kMaxQuadratureOrder) {
    throw SizeError("quadrature order " + std::to_string(order) + " exceeds cap " +
                    std::to_string(kMaxQuadratureOrder));
  }

  GaussHermiteRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  if (order == 1) {
    rule.nodes(0) = 0.0;
    rule.weights(0) = 1.0;
    return rule;
  }

  // Golub-Welsch: the Jacobi matrix of the probabilists' recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw InternalError("tridiagonal eigensolver failed while building quadrature");
  }
  Eigen::VectorXd x = solver.eigenvalues();

  // Newton polish, then enforce exact symmetry about 0.
  for (int i = 0; i < order; ++i) {
    for (int it = 0; it < 3; ++it) {
      auto [h, dh] = hermite_with_derivative(order, x(i));
      if (dh == 0.0 || !std::isfinite(h) || !std::isfinite(dh)) break;
      x(i) -= h / dh;
    }
  }
  for (int i = 0; i < order / 2; ++i) {
    double m = 0.5 * (x(order - 1 - i) - x(i));
    x(i) = -m;
    x(order - 1 - i) = m;
  }
  if (order % 2 == 1) x(order / 2) = 0.0;

  // Christoffel numbers 1 / sum_k h_k(x)^2 keep full relative accuracy in the
  // tails, where eigenvector-based weights lose everything.
  for (int i = 0; i < order; ++i) {
    double prev = 1.0;
    double cur = x(i);
    double sum = 1.0 + cur * cur;
    for (int k = 1; k < order - 1; ++k) {
      double next = (x(i) * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    if (!std::isfinite(sum) || sum <= 0.0) {
      throw SizeError("quadrature order " + std::to_string(order) +
                      " is too large for a stable double-precision construction");
    }
    rule.weights(i) = 1.0 / sum;
  }
  rule.nodes = x;

  double total = rule.weights.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "quadrature weights sum to " << total << " at order " << order;
    throw SizeError(os.str());
  }
  return rule;
}

KernelSpec make_kernel(std::function<double(double)> evaluator, KernelParity parity,
                       std::string name, std::string growth_note) {
  if (!evaluator) throw ConfigError("kernel '" + name + "' has no evaluator");
  KernelSpec spec{std::move(evaluator), parity, std::move(growth_note), std::move(name)};
  if (parity == KernelParity::odd) {
    for (int i = 0; i <= 200; ++i) {
      double x = -10.0 + 0.1 * i;
      double fp = spec(x);
      double fm = spec(-x);
      if (std::abs(fp + fm) > 1e-12 * std::max(1.0, std::abs(fp))) {
        std::ostringstream os;
        os << "kernel '" << spec.name << "' declared odd but k(" << x << ")=" << fp
           << ", k(" << -x << ")=" << fm;
        throw ConfigError(os.str());
      }
    }
  }
  return spec;
}

namespace {

double measured_mean(const KernelSpec& k, const GaussHermiteRule& rule,
                     const ProjectionOptions& options) {
  double a0 = rule.integrate([&](double x) { return k(x); });
  if (std::abs(a0) > options.mean_tolerance && !options.center) {
    std::ostringstream os;
    os << "kernel '" << k.name << "' has E[k(xi)] = " << a0 << " (tolerance "
       << options.mean_tolerance << "); enable centering to subtract it";
    throw MeanNotZeroError(os.str(), a0);
  }
  return a0;
}

}  // namespace

KernelExpansion project_kernel(const KernelSpec& k, int degree, const GaussHermiteRule& rule,
                               const ProjectionOptions& options) {
  if (degree < 1) throw ConfigError("truncation degree must be >= 1");
  if (rule.order < 2 * degree + 4) {
    throw ConfigError("quadrature order " + std::to_string(rule.order) +
                      " too small for degree " + std::to_string(degree) +
                      " (need >= 2*degree + 4)");
  }
  const double a0 = measured_mean(k, rule, options);

  KernelExpansion out;
  out.degree = degree;
  out.measured_a0 = a0;
  out.coefficients = Eigen::VectorXd::Zero(degree + 1);
  double second = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes(i);
    const double w = rule.weights(i);
    const double kx = k(x) - a0;
    second += w * kx * kx;
    Eigen::VectorXd h = hermite_all(degree, x);
    out.coefficients.tail(degree) += (w * kx) * h.tail(degree);
  }
  out.coefficients(0) = 0.0;
  out.a = out.coefficients(1);
  out.a2 = degree >= 2 ? out.coefficients(2) : 0.0;
  out.nu = out.coefficients.tail(degree).squaredNorm();
  out.second_moment = second;
  out.truncation_residual = second - out.nu;
  return out;
}

KernelMoments kernel_moments(const KernelSpec& k, const GaussHermiteRule& rule,
                             const ProjectionOptions& options) {
  const double a0 = measured_mean(k, rule, options);
  KernelMoments m;
  m.a = rule.integrate([&](double x) { return x * k(x); });
  m.nu = rule.integrate([&](double x) {
    double v = k(x) - a0;
    return v * v;
  });
  return m;
}

}  // namespace kernelrmt
