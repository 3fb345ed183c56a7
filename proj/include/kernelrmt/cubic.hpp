#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace kernelrmt {

// c3 m^3 + c2 m^2 + c1 m + c0 evaluated by Horner's rule.
template <typename T>
std::complex<T> cubic_value(const std::complex<T>& c3, const std::complex<T>& c2,
                            const std::complex<T>& c1, const std::complex<T>& c0,
                            const std::complex<T>& m) {
  return ((c3 * m + c2) * m + c1) * m + c0;
}

namespace detail {

template <typename T>
std::vector<std::complex<T>> quadratic_roots(const std::complex<T>& a, const std::complex<T>& b,
                                             const std::complex<T>& c) {
  using C = std::complex<T>;
  if (a == C(0)) {
    if (b == C(0)) return {};
    return {-c / b};
  }
  // Cancellation-free form: q = -(b + sign * sqrt(b^2 - 4ac)) / 2.
  C disc = std::sqrt(b * b - T(4) * a * c);
  if (std::real(std::conj(b) * disc) < T(0)) disc = -disc;
  C q = -(b + disc) / T(2);
  if (q == C(0)) return {C(0), C(0)};
  return {q / a, c / q};
}

template <typename T>
void newton_polish(const std::complex<T>& c3, const std::complex<T>& c2, const std::complex<T>& c1,
                   const std::complex<T>& c0, std::complex<T>& m, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    std::complex<T> f = cubic_value(c3, c2, c1, c0, m);
    std::complex<T> df = (T(3) * c3 * m + T(2) * c2) * m + c1;
    if (std::abs(df) == T(0)) return;
    std::complex<T> step = f / df;
    std::complex<T> next = m - step;
    if (std::abs(cubic_value(c3, c2, c1, c0, next)) >= std::abs(f)) return;
    m = next;
  }
}

}  // namespace detail

// Roots of c3 m^3 + c2 m^2 + c1 m + c0 with complex coefficients. Cardano's
// formula on the depressed monic cubic, followed by a few Newton steps on the
// original polynomial. The degree drops when leading coefficients vanish; a
// leading coefficient that is tiny relative to the rest is handled by deflating
// the root that runs off to infinity.
template <typename T>
std::vector<std::complex<T>> cubic_roots(const std::complex<T>& c3, const std::complex<T>& c2,
                                         const std::complex<T>& c1, const std::complex<T>& c0) {
  using C = std::complex<T>;
  std::vector<C> roots;
  const T scale = std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
  if (c3 == C(0)) {
    roots = detail::quadratic_roots(c2, c1, c0);
  } else if (std::abs(c3) < T(1e-9) * scale) {
    roots = detail::quadratic_roots(c2, c1, c0);
    C sum = C(0);
    for (const C& r : roots) sum += r;
    roots.push_back(-c2 / c3 - sum);
  } else {
    const C A = c2 / c3;
    const C B = c1 / c3;
    const C Cc = c0 / c3;
    const C p = B - A * A / T(3);
    const C q = T(2) * A * A * A / T(27) - A * B / T(3) + Cc;
    C s = std::sqrt(q * q / T(4) + p * p * p / T(27));
    C u3a = -q / T(2) + s;
    C u3b = -q / T(2) - s;
    C u3 = std::abs(u3a) >= std::abs(u3b) ? u3a : u3b;
    const C omega(T(-0.5), std::sqrt(T(3)) / T(2));
    if (std::abs(u3) == T(0)) {
      // p == q == 0: triple root at -A/3
      roots = {-A / T(3), -A / T(3), -A / T(3)};
    } else {
      C u = std::pow(u3, T(1) / T(3));
      for (int k = 0; k < 3; ++k) {
        C uk = u;
        if (k == 1) uk = u * omega;
        if (k == 2) uk = u * std::conj(omega);
        C vk = -p / (T(3) * uk);
        roots.push_back(uk + vk - A / T(3));
      }
    }
  }
  for (C& r : roots) detail::newton_polish(c3, c2, c1, c0, r, 4);
  return roots;
}

}  // namespace kernelrmt
