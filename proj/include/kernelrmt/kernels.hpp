#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kernelrmt/hermite.hpp"

namespace kernelrmt {

inline constexpr int kMaxRegistryDegree = 30;

struct ParsedKernel {
  KernelSpec spec;
  // a_0..a_D when the kernel is a finite Hermite sum, empty otherwise.
  std::vector<double> hermite_coefficients;

  bool is_hermite_sum() const { return !hermite_coefficients.empty(); }
};

// Built-in kernels:
//   hN                      orthonormal Hermite polynomial, 1 <= N <= 30
//   2*h1 - 0.5*h3 + h2      linear combinations of the above
//   soft_threshold(2)       also "soft_threshold tau=2" and "soft_threshold(tau=2)"
//   odd_poly(c1, c3, ...)   c1 x + c3 x^3 + ...
// Malformed names throw ConfigError with the offending text.
ParsedKernel parse_kernel(std::string_view text);

// Names accepted by parse_kernel, for help text.
std::vector<std::string> registry_examples();

}  // namespace kernelrmt
