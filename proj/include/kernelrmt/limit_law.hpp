#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace kernelrmt {

using Complex = std::complex<double>;

// Parameters of the limiting law: a = E[xi k(xi)], nu = E[k(xi)^2], gamma = p/n.
struct LimitLawParams {
  double a = 0.0;
  double nu = 1.0;
  double gamma = 1.0;

  // Throws ConfigError unless gamma > 0 and nu >= a^2 (up to rounding).
  void validate() const;
  // gamma (nu - a^2), the semicircle variance; clamped at 0.
  double semicircle_variance() const;
  // No semicircle part and gamma > 1: an atom of mass 1 - 1/gamma sits at -a.
  bool is_mp_atom_case() const;
  LimitLawParams reflected() const { return {-a, nu, gamma}; }
};

// Coefficients (c3, c2, c1, c0) of the cubic in m obtained by clearing the
// denominators of the fixed-point equation at spectral parameter z.
std::array<Complex, 4> stieltjes_cubic(const Complex& z, const LimitLawParams& p);

struct StieltjesSolution {
  Complex z;
  Complex m;
  double residual = 0.0;  // |cubic(m)|
};

// Requires Im z > 0 (DomainError otherwise).
StieltjesSolution stieltjes(const Complex& z, const LimitLawParams& p);

struct SupportIntervals {
  std::vector<std::pair<double, double>> intervals;
  double norm = 0.0;
  double max_edge = 0.0;
  double min_edge = 0.0;
  // Set only in the Marcenko-Pastur atom case; the atom is also listed as a
  // degenerate interval.
  std::optional<double> atom_location;
  double atom_mass = 0.0;
};

SupportIntervals support(const LimitLawParams& p);

// Sign of this discriminant decides the support: negative means a complex
// pair of roots at real z = x.
double support_discriminant(double x, const LimitLawParams& p);

struct DensityGrid {
  Eigen::VectorXd xs;
  Eigen::VectorXd density;
  double epsilon = 0.0;
  double atom_mass = 0.0;  // not represented in `density`

  // Trapezoid rule over xs (which need not be uniform).
  double integral() const;
};

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr int kDefaultDensityPoints = 2001;

// Im m(x + i eps) / pi on the given grid. With `richardson`, 2 D(eps) - D(2 eps).
DensityGrid density(const LimitLawParams& p, const Eigen::VectorXd& xs,
                    double epsilon = kDefaultEpsilon, bool richardson = false);
// Default grid: edge-clustered points over each support interval plus margins.
DensityGrid density(const LimitLawParams& p, double epsilon = kDefaultEpsilon,
                    bool richardson = false);
Eigen::VectorXd default_density_grid(const LimitLawParams& p,
                                     int points = kDefaultDensityPoints);

// Density on the real axis from the complex root pair of the real cubic; 0
// outside the support.
double boundary_density(double x, const LimitLawParams& p);

// Pole at z = 1/(a gamma) raises DomainError.
Complex r_transform(const Complex& z, const LimitLawParams& p);

struct CumulantSequence {
  std::vector<double> kappas;  // kappas[0] is kappa_1

  double operator[](int l) const { return l >= 1 && l <= int(kappas.size()) ? kappas[l - 1] : 0.0; }
  int size() const { return int(kappas.size()); }
};

CumulantSequence free_cumulants(const LimitLawParams& p, int L);

// Cumulants of the two free summands: a (MP_gamma - 1) and the semicircle of
// variance gamma (nu - a^2).
std::pair<CumulantSequence, CumulantSequence> component_cumulants(const LimitLawParams& p, int L);

inline constexpr int kMaxPartitionSize = 14;

using Partition = std::vector<std::vector<int>>;  // blocks of 1-based elements

// Visits every non-crossing partition of {1..l}; blocks are sorted and listed
// in order of their smallest element. The reference is only valid inside the
// callback.
void for_each_nc_partition(int l, const std::function<void(const Partition&)>& visit);
std::vector<Partition> enumerate_nc_partitions(int l);

// Moment-cumulant formula over NC(l), Kahan-summed.
double moment(const LimitLawParams& p, int l);

bool check_sign_property(const LimitLawParams& p, double tol = 1e-8);

// Numerical distribution of the law: Gauss-Legendre in the angle variable
// x = lo + (hi - lo)(1 - cos t)/2 on each support interval, which absorbs the
// square-root edges.
class SpectralLaw {
 public:
  explicit SpectralLaw(const LimitLawParams& p, int panels = 400);

  const LimitLawParams& params() const { return params_; }
  const SupportIntervals& support() const { return support_; }

  double cdf(double x) const;
  double quantile(double u) const;
  double moment(int l) const;
  double integrate(const std::function<double(double)>& f) const;
  double continuous_mass() const { return total_mass_; }

 private:
  struct Panel {
    double lo_theta, hi_theta;  // angle range within its interval
    double x_lo, x_hi;          // image on the real axis
    int interval;
    double mass;
    double mass_before;  // continuous mass of all earlier panels
  };

  double panel_integral(const Panel& panel, double theta_hi,
                        const std::function<double(double)>& f) const;
  double theta_of(int interval, double x) const;

  LimitLawParams params_;
  SupportIntervals support_;
  std::vector<Panel> panels_;
  double total_mass_ = 0.0;
};

}  // namespace kernelrmt
