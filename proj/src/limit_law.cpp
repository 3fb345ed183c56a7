#include "kernelrmt/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kernelrmt/cubic.hpp"
#include "kernelrmt/errors.hpp"

namespace kernelrmt {

namespace {

constexpr double kPi = std::numbers::pi;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Loose bound on the support radius: |a| ||MP_gamma|| + semicircle radius.
double support_radius(const LimitLawParams& p) {
  double sg = std::sqrt(p.gamma);
  return 1.1 * (std::abs(p.a) * (1.0 + sg) * (1.0 + sg) + 2.0 * std::sqrt(p.semicircle_variance())) +
         1e-6;
}

std::vector<Complex> roots_at(const Complex& z, const LimitLawParams& p) {
  auto c = stieltjes_cubic(z, p);
  return cubic_roots(c[0], c[1], c[2], c[3]);
}

// Stieltjes transforms of probability measures satisfy |m| <= 1/Im z and
// Im m >= Im z |m|^2; spurious roots of the cubic usually violate one of them.
bool admissible(const Complex& m, const Complex& z) {
  const double y = z.imag();
  if (!(m.imag() > 0.0)) return false;
  if (std::abs(m) * y > 1.0 + 1e-6) return false;
  return m.imag() >= 0.5 * y * std::norm(m);
}

Complex closest(const std::vector<Complex>& roots, const Complex& target) {
  Complex best = roots.front();
  for (const Complex& r : roots) {
    if (std::abs(r - target) < std::abs(best - target)) best = r;
  }
  return best;
}

// Continuation from far up the imaginary axis, where m ~ -1/z is unambiguous.
Complex homotopy_root(const Complex& z, const LimitLawParams& p) {
  const double y_target = z.imag();
  const double y0 = std::max(y_target, 10.0 * (std::abs(z.real()) + support_radius(p) + 1.0));
  Complex prev = -1.0 / Complex(z.real(), y0);
  constexpr int kSteps = 80;
  for (int k = 0; k <= kSteps; ++k) {
    double y = y0 * std::pow(y_target / y0, double(k) / kSteps);
    auto roots = roots_at(Complex(z.real(), y), p);
    if (roots.empty()) break;
    prev = closest(roots, prev);
  }
  return prev;
}

const std::array<std::pair<double, double>, 8>& gauss_legendre8() {
  static const std::array<std::pair<double, double>, 8> rule = [] {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(8);
    Eigen::VectorXd sub(7);
    for (int k = 1; k < 8; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    std::array<std::pair<double, double>, 8> out{};
    for (int i = 0; i < 8; ++i) {
      double v = solver.eigenvectors()(0, i);
      out[i] = {solver.eigenvalues()(i), 2.0 * v * v};
    }
    return out;
  }();
  return rule;
}

}  // namespace

void LimitLawParams::validate() const {
  if (!std::isfinite(a) || !std::isfinite(nu) || !std::isfinite(gamma)) {
    throw ConfigError("limit law parameters must be finite");
  }
  if (!(gamma > 0.0)) {
    std::ostringstream os;
    os << "gamma must be > 0 (got " << gamma << ")";
    throw ConfigError(os.str());
  }
  if (nu < a * a - 1e-12 * std::max(1.0, a * a)) {
    std::ostringstream os;
    os << "nu must be >= a^2 (got a=" << a << ", nu=" << nu << ")";
    throw ConfigError(os.str());
  }
}

double LimitLawParams::semicircle_variance() const { return std::max(0.0, gamma * (nu - a * a)); }

bool LimitLawParams::is_mp_atom_case() const {
  return gamma > 1.0 && a != 0.0 && semicircle_variance() <= 1e-13 * std::max(1.0, nu);
}

std::array<Complex, 4> stieltjes_cubic(const Complex& z, const LimitLawParams& p) {
  const double b = p.semicircle_variance();
  const double c = p.a * p.gamma;
  return {Complex(b * c), z * c + p.a * c + b, z + c, Complex(1.0)};
}

StieltjesSolution stieltjes(const Complex& z, const LimitLawParams& p) {
  p.validate();
  if (!(z.imag() > 0.0)) {
    std::ostringstream os;
    os << "Stieltjes transform needs Im z > 0 (got z=" << z << ")";
    throw DomainError(os.str());
  }
  auto roots = roots_at(z, p);
  std::vector<Complex> good;
  for (const Complex& r : roots) {
    if (admissible(r, z)) good.push_back(r);
  }
  Complex m;
  if (good.size() == 1) {
    m = good.front();
  } else {
    m = homotopy_root(z, p);
  }
  if (!(m.imag() > 0.0)) {
    std::ostringstream os;
    os << "no root with Im m > 0 at z=" << z;
    throw InternalError(os.str());
  }
  auto c = stieltjes_cubic(z, p);
  return {z, m, std::abs(cubic_value(c[0], c[1], c[2], c[3], m))};
}

double support_discriminant(double x, const LimitLawParams& p) {
  const double b = p.semicircle_variance();
  const double c = p.a * p.gamma;
  const double A3 = b * c;
  const double A2 = (x + p.a) * c + b;
  const double A1 = x + c;
  const double A0 = 1.0;
  return 18.0 * A3 * A2 * A1 * A0 - 4.0 * A2 * A2 * A2 * A0 + A2 * A2 * A1 * A1 -
         4.0 * A3 * A1 * A1 * A1 - 27.0 * A3 * A3 * A0 * A0;
}

SupportIntervals support(const LimitLawParams& p) {
  p.validate();
  SupportIntervals out;
  const double b = p.semicircle_variance();
  if (p.a == 0.0 && b == 0.0) {
    out.intervals = {{0.0, 0.0}};
    return out;
  }

  const double R = support_radius(p);
  std::vector<double> xs;
  constexpr int kScan = 2000;
  for (int i = 0; i <= kScan; ++i) xs.push_back(-R + 2.0 * R * i / kScan);
  if (p.a != 0.0) {
    // The atom of a(MP - 1) at -a spreads into a narrow interval when the
    // semicircle part is small; the coarse scan can step over it.
    const double w = std::min(R, 0.1 * std::abs(p.a) + 10.0 * std::sqrt(b));
    for (int i = 0; i <= kScan; ++i) xs.push_back(-p.a - w + 2.0 * w * i / kScan);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  auto inside = [&](double x) { return support_discriminant(x, p) < 0.0; };
  auto refine = [&](double lo, double hi, bool lo_inside) {
    const double tol = 1e-12 * std::max(1.0, R);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      double mid = 0.5 * (lo + hi);
      if (inside(mid) == lo_inside) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  bool prev_in = inside(xs.front());
  double start = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    bool in = inside(xs[i]);
    if (in != prev_in) {
      double edge = refine(xs[i - 1], xs[i], prev_in);
      if (in) {
        start = edge;
      } else {
        out.intervals.emplace_back(start, edge);
      }
    }
    prev_in = in;
  }
  if (prev_in) out.intervals.emplace_back(start, xs.back());

  if (p.is_mp_atom_case()) {
    out.atom_location = -p.a;
    out.atom_mass = 1.0 - 1.0 / p.gamma;
    out.intervals.emplace_back(-p.a, -p.a);
    std::sort(out.intervals.begin(), out.intervals.end());
  }
  if (out.intervals.empty()) {
    throw InternalError("support scan found no interval");
  }
  out.min_edge = out.intervals.front().first;
  out.max_edge = out.intervals.back().second;
  out.norm = std::max(std::abs(out.min_edge), std::abs(out.max_edge));
  return out;
}

double DensityGrid::integral() const {
  double acc = 0.0;
  for (Eigen::Index i = 1; i < xs.size(); ++i) {
    acc += 0.5 * (density(i) + density(i - 1)) * (xs(i) - xs(i - 1));
  }
  return acc;
}

DensityGrid density(const LimitLawParams& p, const Eigen::VectorXd& xs, double epsilon,
                    bool richardson) {
  if (!(epsilon > 0.0)) throw DomainError("density needs epsilon > 0");
  DensityGrid out;
  out.xs = xs;
  out.epsilon = epsilon;
  out.density.resize(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    double d = stieltjes(Complex(xs(i), epsilon), p).m.imag() / kPi;
    if (richardson) {
      double d2 = stieltjes(Complex(xs(i), 2.0 * epsilon), p).m.imag() / kPi;
      d = 2.0 * d - d2;
    }
    out.density(i) = std::max(0.0, d);
  }
  if (p.is_mp_atom_case()) out.atom_mass = 1.0 - 1.0 / p.gamma;
  return out;
}

Eigen::VectorXd default_density_grid(const LimitLawParams& p, int points) {
  const SupportIntervals s = support(p);
  std::vector<std::pair<double, double>> cont;
  for (const auto& iv : s.intervals) {
    if (iv.second > iv.first) cont.push_back(iv);
  }
  const double span = std::max(s.max_edge - s.min_edge, 1e-3);
  const double margin = 0.05 * span;
  constexpr int kMarginPoints = 50;
  std::vector<double> xs;
  for (int i = 0; i < kMarginPoints; ++i) {
    xs.push_back(s.min_edge - margin + margin * i / kMarginPoints);
    xs.push_back(s.max_edge + margin - margin * i / kMarginPoints);
  }
  for (std::size_t k = 0; k + 1 < cont.size(); ++k) {
    const double lo = cont[k].second;
    const double hi = cont[k + 1].first;
    for (int i = 1; i < 20; ++i) xs.push_back(lo + (hi - lo) * i / 20.0);
  }
  const int remaining = std::max(2 * int(cont.size()), points - int(xs.size()));
  const int per = std::max(2, remaining / std::max<int>(1, int(cont.size())));
  for (const auto& [lo, hi] : cont) {
    for (int i = 0; i < per; ++i) {
      double t = kPi * i / (per - 1);
      xs.push_back(lo + (hi - lo) * 0.5 * (1.0 - std::cos(t)));
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return Eigen::Map<Eigen::VectorXd>(xs.data(), Eigen::Index(xs.size()));
}

DensityGrid density(const LimitLawParams& p, double epsilon, bool richardson) {
  return density(p, default_density_grid(p), epsilon, richardson);
}

double boundary_density(double x, const LimitLawParams& p) {
  if (!(support_discriminant(x, p) < 0.0)) return 0.0;
  auto roots = roots_at(Complex(x, 0.0), p);
  double im = 0.0;
  for (const Complex& r : roots) im = std::max(im, std::abs(r.imag()));
  return im / kPi;
}

Complex r_transform(const Complex& z, const LimitLawParams& p) {
  p.validate();
  const double c = p.a * p.gamma;
  const Complex denom = 1.0 - c * z;
  if (std::abs(denom) < 1e-14) {
    std::ostringstream os;
    os << "R-transform pole at z=" << z << " (1/(a gamma) = " << 1.0 / c << ")";
    throw DomainError(os.str());
  }
  return -p.a * (1.0 - 1.0 / denom) + p.semicircle_variance() * z;
}

CumulantSequence free_cumulants(const LimitLawParams& p, int L) {
  p.validate();
  if (L < 1) throw ConfigError("cumulant count L must be >= 1");
  CumulantSequence out;
  out.kappas.assign(L, 0.0);
  if (L >= 2) out.kappas[1] = p.gamma * p.nu;
  for (int l = 3; l <= L; ++l) out.kappas[l - 1] = std::pow(p.a, l) * std::pow(p.gamma, l - 1);
  return out;
}

std::pair<CumulantSequence, CumulantSequence> component_cumulants(const LimitLawParams& p, int L) {
  p.validate();
  if (L < 1) throw ConfigError("cumulant count L must be >= 1");
  CumulantSequence mp;
  CumulantSequence sc;
  mp.kappas.assign(L, 0.0);
  sc.kappas.assign(L, 0.0);
  // kappa_l(MP_gamma) = gamma^{l-1}; scaling by a multiplies by a^l and the
  // shift by -a cancels kappa_1.
  for (int l = 2; l <= L; ++l) mp.kappas[l - 1] = std::pow(p.a, l) * std::pow(p.gamma, l - 1);
  if (L >= 2) sc.kappas[1] = p.semicircle_variance();
  return {mp, sc};
}

namespace {

void nc_recurse(int i, int l, Partition& blocks, std::vector<int>& open,
                const std::function<void(const Partition&)>& visit) {
  if (i > l) {
    visit(blocks);
    return;
  }
  blocks.push_back({i});
  open.push_back(int(blocks.size()) - 1);
  nc_recurse(i + 1, l, blocks, open, visit);
  open.pop_back();
  blocks.pop_back();

  // Joining an open block closes every block opened after it.
  for (std::size_t k = 0; k < open.size(); ++k) {
    std::vector<int> closed(open.begin() + k + 1, open.end());
    open.resize(k + 1);
    blocks[open[k]].push_back(i);
    nc_recurse(i + 1, l, blocks, open, visit);
    blocks[open[k]].pop_back();
    open.insert(open.end(), closed.begin(), closed.end());
  }
}

void check_partition_size(int l) {
  if (l < 1) throw ConfigError("partition size must be >= 1");
  if (l > kMaxPartitionSize) {
    throw SizeError("non-crossing partitions limited to l <= " + std::to_string(kMaxPartitionSize) +
                    " (got " + std::to_string(l) + ")");
  }
}

}  // namespace

void for_each_nc_partition(int l, const std::function<void(const Partition&)>& visit) {
  check_partition_size(l);
  Partition blocks;
  std::vector<int> open;
  nc_recurse(1, l, blocks, open, visit);
}

std::vector<Partition> enumerate_nc_partitions(int l) {
  std::vector<Partition> out;
  for_each_nc_partition(l, [&](const Partition& pi) { out.push_back(pi); });
  return out;
}

double moment(const LimitLawParams& p, int l) {
  if (l == 0) return 1.0;
  check_partition_size(l);
  const CumulantSequence kappa = free_cumulants(p, l);
  KahanSum acc;
  for_each_nc_partition(l, [&](const Partition& pi) {
    double term = 1.0;
    for (const auto& block : pi) {
      term *= kappa[int(block.size())];
      if (term == 0.0) return;
    }
    acc.add(term);
  });
  return acc.sum;
}

bool check_sign_property(const LimitLawParams& p, double tol) {
  const SupportIntervals s = support(p);
  bool ok = true;
  if (p.a >= 0.0) ok = ok && s.max_edge >= -s.min_edge - tol;
  if (p.a <= 0.0) ok = ok && s.max_edge <= -s.min_edge + tol;
  return ok;
}

SpectralLaw::SpectralLaw(const LimitLawParams& p, int panels) : params_(p), support_(kernelrmt::support(p)) {
  if (panels < 1) throw ConfigError("panel count must be >= 1");
  const auto& one = [](double) { return 1.0; };
  for (int iv = 0; iv < int(support_.intervals.size()); ++iv) {
    const auto [lo, hi] = support_.intervals[iv];
    if (!(hi > lo)) continue;
    for (int j = 0; j < panels; ++j) {
      Panel panel;
      panel.lo_theta = kPi * j / panels;
      panel.hi_theta = kPi * (j + 1) / panels;
      panel.x_lo = lo + (hi - lo) * 0.5 * (1.0 - std::cos(panel.lo_theta));
      panel.x_hi = lo + (hi - lo) * 0.5 * (1.0 - std::cos(panel.hi_theta));
      panel.interval = iv;
      panel.mass_before = total_mass_;
      panel.mass = 0.0;
      panels_.push_back(panel);
      panels_.back().mass = panel_integral(panels_.back(), panel.hi_theta, one);
      total_mass_ += panels_.back().mass;
    }
  }
}

double SpectralLaw::panel_integral(const Panel& panel, double theta_hi,
                                   const std::function<double(double)>& f) const {
  const auto [lo, hi] = support_.intervals[panel.interval];
  const double half = 0.5 * (theta_hi - panel.lo_theta);
  const double mid = 0.5 * (theta_hi + panel.lo_theta);
  double acc = 0.0;
  for (const auto& [t, w] : gauss_legendre8()) {
    const double theta = mid + half * t;
    const double x = lo + (hi - lo) * 0.5 * (1.0 - std::cos(theta));
    const double jac = 0.5 * (hi - lo) * std::sin(theta);
    acc += w * f(x) * boundary_density(x, params_) * jac;
  }
  return acc * half;
}

double SpectralLaw::theta_of(int interval, double x) const {
  const auto [lo, hi] = support_.intervals[interval];
  double u = std::clamp(1.0 - 2.0 * (x - lo) / (hi - lo), -1.0, 1.0);
  return std::acos(u);
}

double SpectralLaw::cdf(double x) const {
  double atom = 0.0;
  if (support_.atom_location && x >= *support_.atom_location) atom = support_.atom_mass;
  if (panels_.empty()) return atom + (x >= 0.0 && support_.intervals.front().first == 0.0 ? 1.0 : 0.0);
  // Last panel whose left end is at or below x.
  auto it = std::upper_bound(panels_.begin(), panels_.end(), x,
                             [](double v, const Panel& panel) { return v < panel.x_lo; });
  if (it == panels_.begin()) return atom;
  const Panel& panel = *(it - 1);
  if (x >= panel.x_hi) return atom + panel.mass_before + panel.mass;
  const double theta = theta_of(panel.interval, x);
  const auto& one = [](double) { return 1.0; };
  return atom + panel.mass_before + panel_integral(panel, theta, one);
}

double SpectralLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  double lo = support_.min_edge;
  double hi = support_.max_edge;
  if (cdf(lo) >= u) return lo;
  for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, support_.norm); ++it) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double SpectralLaw::integrate(const std::function<double(double)>& f) const {
  KahanSum acc;
  for (const Panel& panel : panels_) acc.add(panel_integral(panel, panel.hi_theta, f));
  if (support_.atom_location) acc.add(support_.atom_mass * f(*support_.atom_location));
  if (panels_.empty()) acc.add(f(0.0));
  return acc.sum;
}

double SpectralLaw::moment(int l) const {
  return integrate([l](double x) { return std::pow(x, l); });
}

}  // namespace kernelrmt
