// Full-size acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kernelrmt/kernels.hpp"
#include "kernelrmt/lgraph.hpp"
#include "kernelrmt/limit_law.hpp"
#include "kernelrmt/rmt_sim.hpp"
#include "kernelrmt/rng.hpp"
#include "kernelrmt/sparse_pca.hpp"

using namespace kernelrmt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::uint64_t g_seed = 20240601;

// Norms of odd-kernel matrices, shared between the semicircle and convergence checks.
std::map<std::pair<int, int>, double> g_h3_norms;

double h3_norm(int n, int trial) {
  auto key = std::make_pair(n, trial);
  if (auto it = g_h3_norms.find(key); it != g_h3_norms.end()) return it->second;
  static const KernelSpec h3 = parse_kernel("h3").spec;
  Eigen::MatrixXd X = sample_data({n, n, EntryLaw::gaussian(), derive_seed(g_seed, 1000 + 10 * std::uint64_t(n) + trial)});
  double v = spectrum(build_kernel_matrix(X, h3)).spectral_norm;
  g_h3_norms[key] = v;
  return v;
}

Outcome semicircle_norm() {
  double sum = 0.0;
  std::string vals;
  for (int t = 0; t < 5; ++t) {
    double v = h3_norm(2000, t);
    sum += std::abs(v - 2.0);
    vals += fmt(" %.4f", v);
  }
  double err = sum / 5;
  return {err < 0.15, "mean |norm - 2| = " + fmt("%.4f", err) + " (bound 0.15); norms" + vals};
}

Outcome linear_edge() {
  KernelSpec h1 = parse_kernel("h1").spec;
  Eigen::MatrixXd X = sample_data({2000, 2000, EntryLaw::gaussian(), derive_seed(g_seed, 2)});
  SpectrumSummary s = spectrum(build_kernel_matrix(X, h1));
  double predicted = support({1.0, 1.0, 1.0}).norm;
  bool near = std::abs(s.spectral_norm - 3.0) < 0.15;
  bool top = std::abs(s.lambda_max - s.spectral_norm) <= 1e-12 * s.spectral_norm;
  return {near && top, "norm = " + fmt("%.4f", s.spectral_norm) + ", limit norm " + fmt("%.6f", predicted) +
                           ", lambda_max = " + fmt("%.4f", s.lambda_max) + ", lambda_min = " + fmt("%.4f", s.lambda_min)};
}

Outcome esd_law() {
  KernelSpec k = parse_kernel("h2+h3").spec;
  SpectralLaw law({0.0, 2.0, 1.0});
  double sum = 0.0;
  std::string vals;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd X = sample_data({1000, 1000, EntryLaw::gaussian(), derive_seed(g_seed, 300 + t)});
    double d = ks_distance(spectrum(build_kernel_matrix(X, k)), law);
    sum += d;
    vals += fmt(" %.4f", d);
  }
  return {sum / 5 < 0.05, "mean KS = " + fmt("%.4f", sum / 5) + " (bound 0.05); per seed" + vals};
}

Outcome moment_consistency() {
  Rng rng = make_rng(g_seed, 4);
  std::uniform_real_distribution<double> ua(-1.5, 1.5), ub(0.1, 2.0), ug(0.1, 4.0);
  double worst_moment = 0.0, worst_cumulant = 0.0;
  for (int i = 0; i < 10; ++i) {
    double a = ua(rng);
    LimitLawParams p{a, a * a + ub(rng), ug(rng)};
    SpectralLaw law(p);
    for (int l = 1; l <= 8; ++l) {
      double nc = moment(p, l), integ = law.moment(l);
      worst_moment = std::max(worst_moment, std::abs(nc - integ) / std::max(1.0, std::abs(nc)));
    }
    CumulantSequence full = free_cumulants(p, 10);
    auto [mp, sc] = component_cumulants(p, 10);
    for (int l = 1; l <= 10; ++l) {
      worst_cumulant = std::max(worst_cumulant, std::abs(full[l] - mp[l] - sc[l]) / std::max(1.0, std::abs(full[l])));
    }
  }
  return {worst_moment <= 1e-4 && worst_cumulant <= 1e-12,
          "max relative moment gap " + fmt("%.3e", worst_moment) + " (bound 1e-4), max cumulant gap " +
              fmt("%.3e", worst_cumulant) + " (bound 1e-12)"};
}

Outcome spike_reproduction() {
  KernelSpec k = parse_kernel("h2+h3").spec;
  const double edge = support({0.0, 2.0, 10.0}).max_edge;
  const double lim = 8.94 + 0.3;
  // A rank-two spike theta inside a semicircle of variance gamma nu surfaces at theta + gamma nu / theta.
  const double theta = 1.0 * 10.0 * std::sqrt((3.0 - 1.0) / 2.0);
  std::string detail = "bulk edge " + fmt("%.4f", edge) + ", rank-two eigenvalues +-" + fmt("%.2f", theta) +
                       ", shifted-spike location +-" + fmt("%.2f", theta + 20.0 / theta);

  Eigen::MatrixXd X = sample_data({1000, 10000, EntryLaw::gaussian(), derive_seed(g_seed, 5)});
  SpectrumSummary g = spectrum(build_kernel_matrix(X, k));
  std::vector<double> out;
  for (Eigen::Index i = 0; i < g.eigenvalues.size(); ++i)
    if (std::abs(g.eigenvalues(i)) > lim) out.push_back(g.eigenvalues(i));
  bool two = out.size() == 2;
  bool located = two && std::abs(out[0] - 10.0) < 0.5 && std::abs(out[1] + 10.0) < 0.5;
  detail += "; gaussian outliers:";
  for (double v : out) detail += fmt(" %.4f", v);
  std::ostringstream inner;
  inner << "; next eigenvalues " << fmt("%.4f", g.eigenvalues(1)) << ", " << fmt("%.4f", g.eigenvalues(g.size() - 2));
  detail += inner.str();
  auto r2 = rank_two_correction(X, 1.0, 3.0);
  if (r2.empirical.size() == 2) detail += "; finite-n rank-two eigenvalues " + fmt("%.4f", r2.empirical[0]) + ", " + fmt("%.4f", r2.empirical[1]);
  X.resize(0, 0);

  Eigen::MatrixXd R = sample_data({1000, 10000, EntryLaw::rademacher(), derive_seed(g_seed, 6)});
  SpectrumSummary r = spectrum(build_kernel_matrix(R, k));
  int beyond = r.count_outside(-edge - 0.3, edge + 0.3);
  detail += "; rademacher extremes " + fmt("%.4f", r.lambda_max) + ", " + fmt("%.4f", r.lambda_min) +
            ", beyond edge+0.3: " + std::to_string(beyond);
  return {two && located && beyond == 0, detail};
}

Outcome decomposition() {
  auto rows = decomposition_scaling({2, 3, 4}, {100, 400, 1600}, 200, derive_seed(g_seed, 7));
  bool ok = true;
  std::string detail = "slopes";
  for (const auto& r : rows) {
    ok = ok && r.slope <= -0.8;
    detail += " d=" + std::to_string(r.d) + ":" + (std::isinf(r.slope) ? std::string("-inf (s=0)") : fmt("%.3f", r.slope));
  }
  Rng rng = make_rng(g_seed, 8);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    for (int n = 1; n <= 10; ++n) {
      Eigen::VectorXd z(n);
      for (auto& v : z) v = g(rng) * g(rng);
      for (int d = 1; d <= std::min(n, 5); ++d) {
        auto fast = decompose_hermite_sum(z, d);
        auto slow = brute_force_decomposition(z, d);
        worst = std::max({worst, std::abs(fast.q - slow.q) / std::max(1.0, std::abs(slow.q)),
                          std::abs(fast.r - slow.r) / std::max(1.0, std::abs(slow.r))});
      }
    }
  }
  ok = ok && worst <= 1e-10;
  return {ok, detail + " (bound -0.8); q/r oracle gap " + fmt("%.3e", worst) + " (bound 1e-10)"};
}

Outcome lemma_suite() {
  bool ok = true;
  std::string detail;
  for (int l = 2; l <= 4; ++l) {
    for (int D = 1; D <= 3; ++D) {
      auto classes = lgraph::enumerate_multilabelings(l, D);
      auto rep = lgraph::verify_lemmas(classes, D);
      bool all_map = rep.map_outputs_valid == rep.classes && rep.r_preserved == rep.classes &&
                     rep.zero_to_zero == rep.zero_excess_classes;
      ok = ok && rep.ok() && all_map;
      if (D == 3)
        detail += " l=" + std::to_string(l) + ":" + std::to_string(rep.classes) + " classes/" +
                  std::to_string(rep.violations.size()) + " violations";
      for (const auto& v : rep.violations) std::cerr << "  violation " << v.check << " " << v.key << " " << v.detail << "\n";
    }
  }
  auto weights = lgraph::check_zero_excess_weights(lgraph::enumerate_multilabelings(4, 3), {0.0, 0.7, -0.4, 0.3});
  ok = ok && weights.empty();
  return {ok, "D<=3," + detail + "; zero-excess weight violations " + std::to_string(weights.size())};
}

Outcome trace_moment() {
  const std::vector<double> h1{0.0, 1.0};
  double exact = lgraph::exact_trace_moment(2, 6, 6, h1, EntryLaw::gaussian());
  double by_class = lgraph::class_trace_moment(lgraph::enumerate_multilabelings(2, 1), 6, 6, h1, EntryLaw::gaussian());
  auto mc = lgraph::monte_carlo_trace_moment(2, 6, 6, h1, EntryLaw::gaussian(), 100000, derive_seed(g_seed, 9));
  bool ok = std::abs(exact - 5.0) <= 1e-12 && std::abs(by_class - 5.0) <= 1e-12 &&
            std::abs(mc.mean - 5.0) <= 3 * mc.standard_error;
  return {ok, "exact " + fmt("%.15g", exact) + ", class sum " + fmt("%.15g", by_class) + ", Monte Carlo " +
                  fmt("%.5f", mc.mean) + " +- " + fmt("%.5f", mc.standard_error) + " (" +
                  fmt("%.2f", std::abs(mc.mean - 5.0) / mc.standard_error) + " SE)"};
}

Outcome sparse_pca_tracking() {
  SpikedModelConfig spiked;
  spiked.n = 2000;
  spiked.gamma = 1.0;
  spiked.lambda = 0.9;
  spiked.sparsity_c = 0.3;
  spiked.seed = derive_seed(g_seed, 11);
  DataMatrixConfig null_cfg{2000, 2000, EntryLaw::gaussian(), derive_seed(g_seed, 10)};
  SweepResult r = sweep_tau(null_cfg, spiked, {1.0, 1.5, 2.0, 2.5, 3.0}, 5);
  bool tracking = true, separated = false;
  std::string detail = "s=" + std::to_string(spiked.support_size()) + ";";
  for (std::size_t i = 0; i < r.taus.size(); ++i) {
    double gap = std::abs(r.null_mean[i] - r.prediction[i]);
    double pooled = std::sqrt(r.null_se[i] * r.null_se[i] + r.spiked_se[i] * r.spiked_se[i]);
    double z = (r.spiked_mean[i] - r.null_mean[i]) / pooled;
    tracking = tracking && gap < 0.1;
    separated = separated || z > 3.0;
    detail += " tau=" + fmt("%.1f", r.taus[i]) + " null " + fmt("%.4f", r.null_mean[i]) + " pred " +
              fmt("%.4f", r.prediction[i]) + " spiked " + fmt("%.4f", r.spiked_mean[i]) + " (" + fmt("%.1f", z) +
              " SE);";
  }
  return {tracking && separated, detail + (tracking ? "" : " null tracking outside 0.1") +
                                     (separated ? "" : " spike never separated by 3 SE")};
}

Outcome sign_property() {
  double worst = INFINITY;
  for (double a : {0.0, 0.25, 0.75, 1.5, 3.0})
    for (double excess : {1e-3, 0.1, 0.5, 1.0, 4.0})
      for (double gamma : {0.05, 0.5, 1.0, 2.0, 10.0}) {
        auto s = support({a, a * a + excess, gamma});
        worst = std::min(worst, s.max_edge + s.min_edge);
      }
  return {worst >= -1e-8, "min over 125 points of max_edge + min_edge = " + fmt("%.3e", worst)};
}

Outcome convergence_and_concentration() {
  std::string detail = "h3 median |norm - 2|:";
  std::vector<double> medians;
  for (int n : {250, 500, 1000, 2000}) {
    std::vector<double> errs;
    for (int t = 0; t < 5; ++t) errs.push_back(std::abs(h3_norm(n, t) - 2.0));
    std::nth_element(errs.begin(), errs.begin() + 2, errs.end());
    medians.push_back(errs[2]);
    detail += " n=" + std::to_string(n) + ":" + fmt("%.4f", errs[2]);
  }
  bool decreasing = std::is_sorted(medians.rbegin(), medians.rend()) &&
                    std::adjacent_find(medians.begin(), medians.end()) == medians.end();
  auto table = concentration_probe(parse_kernel("h1").spec, {0.25, 1.0, 4.0, 16.0}, 500, 1, derive_seed(g_seed, 12));
  detail += "; h1 ratio statistic:";
  for (const auto& row : table.rows) detail += " " + fmt("%g", row.ratio) + ":" + fmt("%.4f", row.statistic);
  detail += " spread " + fmt("%.3f", table.spread()) + " (bound 3)";
  return {decreasing && table.spread() < 3.0, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 when no runtime bound applies
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion ids to run")->delimiter(',');
  app.add_option("--seed", g_seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "semicircle norm", 120, semicircle_norm},
      {2, "linear-kernel edge", 0, linear_edge},
      {3, "ESD law", 0, esd_law},
      {4, "moment consistency", 10, moment_consistency},
      {5, "spike reproduction", 900, spike_reproduction},
      {6, "decomposition scaling", 0, decomposition},
      {7, "combinatorial lemma suite", 120, lemma_suite},
      {8, "trace-moment oracle", 0, trace_moment},
      {9, "sparse-PCA null tracking", 1800, sparse_pca_tracking},
      {10, "sign property", 0, sign_property},
      {11, "convergence trend and concentration", 0, convergence_and_concentration},
  };
  std::set<int> wanted(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.budget_seconds) + " s budget";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ", " << fmt("%.1f", secs)
              << " s): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
