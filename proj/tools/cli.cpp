#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "kernelrmt/csv.hpp"
#include "kernelrmt/hermite.hpp"
#include "kernelrmt/kernels.hpp"
#include "kernelrmt/lgraph.hpp"
#include "kernelrmt/limit_law.hpp"
#include "kernelrmt/rng.hpp"
#include "kernelrmt/sparse_pca.hpp"

namespace kernelrmt::cli {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

Config::Config(std::string command, const std::vector<KeySpec>& keys) : command_(std::move(command)) {
  for (const auto& k : keys) values_[k.name] = k.default_value;
}

void Config::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    set(line, origin + ":" + std::to_string(lineno));
  }
}

void Config::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path);
}

void Config::set(const std::string& assignment, const std::string& origin) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(origin + ": expected key = value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), origin);
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  if (!values_.count(key)) {
    std::string known;
    for (const auto& [k, v] : values_) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError(origin + ": unknown config key '" + key + "' for command '" + command_ + "' (known: " +
                      known + ")");
  }
  values_[key] = value;
}

void Config::fail(const std::string& key, const std::string& what) const {
  throw ConfigError("config key '" + key + "': " + what + " (got '" + values_.at(key) + "')");
}

std::string Config::text(const std::string& key) const { return values_.at(key); }

double Config::real(const std::string& key) const {
  const std::string& s = values_.at(key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(key, "expected a finite number");
  }
  return v;
}

double Config::positive(const std::string& key) const {
  double v = real(key);
  if (!(v > 0.0)) fail(key, "must be > 0");
  return v;
}

long long Config::integer(const std::string& key, long long lo, long long hi) const {
  const std::string& s = values_.at(key);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected an integer");
  if (v < lo || v > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::uint64_t Config::seed(const std::string& key) const {
  const std::string& s = values_.at(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected an unsigned integer");
  return v;
}

bool Config::flag(const std::string& key) const {
  const std::string& s = values_.at(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, "expected true or false");
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  const std::string& s = values_.at(key);
  if (trim(s).empty()) return out;
  for (const auto& item : split_list(s)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
      fail(key, "expected a comma-separated list of numbers");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<int> Config::integers(const std::string& key, int lo, int hi) const {
  std::vector<int> out;
  for (const auto& item : split_list(values_.at(key))) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      fail(key, "expected a comma-separated list of integers");
    }
    if (v < lo || v > hi) fail(key, "entries must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

EntryLaw Config::law(const std::string& key) const {
  const std::string& s = values_.at(key);
  if (s == "gaussian") return EntryLaw::gaussian();
  if (s == "rademacher") return EntryLaw::rademacher();
  fail(key, "expected gaussian or rademacher");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Config::hash() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical());
  return os.str();
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    long long v = 0;
    std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) t = std::time_t(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

VerifyOracles VerifyOracles::defaults() {
  return {lgraph::exact_trace_moment, brute_force_decomposition};
}

namespace {

constexpr long long kMaxN = 1'000'000;

struct Context {
  const Config& cfg;
  std::filesystem::path out_dir;
  std::ostream& out;
  const VerifyOracles& oracles;
};

void write_file(const Context& ctx, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  const auto path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("output directory '" + ctx.out_dir.string() + "': cannot write " + name);
  f << content;
}

json envelope(const Context& ctx, const std::string& command, json payload) {
  json env;
  env["tool"] = kToolName;
  env["version"] = kToolVersion;
  env["command"] = command;
  env["config_hash"] = ctx.cfg.hash();
  env["config"] = ctx.cfg.values();
  env["timestamp"] = timestamp();
  env["payload"] = std::move(payload);
  return env;
}

void emit(const Context& ctx, const std::string& command, const std::string& file, json payload) {
  json env = envelope(ctx, command, std::move(payload));
  const std::string text = env.dump(2) + "\n";
  write_file(ctx, file, text);
  ctx.out << text;
}

ParsedKernel kernel_from(const Config& cfg, const std::string& key) {
  try {
    return parse_kernel(cfg.text(key));
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

LimitLawParams params_from(const Config& cfg) {
  LimitLawParams p{cfg.real("a"), cfg.real("nu"), cfg.positive("gamma")};
  if (p.nu < 0.0) cfg.fail("nu", "must be >= 0");
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("config keys 'a', 'nu': " + std::string(e.what()));
  }
  return p;
}

json intervals_json(const SupportIntervals& s) {
  json iv = json::array();
  for (const auto& [lo, hi] : s.intervals) iv.push_back({lo, hi});
  json out{{"intervals", iv}, {"norm", s.norm}, {"max_edge", s.max_edge}, {"min_edge", s.min_edge}};
  if (s.atom_location) out["atom"] = {{"location", *s.atom_location}, {"mass", s.atom_mass}};
  return out;
}

// Moments of a kernel from its exact Hermite sum or by quadrature.
struct KernelSummary {
  double a = 0.0, nu = 0.0, a2 = 0.0;
};

KernelSummary summarize_kernel(const ParsedKernel& k) {
  KernelSummary s;
  if (k.is_hermite_sum()) {
    const auto& c = k.hermite_coefficients;
    s.a = c.size() > 1 ? c[1] : 0.0;
    s.a2 = c.size() > 2 ? c[2] : 0.0;
    for (std::size_t d = 1; d < c.size(); ++d) s.nu += c[d] * c[d];
    return s;
  }
  static const GaussHermiteRule rule = build_quadrature();
  KernelMoments m = kernel_moments(k.spec, rule);
  s.a = m.a;
  s.nu = m.nu;
  s.a2 = k.spec.is_odd() ? 0.0 : project_kernel(k.spec, 2, rule).coefficient(2);
  return s;
}

int cmd_project_kernel(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  ParsedKernel k = kernel_from(cfg, "kernel");
  const int degree = int(cfg.integer("degree", 1, 200));
  const int order = int(cfg.integer("quadrature_order", 2, 1000));
  GaussHermiteRule rule = build_quadrature(order);
  ProjectionOptions opts;
  opts.center = cfg.flag("center");
  KernelExpansion e = project_kernel(k.spec, degree, rule, opts);
  json a_d = json::array();
  for (Eigen::Index d = 0; d < e.coefficients.size(); ++d) a_d.push_back(e.coefficients(d));
  json payload{{"kernel", k.spec.name},
               {"declared_odd", k.spec.is_odd()},
               {"growth", k.spec.growth_note},
               {"degree", e.degree},
               {"a_d", a_d},
               {"a", e.a},
               {"nu", e.nu},
               {"a2", e.a2},
               {"measured_a0", e.measured_a0},
               {"second_moment", e.second_moment},
               {"truncation_residual", e.truncation_residual}};
  emit(ctx, "project-kernel", "project_kernel.json", payload);
  return 0;
}

int cmd_limit_law(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  LimitLawParams p = params_from(cfg);
  const int points = int(cfg.integer("points", 11, 1'000'000));
  const double eps = cfg.positive("epsilon");
  const int max_moment = int(cfg.integer("max_moment", 1, kMaxPartitionSize));

  SupportIntervals sup = support(p);
  DensityGrid grid = density(p, default_density_grid(p, points), eps);
  std::string dens = "x,density\n";
  for (Eigen::Index i = 0; i < grid.xs.size(); ++i) dens += csv_row({grid.xs(i), grid.density(i)});
  write_file(ctx, "limit_law_density.csv", dens);
  std::string supp = "lo,hi\n";
  for (const auto& [lo, hi] : sup.intervals) supp += csv_row({lo, hi});
  write_file(ctx, "limit_law_support.csv", supp);

  SpectralLaw law(p);
  json moments = json::array();
  for (int l = 1; l <= max_moment; ++l) {
    const double nc = moment(p, l);
    const double integ = law.moment(l);
    moments.push_back({{"l", l},
                       {"noncrossing", nc},
                       {"density", integ},
                       {"relative_difference", std::abs(nc - integ) / std::max(1.0, std::abs(nc))}});
  }
  json kappa = json::array();
  CumulantSequence cs = free_cumulants(p, max_moment);
  for (int l = 1; l <= max_moment; ++l) kappa.push_back(cs[l]);
  json payload{{"a", p.a},
               {"nu", p.nu},
               {"gamma", p.gamma},
               {"support", intervals_json(sup)},
               {"density_points", grid.xs.size()},
               {"density_integral", grid.integral()},
               {"moments", moments},
               {"free_cumulants", kappa}};
  emit(ctx, "limit-law", "limit_law.json", payload);
  return 0;
}

int cmd_simulate(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  ParsedKernel k = kernel_from(cfg, "kernel");
  const int n = int(cfg.integer("n", 2, kMaxN));
  const int p = int(cfg.integer("p", 2, kMaxKernelDimension));
  EntryLaw law = cfg.law("law");
  const std::uint64_t seed = cfg.seed("seed");
  const double margin = cfg.real("margin");
  if (margin < 0.0) cfg.fail("margin", "must be >= 0");

  KernelSummary ks = summarize_kernel(k);
  Eigen::MatrixXd X = sample_data({n, p, law, seed});
  SpectrumSummary spec = spectrum(build_kernel_matrix(X, k.spec));
  std::string csv = "eigenvalue\n";
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) csv += csv_row({spec.eigenvalues(i)});
  write_file(ctx, "simulate_eigenvalues.csv", csv);

  const double gamma = double(p) / n;
  LimitLawParams lp{ks.a, std::max(ks.nu, ks.a * ks.a), gamma};
  SpectralLaw limit(lp);
  const SupportIntervals& sup = limit.support();
  json outliers = json::array();
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    double v = spec.eigenvalues(i);
    if (v > sup.max_edge + margin || v < sup.min_edge - margin) outliers.push_back(v);
  }
  json spikes = json::array();
  json rank_two = json::array();
  if (ks.a2 != 0.0) {
    SpikePrediction sp = rank_two_correction(X, ks.a2, law.fourth_moment());
    for (double v : sp.locations) spikes.push_back(v);
    for (double v : sp.empirical) rank_two.push_back(v);
  }
  json payload{{"kernel", k.spec.name},
               {"n", n},
               {"p", p},
               {"gamma", gamma},
               {"law", law.name()},
               {"a", ks.a},
               {"nu", ks.nu},
               {"a2", ks.a2},
               {"lambda_max", spec.lambda_max},
               {"lambda_min", spec.lambda_min},
               {"spectral_norm", spec.spectral_norm},
               {"limit", intervals_json(sup)},
               {"ks_distance", ks_distance(spec, limit)},
               {"margin", margin},
               {"outliers", outliers},
               {"predicted_spikes", spikes},
               {"rank_two_eigenvalues", rank_two}};
  emit(ctx, "simulate", "simulate.json", payload);
  return 0;
}

int cmd_sparse_pca_sweep(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const int n = int(cfg.integer("n", 2, kMaxN));
  const double gamma = cfg.positive("gamma");
  const int trials = int(cfg.integer("trials", 1, 10000));
  EntryLaw law = cfg.law("law");
  const std::uint64_t seed = cfg.seed("seed");

  SpikedModelConfig spiked;
  spiked.n = n;
  spiked.gamma = gamma;
  spiked.lambda = cfg.positive("lambda");
  spiked.sparsity_c = cfg.positive("sparsity_c");
  if (!trim(cfg.text("sparsity")).empty()) spiked.sparsity = int(cfg.integer("sparsity", 1, kMaxKernelDimension));
  spiked.seed = derive_seed(seed, 1);
  if (spiked.p() > kMaxKernelDimension) cfg.fail("gamma", "gamma * n exceeds the dimension cap");

  std::vector<double> taus = cfg.reals("taus");
  if (taus.empty()) {
    const double lo = cfg.positive("tau_min"), hi = cfg.positive("tau_max");
    const int pts = int(cfg.integer("tau_points", 1, 10000));
    if (hi < lo) cfg.fail("tau_max", "must be >= tau_min");
    for (int i = 0; i < pts; ++i) taus.push_back(pts == 1 ? lo : lo + (hi - lo) * i / (pts - 1));
  }
  for (double t : taus)
    if (!(t > 0.0)) cfg.fail("taus", "every tau must be > 0");

  DataMatrixConfig null_cfg{n, spiked.p(), law, derive_seed(seed, 0)};
  SweepResult r = sweep_tau(null_cfg, spiked, taus, trials);
  write_file(ctx, "sparse_pca_sweep.csv", sweep_csv(r));
  json rows = json::array();
  for (std::size_t i = 0; i < r.taus.size(); ++i) {
    rows.push_back({{"tau", r.taus[i]},
                    {"null_mean", r.null_mean[i]},
                    {"null_se", r.null_se[i]},
                    {"spiked_mean", r.spiked_mean[i]},
                    {"spiked_se", r.spiked_se[i]},
                    {"prediction", r.prediction[i]}});
  }
  json payload{{"n", n}, {"p", spiked.p()}, {"lambda", spiked.lambda}, {"sparsity", spiked.support_size()},
               {"trials", trials}, {"rows", rows}};
  emit(ctx, "sparse-pca-sweep", "sparse_pca_sweep.json", payload);
  return 0;
}

int cmd_verify(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const int l_max = int(cfg.integer("l_max", 2, 4));
  const int d_max = int(cfg.integer("D_max", 1, 3));
  const std::vector<int> degrees = cfg.integers("s_degrees", 1, 8);
  const std::vector<int> ns = cfg.integers("s_ns", 8, 100000);
  const int s_trials = int(cfg.integer("s_trials", 1, 100000));
  const double slope_bound = cfg.real("s_slope");
  const int qr_max_n = int(cfg.integer("qr_max_n", 2, kBruteForceMaxN));
  const int qr_trials = int(cfg.integer("qr_trials", 1, 10000));
  ParsedKernel tk = kernel_from(cfg, "trace_kernel");
  if (!tk.is_hermite_sum()) cfg.fail("trace_kernel", "must be a Hermite sum such as h1 or h1+h2");
  const int trace_l = int(cfg.integer("trace_l", 2, lgraph::kTraceMaxL));
  const int trace_n = int(cfg.integer("trace_n", 1, lgraph::kTraceMaxN));
  const int trace_p = int(cfg.integer("trace_p", 2, lgraph::kTraceMaxP));
  const int trials = int(cfg.integer("trials", 2, 100'000'000));
  EntryLaw law = cfg.law("law");
  const std::uint64_t seed = cfg.seed("seed");
  if (int(ns.size()) < 2) cfg.fail("s_ns", "needs at least two values");
  if (int(tk.hermite_coefficients.size()) - 1 > d_max) {
    cfg.fail("trace_kernel", "degree exceeds D_max");
  }

  bool ok = true;
  json report;

  // Labeling census and lemma checks.
  json lemmas = json::array();
  for (int l = 2; l <= l_max; ++l) {
    for (int D = 1; D <= d_max; ++D) {
      auto classes = lgraph::enumerate_multilabelings(l, D);
      lgraph::LemmaReport rep = lgraph::verify_lemmas(classes, D);
      ok = ok && rep.ok();
      lemmas.push_back(lgraph::report_json(rep));
      if (l == l_max && D == d_max) write_file(ctx, "verify_census.json", lgraph::census_json(classes).dump(1) + "\n");
    }
  }
  report["lemmas"] = lemmas;

  // Decomposition scaling.
  json scaling = json::array();
  for (const auto& row : decomposition_scaling(degrees, ns, s_trials, derive_seed(seed, 10))) {
    const bool pass = row.slope <= slope_bound;
    ok = ok && pass;
    json slope = std::isinf(row.slope) ? json(nullptr) : json(row.slope);
    scaling.push_back({{"d", row.d},
                       {"n", row.ns},
                       {"median_abs_s", row.median_abs_s},
                       {"slope", slope},
                       {"identically_zero", std::isinf(row.slope)},
                       {"pass", pass}});
  }
  report["scaling"] = {{"bound", slope_bound}, {"rows", scaling}};

  // q and r against the distinct-tuple oracle.
  double worst = 0.0;
  Rng rng = make_rng(seed, 11);
  std::normal_distribution<double> g;
  for (int t = 0; t < qr_trials; ++t) {
    for (int n = 2; n <= qr_max_n; ++n) {
      Eigen::VectorXd z(n);
      for (auto& v : z) v = g(rng) * g(rng);
      for (int d : degrees) {
        if (d > n) continue;
        auto fast = decompose_hermite_sum(z, d);
        auto slow = ctx.oracles.brute_force_qr(z, d);
        worst = std::max({worst, std::abs(fast.q - slow.q), std::abs(fast.r - slow.r)});
      }
    }
  }
  const bool qr_pass = worst <= 1e-10;
  ok = ok && qr_pass;
  report["qr_oracle"] = {{"max_abs_difference", worst}, {"tolerance", 1e-10}, {"pass", qr_pass}};

  // Trace moment: enumeration oracle, labeling classes and Monte Carlo.
  const auto& coeffs = tk.hermite_coefficients;
  const int deg = int(coeffs.size()) - 1;
  const double exact = ctx.oracles.exact_trace(trace_l, trace_n, trace_p, coeffs, law);
  const double by_class =
      lgraph::class_trace_moment(lgraph::enumerate_multilabelings(trace_l, deg), trace_n, trace_p, coeffs, law);
  lgraph::TraceEstimate mc =
      lgraph::monte_carlo_trace_moment(trace_l, trace_n, trace_p, coeffs, law, trials, derive_seed(seed, 12));
  const bool class_pass = std::abs(exact - by_class) <= 1e-9 * std::max(1.0, std::abs(exact));
  const bool mc_pass = std::abs(mc.mean - exact) <= 3.0 * mc.standard_error;
  json trace{{"l", trace_l},       {"n", trace_n},         {"p", trace_p},
             {"kernel", tk.spec.name}, {"exact", exact},   {"class_sum", by_class},
             {"monte_carlo", mc.mean}, {"standard_error", mc.standard_error}, {"trials", mc.trials},
             {"class_pass", class_pass}, {"monte_carlo_pass", mc_pass}};
  ok = ok && class_pass && mc_pass;
  report["trace_moment"] = trace;
  report["pass"] = ok;

  emit(ctx, "verify", "verify.json", report);
  return ok ? 0 : int(ErrorCode::verification);
}

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  int (*run)(const Context&);
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"project-kernel",
       "Hermite coefficients and (a, nu) of a kernel",
       {{"kernel", "h1", "kernel name or expression"},
        {"degree", "30", "truncation degree D"},
        {"quadrature_order", "200", "Gauss-Hermite nodes"},
        {"center", "false", "subtract a nonzero mean instead of failing"}},
       cmd_project_kernel},
      {"limit-law",
       "support, density, moments and cumulants of the limit law",
       {{"a", "0", "linear coefficient a"},
        {"nu", "1", "total variance nu"},
        {"gamma", "1", "aspect ratio p / n"},
        {"points", "2001", "density grid size"},
        {"epsilon", "1e-06", "imaginary offset for the density"},
        {"max_moment", "8", "highest moment reported"}},
       cmd_limit_law},
      {"simulate",
       "one kernel matrix: eigenvalues, KS distance, norm and spikes",
       {{"kernel", "h2+h3", "kernel name or expression"},
        {"n", "1000", "samples"},
        {"p", "1000", "dimension"},
        {"law", "gaussian", "entry law: gaussian or rademacher"},
        {"seed", "0", "master seed"},
        {"margin", "0.3", "distance beyond the bulk that counts as an outlier"}},
       cmd_simulate},
      {"sparse-pca-sweep",
       "largest eigenvalue of thresholded covariance across tau",
       {{"n", "2000", "samples"},
        {"gamma", "1", "aspect ratio p / n"},
        {"lambda", "0.9", "spike strength"},
        {"sparsity_c", "0.3", "support size floor(c sqrt n)"},
        {"sparsity", "", "explicit support size (overrides sparsity_c)"},
        {"taus", "", "explicit comma-separated tau grid"},
        {"tau_min", "0.5", "grid start"},
        {"tau_max", "3.5", "grid end"},
        {"tau_points", "25", "grid size"},
        {"trials", "5", "trials per tau"},
        {"law", "gaussian", "entry law"},
        {"seed", "0", "master seed"}},
       cmd_sparse_pca_sweep},
      {"verify",
       "lemma census, decomposition scaling and trace-moment oracle",
       {{"l_max", "4", "largest l-graph"},
        {"D_max", "3", "largest tuple size"},
        {"s_degrees", "2,3,4", "degrees for the remainder scaling"},
        {"s_ns", "100,400,1600", "sample sizes for the remainder scaling"},
        {"s_trials", "200", "trials per (d, n)"},
        {"s_slope", "-0.8", "largest accepted log-log slope"},
        {"qr_max_n", "10", "largest n for the distinct-tuple oracle"},
        {"qr_trials", "20", "random vectors per n"},
        {"trace_kernel", "h1", "Hermite-sum kernel for the trace moment"},
        {"trace_l", "2", "trace power"},
        {"trace_n", "6", "n for the trace moment"},
        {"trace_p", "6", "p for the trace moment"},
        {"trials", "100000", "Monte Carlo trials for the trace moment"},
        {"law", "gaussian", "entry law"},
        {"seed", "0", "master seed"}},
       cmd_verify},
  };
  return table;
}

int exit_code_for(const Error& e) { return int(e.code()); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const RunOptions& options) {
  CLI::App app{"Kernel random-matrix experiments: Hermite projection, limit laws, simulation and checks"};
  app.require_subcommand(1);
  struct Parsed {
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed, out_dir, trials;
  };
  std::vector<Parsed> parsed(commands().size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands().size(); ++i) {
    const Command& c = commands()[i];
    std::string keys_help = "\nConfig keys:\n";
    for (const auto& k : c.keys) keys_help += "  " + k.name + " (default '" + k.default_value + "'): " + k.help + "\n";
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->footer(keys_help);
    sub->add_option("config", parsed[i].config_path, "flat key = value config file");
    sub->add_option("--set", parsed[i].sets, "override, key=value (repeatable)");
    sub->add_option("--seed", parsed[i].seed, "master seed");
    sub->add_option("--out", parsed[i].out_dir, std::string("output directory (default $") + kOutDirEnv + " or .)");
    sub->add_option("--trials", parsed[i].trials, "trial count");
    subs.push_back(sub);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return int(ErrorCode::config);
  }

  const VerifyOracles defaults = VerifyOracles::defaults();
  const VerifyOracles& oracles = options.oracles ? *options.oracles : defaults;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const Command& c = commands()[i];
    const Parsed& p = parsed[i];
    try {
      Config cfg(c.name, c.keys);
      if (!p.config_path.empty()) cfg.merge_file(p.config_path);
      for (const auto& s : p.sets) cfg.set(s, "--set");
      if (!p.seed.empty()) cfg.set("seed", p.seed, "--seed");
      if (!p.trials.empty()) cfg.set("trials", p.trials, "--trials");
      std::filesystem::path dir = ".";
      if (const char* env = std::getenv(kOutDirEnv)) dir = env;
      if (!p.out_dir.empty()) dir = p.out_dir;
      Context ctx{cfg, dir, out, oracles};
      return c.run(ctx);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return exit_code_for(e);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return int(ErrorCode::internal);
    }
  }
  return int(ErrorCode::internal);
}

}  // namespace kernelrmt::cli
