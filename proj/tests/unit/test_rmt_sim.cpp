#include "doctest.h"

#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "kernelrmt/rmt_sim.hpp"
#include "kernelrmt/rng.hpp"

using namespace kernelrmt;

namespace {

double h2h3(double x) { return hermite_eval(2, x) + hermite_eval(3, x); }

// Sum over ordered tuples of pairwise distinct indices of f(j_1, ..., j_len).
double distinct_tuple_sum(int n, int len, const std::function<double(const std::vector<int>&)>& f) {
  std::vector<int> idx(len);
  std::vector<bool> used(n, false);
  double acc = 0.0;
  std::function<void(int)> rec = [&](int pos) {
    if (pos == len) {
      acc += f(idx);
      return;
    }
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      idx[pos] = j;
      rec(pos + 1);
      used[j] = false;
    }
  };
  rec(0);
  return acc;
}

double factorial(int d) { return std::tgamma(d + 1.0); }

}  // namespace

TEST_CASE("entry laws") {
  CHECK(EntryLaw::gaussian().fourth_moment() == 3.0);
  CHECK(EntryLaw::gaussian().moment(6) == 15.0);
  CHECK(EntryLaw::rademacher().fourth_moment() == 1.0);
  auto three = EntryLaw::discrete({-std::sqrt(2.0), 0.0, std::sqrt(2.0)}, {0.25, 0.5, 0.25});
  CHECK(three.moment(2) == doctest::Approx(1.0));
  CHECK(three.fourth_moment() == doctest::Approx(2.0));
  CHECK_THROWS_AS(EntryLaw::discrete({0.0, 2.0}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(EntryLaw::discrete({-2.0, 2.0}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(EntryLaw::discrete({-1.0, 1.0}, {0.3, 0.6}), ConfigError);
  CHECK_THROWS_AS(EntryLaw::discrete({-1.0, 1.0}, {0.5}), ConfigError);
}

TEST_CASE("sample_data") {
  DataMatrixConfig cfg{1000, 1000, EntryLaw::gaussian(), 42};
  Eigen::MatrixXd X = sample_data(cfg);
  Eigen::MatrixXd Y = sample_data(cfg);
  CHECK(std::memcmp(X.data(), Y.data(), sizeof(double) * X.size()) == 0);
  const double N = double(X.size());
  CHECK(std::abs(X.mean()) < 5.0 / std::sqrt(N));
  CHECK(std::abs(X.array().square().mean() - 1.0) < 5.0 * std::sqrt(2.0 / N));
  CHECK(std::abs(X.array().pow(4).mean() - 3.0) < 5.0 * std::sqrt(96.0 / N));
  cfg.seed = 43;
  CHECK_FALSE(sample_data(cfg).isApprox(X));

  Eigen::MatrixXd R = sample_data({50, 40, EntryLaw::rademacher(), 1});
  CHECK((R.array().abs() == 1.0).all());
  CHECK(R.array().pow(4).mean() == 1.0);
  CHECK_THROWS_AS(sample_data({1, 5, EntryLaw::gaussian(), 1}), ConfigError);
}

TEST_CASE("kernel matrix construction") {
  Eigen::MatrixXd X = sample_data({30, 12, EntryLaw::gaussian(), 3});
  Eigen::MatrixXd K = build_kernel_matrix(X, [](double x) { return x; });
  Eigen::MatrixXd G = X * X.transpose() / 30.0;
  G.diagonal().setZero();
  CHECK((K - G).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(K.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);

  auto odd = make_kernel([](double x) { return hermite_eval(3, x) + 0.5 * x; }, KernelParity::odd, "odd");
  Eigen::MatrixXd Kp = build_kernel_matrix(X, odd);
  // flipping the sign of some rows conjugates K by the same sign pattern
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(12);
  signs(1) = signs(4) = signs(7) = -1.0;
  Eigen::MatrixXd Kf = build_kernel_matrix(Eigen::MatrixXd(signs.asDiagonal() * X), odd);
  CHECK((Kf - signs.asDiagonal() * Kp * signs.asDiagonal()).cwiseAbs().maxCoeff() < 1e-13);
  Eigen::MatrixXd Kneg = build_kernel_matrix(X, [&](double x) { return -odd(x); });
  CHECK((Kp + Kneg).cwiseAbs().maxCoeff() == 0.0);

  CHECK((build_component_matrix(X, 1, 1.0) - K).cwiseAbs().maxCoeff() < 1e-13);
  Eigen::MatrixXd K23 = build_kernel_matrix(X, h2h3);
  Eigen::MatrixXd sum = build_component_matrix(X, 2, 1.0) + build_component_matrix(X, 3, 1.0);
  CHECK((K23 - sum).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd tall = Eigen::MatrixXd::Zero(kMaxKernelDimension + 1, 2);
  CHECK_THROWS_AS(build_kernel_matrix(tall, [](double x) { return x; }), SizeError);
  CHECK_THROWS_AS(build_component_matrix(X, 0, 1.0), ConfigError);
}

TEST_CASE("spectrum examples") {
  auto id = spectrum(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.eigenvalues.isApprox(Eigen::Vector3d(1, 1, 1)));
  Eigen::Matrix2d d;
  d << 3, 0, 0, -5;
  auto sd = spectrum(d);
  CHECK(sd.spectral_norm == doctest::Approx(5.0));
  CHECK(sd.lambda_max == doctest::Approx(3.0));
  CHECK(sd.eigenvalues(0) >= sd.eigenvalues(1));
  Eigen::Matrix2d swap;
  swap << 0, 1, 1, 0;
  auto ss = spectrum(swap);
  CHECK(ss.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(ss.eigenvalues(1) == doctest::Approx(-1.0));
  CHECK(ss.esd_cdf(0.0) == 0.5);
  CHECK(ss.esd_cdf(1.0) == 1.0);
  CHECK(ss.esd_cdf(-2.0) == 0.0);
  CHECK(ss.count_outside(-0.5, 0.5) == 2);

  Eigen::Matrix2d bad;
  bad << 0, 1, 1 + 1e-6, 0;
  CHECK_THROWS_AS(spectrum(bad), ShapeError);
  Eigen::Matrix2cd herm;
  herm << 2.0, std::complex<double>(0, 1), std::complex<double>(0, -1), 2.0;
  auto sh = spectrum(herm);
  CHECK(sh.lambda_max == doctest::Approx(3.0));
  CHECK(sh.lambda_min == doctest::Approx(1.0));
}

TEST_CASE("ks_distance") {
  LimitLawParams sc{0.0, 1.0, 1.0};
  SpectralLaw law(sc);
  const int p = 400;
  Eigen::VectorXd ev(p);
  for (int i = 0; i < p; ++i) ev(i) = law.quantile((i + 0.5) / p);
  CHECK(ks_distance(summarize_eigenvalues(ev), law) <= 1.0 / p + 1e-9);

  double total = 0.0;
  double total_bad = 0.0;
  double total_shape = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd X = sample_data({1000, 1000, EntryLaw::gaussian(), std::uint64_t(100 + seed)});
    auto s = spectrum(build_component_matrix(X, 3, 1.0));
    total += ks_distance(s, law);
    total_bad += ks_distance(s, LimitLawParams{0.0, 2.0, 1.0});
    total_shape += ks_distance(s, LimitLawParams{0.0, 9.0, 1.0});
  }
  CHECK(total / 5 < 0.05);
  // doubling nu only rescales the semicircle, a milder mismatch
  CHECK(total_bad / 5 > 0.08);
  CHECK(total_shape / 5 > 0.2);
}

TEST_CASE("component matrices follow scaled semicircles") {
  Eigen::MatrixXd X = sample_data({1000, 1000, EntryLaw::gaussian(), 9});
  for (int d : {2, 3}) {
    const double ad = 0.7;
    auto s = spectrum(build_component_matrix(X, d, ad));
    CHECK(ks_distance(s, LimitLawParams{0.0, ad * ad, 1.0}) < 0.06);
    CHECK(s.spectral_norm == doctest::Approx(2.0 * ad).epsilon(0.1));
  }
}

TEST_CASE("free convolution ESD of K1 + K2 + K3") {
  Eigen::MatrixXd X = sample_data({1000, 1000, EntryLaw::gaussian(), 21});
  auto s = spectrum(build_kernel_matrix(X, [](double x) {
    return hermite_eval(1, x) + hermite_eval(2, x) + hermite_eval(3, x);
  }));
  CHECK(ks_distance(s, LimitLawParams{1.0, 3.0, 1.0}) < 0.06);
}

TEST_CASE("decompose_hermite_sum low degrees") {
  Rng rng(5);
  std::normal_distribution<double> g;
  Eigen::VectorXd z(50);
  for (auto& v : z) v = g(rng);
  auto d1 = decompose_hermite_sum(z, 1);
  CHECK(d1.q == doctest::Approx(z.sum() / std::sqrt(50.0)).epsilon(1e-14));
  CHECK(d1.r == 0.0);
  CHECK(d1.s == 0.0);
  auto d2 = decompose_hermite_sum(z, 2);
  CHECK(d2.s == 0.0);
  CHECK(std::abs(d2.h_value - d2.q - d2.r) < 1e-12);
  CHECK_THROWS_AS(decompose_hermite_sum(Eigen::VectorXd::Ones(2), 3), SizeError);
  CHECK_THROWS_AS(decompose_hermite_sum(z, 0), ConfigError);
}

TEST_CASE("decompose_hermite_sum matches the distinct-tuple oracle") {
  Rng rng(77);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + trial % 7;  // 4..10
    Eigen::VectorXd z(n);
    for (auto& v : z) v = g(rng);
    for (int d = 1; d <= 4; ++d) {
      auto dec = decompose_hermite_sum(z, d);
      const double norm = std::sqrt(1.0 / (std::pow(n, d) * factorial(d)));
      double q = norm * distinct_tuple_sum(n, d, [&](const std::vector<int>& j) {
        double prod = 1.0;
        for (int i : j) prod *= z(i);
        return prod;
      });
      double r = 0.0;
      if (d >= 2) {
        r = norm * (d * (d - 1) / 2.0) * distinct_tuple_sum(n, d - 1, [&](const std::vector<int>& j) {
          double prod = z(j[0]) * z(j[0]) - 1.0;
          for (std::size_t i = 1; i < j.size(); ++i) prod *= z(j[i]);
          return prod;
        });
      }
      worst = std::max({worst, std::abs(dec.q - q), std::abs(dec.r - r)});
      CHECK(dec.h_value == doctest::Approx(dec.q + dec.r + dec.s).epsilon(1e-12));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("compensated symmetric polynomials agree") {
  Rng rng(8);
  std::normal_distribution<double> g;
  Eigen::VectorXd z(20000);
  for (auto& v : z) v = g(rng);
  Eigen::VectorXd plain = elementary_symmetric(z, 6);
  Eigen::VectorXd comp = elementary_symmetric(z, 6, true);
  for (int k = 0; k <= 6; ++k) CHECK(comp(k) == doctest::Approx(plain(k)).epsilon(1e-8));
  auto dec = decompose_hermite_sum(z, 5);
  CHECK(std::abs(dec.s) < 0.05);
}

TEST_CASE("rank-two correction") {
  Eigen::MatrixXd X = sample_data({200, 200, EntryLaw::gaussian(), 13});
  CHECK(rank_two_correction(X, 0.0, 3.0).locations.empty());
  CHECK(rank_two_correction(X, 0.0, 3.0).empirical.empty());

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd Y = sample_data({200, 200, EntryLaw::gaussian(), seed});
    auto spike = rank_two_correction(Y, 1.3, 3.0);
    auto s = spectrum(rank_two_matrix(Y, 1.3));
    CHECK(std::abs(spike.empirical[0] - s.lambda_max) < 1e-8);
    CHECK(std::abs(spike.empirical[1] - s.lambda_min) < 1e-8);
  }
  Eigen::MatrixXd T = sample_data({20, 200, EntryLaw::gaussian(), 2});
  auto pred = rank_two_correction(T, 1.0, 3.0);
  REQUIRE(pred.locations.size() == 2);
  CHECK(pred.locations[0] == doctest::Approx(10.0));
  CHECK(pred.locations[1] == doctest::Approx(-10.0));
  auto rad = rank_two_correction(sample_data({20, 200, EntryLaw::rademacher(), 2}), 1.0, 1.0);
  CHECK(rad.locations[0] == 0.0);
  CHECK(std::abs(rad.empirical[0]) < 1e-12);
}

TEST_CASE("Rademacher entries give no h2 outliers") {
  Eigen::MatrixXd X = sample_data({1000, 1000, EntryLaw::rademacher(), 4});
  auto s = spectrum(build_component_matrix(X, 2, 1.0));
  auto edge = support({0.0, 1.0, 1.0});
  CHECK(s.count_outside(edge.min_edge - 0.3, edge.max_edge + 0.3) == 0);
}

TEST_CASE("deformed model") {
  CHECK_THROWS_AS(sample_deformed_model(10, 10, {1.0, 0.5, 1.0}, 1), ConfigError);
  auto small = sample_deformed_model(30, 40, {0.5, 1.0, 0.75}, 3);
  CHECK(small.V.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((small.M - small.M.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((small.W - small.W.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(small.W.diagonal().imag().cwiseAbs().maxCoeff() == 0.0);

  // off-diagonal real and imaginary parts have variance 1/2
  auto big = sample_deformed_model(400, 10, {0.0, 1.0, 1.0}, 5);
  double re2 = 0.0, im2 = 0.0;
  int count = 0;
  for (int j = 0; j < 400; ++j)
    for (int i = j + 1; i < 400; ++i) {
      re2 += std::norm(big.W(i, j).real());
      im2 += std::norm(big.W(i, j).imag());
      ++count;
    }
  CHECK(re2 / count == doctest::Approx(0.5).epsilon(0.03));
  CHECK(im2 / count == doctest::Approx(0.5).epsilon(0.03));

  auto gue = sample_deformed_model(1000, 1000, {0.0, 1.0, 1.0}, 7);
  CHECK(ks_distance(spectrum(gue.M), LimitLawParams{0.0, 1.0, 1.0}) < 0.05);
  auto mixed = sample_deformed_model(1000, 1000, {1.0, 2.0, 1.0}, 8);
  CHECK(std::abs(spectrum(mixed.M).spectral_norm - support({1.0, 2.0, 1.0}).norm) < 0.15);
}

TEST_CASE("concentration probe") {
  auto even = make_kernel([](double x) { return hermite_eval(2, x); }, KernelParity::general, "h2");
  CHECK_THROWS_AS(concentration_probe(even, {1.0}, 50, 1, 1), ConfigError);
  auto h1 = make_kernel([](double x) { return x; }, KernelParity::odd, "h1");
  auto t = concentration_probe(h1, {0.25, 1.0, 4.0}, 200, 1, 3);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[2].p == 800);
  CHECK(t.spread() < 3.0);
  // doubling n at a fixed ratio barely moves the statistic
  auto a = concentration_probe(h1, {1.0}, 500, 2, 4);
  auto b = concentration_probe(h1, {1.0}, 1000, 2, 4);
  CHECK(std::abs(a.rows[0].statistic / b.rows[0].statistic - 1.0) < 0.1);
}

TEST_CASE("library brute-force decomposition and scaling table") {
  Rng rng(5);
  std::normal_distribution<double> g;
  for (int n = 3; n <= 10; ++n) {
    Eigen::VectorXd z(n);
    for (auto& v : z) v = g(rng);
    for (int d = 1; d <= std::min(n, 4); ++d) {
      auto fast = decompose_hermite_sum(z, d);
      auto slow = brute_force_decomposition(z, d);
      CHECK(std::abs(fast.q - slow.q) < 1e-10);
      CHECK(std::abs(fast.r - slow.r) < 1e-10);
    }
  }
  CHECK_THROWS_AS(brute_force_decomposition(Eigen::VectorXd::Ones(13), 2), SizeError);

  auto rows = decomposition_scaling({2, 3, 4}, {100, 400, 1600}, 200, 1);
  REQUIRE(rows.size() == 3);
  CHECK(std::isinf(rows[0].slope));
  for (int k = 1; k < 3; ++k) {
    MESSAGE("d=" << rows[k].d << " slope " << rows[k].slope);
    CHECK(rows[k].slope <= -0.8);
    CHECK(rows[k].median_abs_s[0] > rows[k].median_abs_s[2]);
  }
}
