#include "doctest.h"

#include "mmdlab/errors.hpp"
#include "mmdlab/mmd.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace mmdlab;

namespace {

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

SampleMatrix gaussian_rows(Rng& rng, std::size_t n, std::size_t d, double shift = 0.0, double scale = 1.0) {
  std::normal_distribution<double> nd;
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = shift + scale * nd(rng);
  return SampleMatrix(std::move(m));
}

GaussianDistSpec gauss1(double mean, double var) {
  return {Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var)};
}

// Direct double loop over i != j; independent of the Gram-matrix path.
double brute_force_u(const KernelSpec& k, const SampleMatrix& X, const SampleMatrix& Y) {
  const std::size_t n = X.rows();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) total += h_term(k, X.row(i), Y.row(i), X.row(j), Y.row(j));
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

TEST_CASE("h_term") {
  const auto k = KernelSpec::gaussian(1.0);
  CHECK(h_term(k, v({0.3}), v({0.3}), v({-1.2}), v({-1.2})) == 0.0);
  CHECK(h_term(k, v({0}), v({2}), v({1}), v({3})) == doctest::Approx(0.36775603136735563).epsilon(1e-12));
  CHECK_THROWS_AS(h_term(k, v({0}), v({2, 1}), v({1}), v({3})), ArgumentError);

  Rng rng(4);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 1000; ++t) {
    const auto a = v({nd(rng), nd(rng)}), b = v({nd(rng), nd(rng)}), c = v({nd(rng), nd(rng)}), d = v({nd(rng), nd(rng)});
    CHECK(std::abs(h_term(k, a, b, c, d) - h_term(k, c, d, a, b)) <= 1e-15);
  }
}

TEST_CASE("mmd_u_squared hand example and identical samples") {
  const auto k = KernelSpec::gaussian(1.0);
  const auto X = SampleMatrix::from_rows({{0.0}, {1.0}});
  const auto Y = SampleMatrix::from_rows({{2.0}, {3.0}});
  const auto est = mmd_u_squared(k, X, Y);
  CHECK(est.estimator == EstimatorKind::u_statistic);
  CHECK(std::abs(est.value - 0.36775603136735563) <= 1e-9);

  Rng rng(1);
  const auto Z = gaussian_rows(rng, 40, 3);
  CHECK(mmd_u_squared(k, Z, Z).value == 0.0);
  CHECK(mmd_v_squared(k, Z, Z).value == 0.0);
  CHECK(mmd_u_squared(KernelSpec::laplacian(1.0), Z, Z).value == 0.0);
}

TEST_CASE("mmd_u_squared matches brute force") {
  Rng rng(9);
  const auto X = gaussian_rows(rng, 25, 2);
  const auto Y = gaussian_rows(rng, 25, 2, 0.5);
  for (const auto& k : {KernelSpec::gaussian(1.0), KernelSpec::laplacian(2.0)})
    CHECK(mmd_u_squared(k, X, Y).value == doctest::Approx(brute_force_u(k, X, Y)).epsilon(1e-12));
}

TEST_CASE("estimator argument errors") {
  const auto k = KernelSpec::gaussian(1.0);
  const auto one = SampleMatrix::from_rows({{0.0}});
  CHECK_THROWS_AS(mmd_u_squared(k, one, one), ArgumentError);
  const auto two = SampleMatrix::from_rows({{0.0}, {1.0}});
  const auto three = SampleMatrix::from_rows({{0.0}, {1.0}, {2.0}});
  CHECK_THROWS_AS(mmd_u_squared(k, two, three), ArgumentError);
  CHECK_THROWS_AS(mmd_v_squared(k, two, three), ArgumentError);
  CHECK_NOTHROW(mmd_v_squared(k, one, one));
}

TEST_CASE("mmd_v_squared") {
  const auto k = KernelSpec::gaussian(1.0);
  const auto est = mmd_v_squared(k, SampleMatrix::from_rows({{0.0}}), SampleMatrix::from_rows({{1.0}}));
  CHECK(est.estimator == EstimatorKind::v_statistic);
  CHECK(est.value == doctest::Approx(2.0 - 2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("property: |U - V| <= 8 nu / (n - 1) and swap invariance") {
  Rng rng(17);
  std::uniform_real_distribution<double> shift(-2, 2);
  for (std::size_t n : {5u, 50u}) {
    for (int t = 0; t < 50; ++t) {
      const auto X = gaussian_rows(rng, n, 2);
      const auto Y = gaussian_rows(rng, n, 2, shift(rng), 1.5);
      for (const auto& k : {KernelSpec::gaussian(1.0), KernelSpec::laplacian(0.7)}) {
        const double u = mmd_u_squared(k, X, Y).value;
        const double vv = mmd_v_squared(k, X, Y).value;
        CHECK(vv >= 0.0);
        CHECK(std::abs(u - vv) <= 8.0 / static_cast<double>(n - 1) + 1e-10);
        CHECK(std::abs(u - mmd_u_squared(k, Y, X).value) <= 1e-12);
        CHECK(std::abs(vv - mmd_v_squared(k, Y, X).value) <= 1e-12);
      }
    }
  }
}

TEST_CASE("U-statistic is unbiased under P = Q") {
  const auto k = KernelSpec::gaussian(1.0);
  const int R = 200;
  std::vector<double> vals;
  for (int r = 0; r < R; ++r) {
    Rng rng = make_rng(derive_seed(99, static_cast<std::uint64_t>(r)));
    const auto X = gaussian_rows(rng, 500, 1);
    const auto Y = gaussian_rows(rng, 500, 1);
    vals.push_back(mmd_u_squared(k, X, Y).value);
  }
  double mean = 0;
  for (double x : vals) mean += x;
  mean /= R;
  double ss = 0;
  for (double x : vals) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (R - 1)) / std::sqrt(R);
  CHECK(std::abs(mean) <= 3 * se);
}

TEST_CASE("closed-form population MMD") {
  const auto P = gauss1(0, 1);
  CHECK(population_mmd_squared_gaussian_closed_form(1.0, P, P).value == 0.0);
  const auto est = population_mmd_squared_gaussian_closed_form(1.0, P, gauss1(1, 1));
  CHECK(est.estimator == EstimatorKind::closed_form);
  // 2/sqrt(5) (1 - exp(-1/5))
  CHECK(est.value == doctest::Approx(0.16213214333913087).epsilon(1e-12));

  const GaussianDistSpec A(Eigen::Vector2d(0.3, -1.0), (Eigen::Matrix2d() << 2.0, 0.4, 0.4, 0.5).finished());
  CHECK(population_mmd_squared_gaussian_closed_form(0.8, A, A).value == 0.0);
}

TEST_CASE("closed form agrees with the 1-D integral by quadrature") {
  // gamma^2 = E k(X,X') + E k(Y,Y') - 2 E k(X,Y) with each term a 1-D Gaussian
  // integral of exp(-w^2/s) against N(m, S); trapezoid rule on a wide grid.
  auto term = [](double s, double m, double S) {
    const double lo = m - 12 * std::sqrt(S), hi = m + 12 * std::sqrt(S);
    const int steps = 200000;
    const double h = (hi - lo) / steps;
    double acc = 0;
    for (int i = 0; i <= steps; ++i) {
      const double w = lo + i * h;
      const double f = std::exp(-w * w / s) * std::exp(-(w - m) * (w - m) / (2 * S)) / std::sqrt(2 * M_PI * S);
      acc += (i == 0 || i == steps) ? 0.5 * f : f;
    }
    return acc * h;
  };
  const double sigma = 1.3, mp = 0.2, vp = 0.7, mq = -0.9, vq = 1.6;
  const double s = sigma * sigma;
  const double quad = term(s, 0, 2 * vp) + term(s, 0, 2 * vq) - 2 * term(s, mp - mq, vp + vq);
  const double cf = population_mmd_squared_gaussian_closed_form(sigma, gauss1(mp, vp), gauss1(mq, vq)).value;
  CHECK(cf == doctest::Approx(quad).epsilon(1e-9));
}

TEST_CASE("closed form rejects bad covariance") {
  CHECK_THROWS_AS(gauss1(0, -1), ArgumentError);
  CHECK_THROWS_AS(GaussianDistSpec(Eigen::Vector2d(0, 0), (Eigen::Matrix2d() << 1, 0.5, 0.4, 1).finished()),
                  ArgumentError);
}

TEST_CASE("Monte-Carlo oracle") {
  const auto k = KernelSpec::gaussian(1.0);
  const Sampler p = make_sampler(gauss1(0, 1));
  const Sampler q = make_sampler(gauss1(1, 1));
  const auto a = population_mmd_squared_monte_carlo(k, p, q, 400000, 3);
  CHECK(a.estimator == EstimatorKind::monte_carlo);
  REQUIRE(a.std_error.has_value());
  CHECK(std::abs(a.value - 0.16213214333913087) <= 3 * *a.std_error);

  const auto b = population_mmd_squared_monte_carlo(k, p, q, 400000, 3, 4);
  CHECK(a.value == b.value);
  CHECK(*a.std_error == *b.std_error);

  CHECK_THROWS_AS(population_mmd_squared_monte_carlo(k, p, q, 1, 3), ArgumentError);
}

TEST_CASE("Monte-Carlo oracle is centred at 0 when P = Q") {
  const auto k = KernelSpec::laplacian(1.0);
  const Sampler p = make_sampler(UniformBox(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)));
  double sum = 0, sum_se2 = 0;
  const int R = 20;
  for (int r = 0; r < R; ++r) {
    const auto e = population_mmd_squared_monte_carlo(k, p, p, 20000, static_cast<std::uint64_t>(r));
    sum += e.value;
    sum_se2 += *e.std_error * *e.std_error;
  }
  CHECK(std::abs(sum / R) <= 3 * std::sqrt(sum_se2) / R);
}

TEST_CASE("Monte-Carlo oracle through a composite kernel") {
  const auto f = FunctionMap::affine(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Zero(1));
  const auto k = compose(KernelSpec::gaussian(1.0), f);
  const auto mc = population_mmd_squared_monte_carlo(k, make_sampler(gauss1(0, 1)), make_sampler(gauss1(1, 1)),
                                                     400000, 8);
  const auto cf = population_mmd_squared_gaussian_closed_form(1.0, gauss1(0, 0.25), gauss1(0.5, 0.25));
  CHECK(std::abs(mc.value - cf.value) <= 3 * *mc.std_error);
}
