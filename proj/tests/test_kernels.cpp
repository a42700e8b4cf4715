#include "divels/errors.hpp"
#include "divels/kernels.hpp"

#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace divels;

namespace {

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

// Counts monomials of total degree <= p in d variables by brute force over
// the box {0..p}^d.
std::size_t count_monomials(int d, int p) {
  std::size_t count = 0;
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  while (true) {
    int total = 0;
    for (int v : e) total += v;
    if (total <= p) ++count;
    int i = 0;
    while (i < d && e[static_cast<std::size_t>(i)] == p) e[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
    ++e[static_cast<std::size_t>(i)];
  }
  return count;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Independent expansion of (<w,w'> + c)^p for 2-d inputs: sum over
// multi-indices (k0, k1, k2) with k0 + k1 + k2 = p of the multinomial
// coefficient times c^k0 (w1 w1')^k1 (w2 w2')^k2, grouped into
// feature products.
double expanded_poly2d(const Eigen::Vector2d& w, const Eigen::Vector2d& v, int p, double c) {
  double total = 0.0;
  for (int k1 = 0; k1 <= p; ++k1)
    for (int k2 = 0; k1 + k2 <= p; ++k2) {
      const int k0 = p - k1 - k2;
      const double coef = factorial(p) / (factorial(k0) * factorial(k1) * factorial(k2));
      total += coef * std::pow(c, k0) * std::pow(w(0) * v(0), k1) * std::pow(w(1) * v(1), k2);
    }
  return total;
}

}  // namespace

TEST_CASE("eval_kernel examples") {
  const Eigen::Vector4d e1(1, 0, 0, 0);
  CHECK(eval_kernel(KernelSpec::polynomial(3, 1.0), e1, e1) == 8.0);
  CHECK(eval_kernel(KernelSpec::linear(), Eigen::Vector2d(2, 3), Eigen::Vector2d(0, 0)) == 0.0);

  const Eigen::Vector2d w(0.5, 0.5), v(1, 1);
  const auto spec = KernelSpec::polynomial(3, 1.0);
  FeatureMap phi(spec, 2);
  const double k = eval_kernel(spec, w, v);
  CHECK(k == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(phi.featurize(w).dot(phi.featurize(v)) == doctest::Approx(k).epsilon(1e-12));
  CHECK(expanded_poly2d(w, v, 3, 1.0) == doctest::Approx(k).epsilon(1e-12));
}

TEST_CASE("rbf kernel value") {
  const Eigen::Vector2d w(0, 0), v(3, 4);
  CHECK(eval_kernel(KernelSpec::rbf(2.0), w, v) == doctest::Approx(std::exp(-25.0 / 8.0)));
  CHECK(eval_kernel(KernelSpec::rbf(2.0), w, w) == 1.0);
}

TEST_CASE("eval_kernel rejects mismatched dimensions and invalid specs") {
  CHECK_THROWS_AS(eval_kernel(KernelSpec::linear(), Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3)),
                  InputError);
  CHECK_THROWS_AS(KernelSpec::polynomial(0, 1.0).validate(), InputError);
  CHECK_THROWS_AS(KernelSpec::polynomial(2, -1.0).validate(), InputError);
  CHECK_THROWS_AS(KernelSpec::rbf(0.0).validate(), InputError);
  CHECK_THROWS_AS(eval_kernel(KernelSpec::rbf(-1.0), Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)),
                  InputError);
}

TEST_CASE("kernel symmetry is exact") {
  const std::vector<KernelSpec> specs = {KernelSpec::linear(), KernelSpec::polynomial(2, 1.0),
                                         KernelSpec::polynomial(3, 0.5), KernelSpec::rbf(0.7)};
  const auto a = random_points(200, 4, 1), b = random_points(200, 4, 2);
  for (const auto& s : specs)
    for (int i = 0; i < a.rows(); ++i) {
      const Eigen::VectorXd x = a.row(i).transpose(), y = b.row(i).transpose();
      REQUIRE(eval_kernel(s, x, y) == eval_kernel(s, y, x));
    }
}

TEST_CASE("gram basics") {
  const auto spec = KernelSpec::polynomial(3, 1.0);
  Eigen::MatrixXd one(1, 3);
  one << 0.2, -0.4, 1.5;
  const auto g1 = gram(spec, one, one);
  REQUIRE(g1.rows() == 1);
  CHECK(g1(0, 0) == eval_kernel(spec, one.row(0).transpose(), one.row(0).transpose()));

  const auto pts = random_points(30, 3, 5);
  const auto g = gram(spec, pts, pts);
  CHECK(g == g.transpose());

  const auto other = random_points(7, 3, 6);
  const auto rect = gram(spec, pts, other);
  CHECK(rect.rows() == 30);
  CHECK(rect.cols() == 7);
  CHECK(rect(4, 5) == eval_kernel(spec, pts.row(4).transpose(), other.row(5).transpose()));

  CHECK_THROWS_AS(gram(spec, Eigen::MatrixXd(0, 3), pts), InputError);
  CHECK_THROWS_AS(gram(spec, pts, random_points(3, 2, 1)), InputError);
  CHECK_THROWS_AS(gram_serial(spec, Eigen::MatrixXd(0, 3), pts), InputError);
}

TEST_CASE("parallel gram matches the serial reference bit for bit") {
  for (const auto& s : {KernelSpec::linear(), KernelSpec::polynomial(3, 1.0), KernelSpec::rbf(1.3)}) {
    const auto a = random_points(120, 4, 11), b = random_points(90, 4, 12);
    CHECK(gram(s, a, b) == gram_serial(s, a, b));
  }
}

TEST_CASE("gram is PSD relative to trace") {
  const std::vector<KernelSpec> specs = {KernelSpec::linear(), KernelSpec::polynomial(2, 1.0),
                                         KernelSpec::polynomial(3, 1.0), KernelSpec::polynomial(4, 0.0),
                                         KernelSpec::rbf(0.5)};
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (const auto& s : specs) {
      const int n = 10 + static_cast<int>(seed) * 4;
      const auto pts = random_points(n, 3, 100 + seed, -2.0, 2.0);
      const Eigen::MatrixXd g = gram(s, pts, pts);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
      REQUIRE(es.eigenvalues().minCoeff() >= -1e-9 * g.trace());
    }
}

TEST_CASE("featurize examples") {
  FeatureMap lin(KernelSpec::linear(), 2);
  const Eigen::Vector2d ab(1.25, -3.5);
  CHECK(lin.featurize(ab) == Eigen::VectorXd(ab));
  CHECK(lin.output_dim() == 2);

  FeatureMap p11(KernelSpec::polynomial(1, 1.0), 1);
  Eigen::VectorXd t(1);
  t << 0.75;
  const auto f = p11.featurize(t);
  REQUIRE(f.size() == 2);
  CHECK(f(0) == 1.0);
  CHECK(f(1) == 0.75);

  CHECK(FeatureMap(KernelSpec::polynomial(3, 1.0), 4).output_dim() == 35);
  CHECK(FeatureMap(KernelSpec::polynomial(3, 1.0), 3).output_dim() == 20);
  CHECK_THROWS_AS(FeatureMap(KernelSpec::rbf(1.0), 2), UnsupportedFamilyError);
  CHECK_THROWS_AS(lin.featurize(Eigen::Vector3d(1, 2, 3)), InputError);
}

TEST_CASE("graded lexicographic order") {
  const auto m = graded_lex_monomials(2, 2);
  const std::vector<std::vector<int>> expect = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(m == expect);

  const auto m3 = graded_lex_monomials(3, 3);
  std::set<std::vector<int>> seen(m3.begin(), m3.end());
  CHECK(seen.size() == m3.size());
  for (std::size_t i = 1; i < m3.size(); ++i) {
    int a = 0, b = 0;
    for (int v : m3[i - 1]) a += v;
    for (int v : m3[i]) b += v;
    CHECK(a <= b);
    if (a == b) CHECK(m3[i - 1] > m3[i]);
  }
}

TEST_CASE("output_dim matches enumerated monomial count") {
  for (int d = 1; d <= 6; ++d)
    for (int p = 1; p <= 4; ++p) {
      const std::size_t brute = count_monomials(d, p);
      CHECK(binomial(d + p, p) == brute);
      CHECK(graded_lex_monomials(d, p).size() == brute);
      CHECK(static_cast<std::size_t>(FeatureMap(KernelSpec::polynomial(p, 1.0), d).output_dim()) == brute);
    }
}

TEST_CASE("kernel trick on 1000 random pairs") {
  const std::vector<KernelSpec> specs = {KernelSpec::linear(), KernelSpec::polynomial(1, 1.0),
                                         KernelSpec::polynomial(2, 1.0), KernelSpec::polynomial(3, 1.0),
                                         KernelSpec::polynomial(3, 0.0), KernelSpec::polynomial(4, 2.5)};
  for (const auto& s : specs)
    for (int d : {1, 2, 4}) {
      FeatureMap phi(s, d);
      const auto a = random_points(1000, d, 21, -2.0, 2.0), b = random_points(1000, d, 22, -2.0, 2.0);
      const auto fa = phi.featurize_rows(a), fb = phi.featurize_rows(b);
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const double k = eval_kernel(s, a.row(i).transpose(), b.row(i).transpose());
        worst = std::max(worst, std::abs(fa.row(i).dot(fb.row(i)) - k) / (1.0 + std::abs(k)));
      }
      CHECK(worst <= 1e-10);
    }
}

TEST_CASE("2-d polynomial feature products match an independent expansion") {
  const auto a = random_points(200, 2, 31, -2.0, 2.0), b = random_points(200, 2, 32, -2.0, 2.0);
  for (int p = 1; p <= 4; ++p) {
    FeatureMap phi(KernelSpec::polynomial(p, 0.8), 2);
    for (int i = 0; i < a.rows(); ++i) {
      const Eigen::Vector2d w = a.row(i).transpose(), v = b.row(i).transpose();
      const double want = expanded_poly2d(w, v, p, 0.8);
      REQUIRE(phi.featurize(w).dot(phi.featurize(v)) == doctest::Approx(want).epsilon(1e-11));
    }
  }
}

TEST_CASE("rkhs_dimension") {
  CHECK(rkhs_dimension(KernelSpec::linear(), 2) == 2);
  CHECK(rkhs_dimension(KernelSpec::polynomial(3, 1.0), 4) == 35);
  CHECK(rkhs_dimension(KernelSpec::polynomial(3, 1.0), 3) == 20);
  // homogeneous kernel: only degree-p monomials survive
  CHECK(rkhs_dimension(KernelSpec::polynomial(2, 0.0), 3) == 6);
  CHECK_THROWS_AS(rkhs_dimension(KernelSpec::rbf(1.0), 2), UnsupportedFamilyError);
}

TEST_CASE("kernel family names") {
  CHECK(parse_kernel_family("linear") == KernelFamily::Linear);
  CHECK(parse_kernel_family("polynomial") == KernelFamily::Polynomial);
  CHECK(parse_kernel_family("poly") == KernelFamily::Polynomial);
  CHECK(parse_kernel_family("rbf") == KernelFamily::Rbf);
  CHECK_THROWS_AS(parse_kernel_family("matern"), InputError);
  for (auto f : {KernelFamily::Linear, KernelFamily::Polynomial, KernelFamily::Rbf})
    CHECK(parse_kernel_family(to_string(f)) == f);
}
