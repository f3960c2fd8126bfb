#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "zncount/counting.hpp"
#include "zncount/errors.hpp"
#include "zncount/examples.hpp"
#include "zncount/random.hpp"

using namespace zncount;

namespace {

CyclicFunction random_density(std::int64_t n, Rng& rng, bool binary = false) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = binary ? static_cast<double>(rng.below(2)) : rng.uniform();
  return CyclicFunction::from_real(v);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(EquationForm, Validation) {
  const EquationForm eq({1, 1, -2});
  EXPECT_EQ(eq.d(), 3);
  EXPECT_EQ(eq.big_d(), 24);
  EXPECT_EQ(eq.abs_sum(), 4);
  EXPECT_EQ(EquationForm::parse(" 1, 1,1 ,-3").d(), 4);
  EXPECT_THROW(EquationForm({1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(EquationForm({1, -1}), std::invalid_argument);
  EXPECT_THROW(EquationForm({2, 0, -2}), std::invalid_argument);
  EXPECT_THROW(EquationForm::parse("1,x,-1"), std::invalid_argument);
}

TEST(BruteForce, ConstantOne) {
  for (std::int64_t n : {5, 8, 12}) {
    for (const auto& c : {std::vector<std::int64_t>{1, 1, -2}, std::vector<std::int64_t>{2, 2, -4},
                          std::vector<std::int64_t>{1, 1, 1, -3}}) {
      std::int64_t g = 0;
      for (std::int64_t a : c) g = std::gcd(g, a);
      const double expected = static_cast<double>(std::gcd(g, n)) * std::pow(static_cast<double>(n), c.size() - 1);
      EXPECT_EQ(count_bruteforce(CyclicFunction::constant(n, 1.0), EquationForm(c)), expected);
    }
  }
}

TEST(BruteForce, SmallIndicator) {
  const std::int64_t s[] = {0, 1, 2};
  const auto f = CyclicFunction::indicator(5, s);
  const EquationForm eq({1, 1, -2});
  EXPECT_EQ(count_bruteforce(f, eq), 5.0);
  EXPECT_NEAR(count_fourier(f, eq), 5.0, 1e-9);
  const auto values = f.real_values();
  EXPECT_EQ(static_cast<double>(oracle::count_enumerate(values, eq.coeffs())), 5.0);
}

TEST(BruteForce, MatchesFullEnumeration) {
  Rng rng(21);
  const std::vector<std::vector<std::int64_t>> forms{{1, 1, 1, -3}, {1, 1, -2}, {2, 2, -4}, {3, -1, -2},
                                                     {1, -1, 2, -2}};
  for (std::int64_t n : {7, 8, 12, 13}) {
    for (const auto& c : forms) {
      const auto f = random_density(n, rng, n == 7);
      const EquationForm eq(c);
      const auto values = f.real_values();
      const double ref = static_cast<double>(oracle::count_enumerate(values, eq.coeffs()));
      EXPECT_NEAR(count_bruteforce(f, eq), ref, 1e-12 * std::max(1.0, ref)) << n << " " << eq.to_string();
    }
  }
}

TEST(Fourier, Examples) {
  for (double theta : {0.25, 0.5, 1.0}) {
    const auto f = CyclicFunction::constant(53, theta);
    EXPECT_NEAR(count_fourier(f, EquationForm({1, 1, -2})), theta * theta * theta * 53 * 53,
                1e-9 * 53 * 53);
  }
}

TEST(Fourier, AgreesWithBruteForce) {
  Rng rng(22);
  const std::vector<std::vector<std::int64_t>> forms{{1, 1, -2}, {1, 1, 1, -3}, {1, 2, -3}, {1, -1, 3, -3}};
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t n = 2 + rng.below(100);
    const EquationForm eq(forms[static_cast<std::size_t>(trial) % forms.size()]);
    const auto f = random_density(n, rng);
    const double brute = count_bruteforce(f, eq);
    EXPECT_LE(rel(count_fourier(f, eq), brute), 1e-6) << n;
    EXPECT_LE(rel(count_fourier(f, eq, DftMethod::bluestein), brute), 1e-6) << n;
  }
}

TEST(Fourier, ImaginaryResidueIsReported) {
  std::vector<Complex> F(7, 0.0);
  F[0] = 1.0;
  F[1] = Complex(0.0, 3.0);
  F[5] = Complex(0.0, 3.0);
  EXPECT_THROW(count_fourier_from_transform(CyclicFunction(7, F), EquationForm({1, 1, -2})),
               NumericalInconsistency);
}

TEST(Counting, DilationAndScaling) {
  Rng rng(23);
  const std::int64_t n = 31;
  const EquationForm eq({1, 1, 1, -3});
  std::vector<double> v(n);
  for (double& x : v) x = static_cast<double>(rng.below(65)) / 64.0;
  const auto f = CyclicFunction::from_real(v);
  const double base = count_bruteforce(f, eq);
  for (std::int64_t q = 1; q < n; ++q) {
    std::vector<double> w(n);
    for (std::int64_t x = 0; x < n; ++x) w[x] = v[(q * x) % n];
    EXPECT_EQ(count_bruteforce(CyclicFunction::from_real(w), eq), base) << q;
  }
  std::vector<double> half(v);
  for (double& x : half) x *= 0.5;
  EXPECT_NEAR(count_bruteforce(CyclicFunction::from_real(half), eq), base / 16.0, 1e-12 * base);
  EXPECT_GE(base, 0.0);
}

TEST(LowerBound, Examples) {
  for (double eps : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(theorem_lower_bound(0.5, 101, 1, eps, 3), 0.5 * 50.5 * 50.5 / 640.0, 1e-12);
  }
  const double expected = 0.1 * std::pow(4.0, -3) * std::pow(10.0, -2.3) * 0.5 * 50.5 * 50.5;
  EXPECT_NEAR(theorem_lower_bound(0.5, 101, 10, 0.1, 3), expected, 1e-12 * expected);
  for (int d = 3; d <= 6; ++d) {
    EXPECT_LT(theorem_lower_bound(0.3, 1000, 2, 0.2, d), std::pow(0.3, d) * std::pow(1000.0, d - 1));
  }
  EXPECT_THROW(theorem_lower_bound(0.0, 101, 5, 0.1, 3), std::invalid_argument);
  EXPECT_THROW(theorem_lower_bound(0.5, 101, 0, 0.1, 3), std::invalid_argument);
  EXPECT_THROW(theorem_lower_bound(0.5, 101, 5, 1.0, 3), std::invalid_argument);
  EXPECT_THROW(theorem_lower_bound(0.5, 101, 5, 0.1, 2), std::invalid_argument);
}

TEST(Certify, ConstantHalf) {
  const auto c = certify(CyclicFunction::constant(101, 0.5), EquationForm({1, 1, -2}), 0.1, 5,
                         HypothesisMode::relaxed);
  EXPECT_TRUE(c.hypothesis.passed);
  EXPECT_NEAR(c.count, 0.125 * 101 * 101, 1e-9 * 101 * 101);
  EXPECT_GT(c.count, c.lower_bound);
  EXPECT_TRUE(c.satisfied);
  EXPECT_FALSE(c.hypothesis_failed);
}

TEST(Certify, ZeroFunction) {
  const auto c = certify(CyclicFunction::zeros(101), EquationForm({1, 1, -2}), 0.1, 5, HypothesisMode::relaxed);
  EXPECT_TRUE(c.hypothesis_failed);
  EXPECT_FALSE(c.satisfied);
}

TEST(Certify, SumsetDensities) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const std::int64_t n = 101;
    const auto S = random_subset(n, 81, rng);
    const auto f = sumset_density(n, S, 6);
    const auto c = certify(f, EquationForm({1, 1, -2}), 0.1, 5, HypothesisMode::relaxed, CountMethod::brute);
    EXPECT_TRUE(c.hypothesis.passed) << seed;
    EXPECT_TRUE(c.satisfied) << seed;
  }
}
