#pragma once

/**
 * @file zn_core.hpp
 * @brief Arithmetic on the cyclic group Z_N.
 *
 * Fourier transforms use the positive-exponent, unnormalized convention
 *
 *     F(a) = sum_n f(n) * exp(+2 pi i a n / N)
 *
 * with inverse f(n) = N^{-1} sum_a F(a) * exp(-2 pi i a n / N). Every
 * downstream formula in the library assumes exactly this convention.
 */

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace zncount {

using Complex = std::complex<double>;

inline constexpr double kDensityTolerance = 1e-12;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Integer helpers
// ---------------------------------------------------------------------------

/// Representative of a in [0, n).
constexpr std::int64_t mod(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

/// Representative of a in (-n/2, n/2].
constexpr std::int64_t centered(std::int64_t a, std::int64_t n) {
  const std::int64_t r = mod(a, n);
  return 2 * r > n ? r - n : r;
}

std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t n);

/// Inverse of a modulo n; throws std::invalid_argument when gcd(a, n) != 1.
std::int64_t mod_inverse(std::int64_t a, std::int64_t n);

/// Deterministic for all 64-bit inputs.
bool is_prime(std::int64_t n);

/// Smallest prime >= n.
std::int64_t next_prime(std::int64_t n);

// ---------------------------------------------------------------------------
// CyclicFunction
// ---------------------------------------------------------------------------

/// A function Z_N -> C stored as N values indexed 0..N-1.
class CyclicFunction {
 public:
  CyclicFunction(std::int64_t modulus, std::vector<Complex> values);

  static CyclicFunction zeros(std::int64_t modulus);
  static CyclicFunction constant(std::int64_t modulus, double value);
  static CyclicFunction from_real(std::span<const double> values);
  /// Indicator of the given residues (reduced mod N).
  static CyclicFunction indicator(std::int64_t modulus,
                                  std::span<const std::int64_t> support);

  std::int64_t modulus() const noexcept { return modulus_; }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }

  /// Value at n mod N (any integer n).
  Complex operator()(std::int64_t n) const { return values_[mod(n, modulus_)]; }
  Complex& operator[](std::int64_t n) { return values_[mod(n, modulus_)]; }

  bool is_real(double tol = kDensityTolerance) const;
  /// Real-valued with every value in [0, 1] up to tol.
  bool is_density(double tol = kDensityTolerance) const;
  std::vector<double> real_values() const;

  /// Throws std::invalid_argument unless is_density(tol).
  void require_density(const char* what, double tol = kDensityTolerance) const;

 private:
  std::int64_t modulus_;
  std::vector<Complex> values_;
};

// ---------------------------------------------------------------------------
// Transforms and convolution
// ---------------------------------------------------------------------------

enum class DftMethod {
  direct,     ///< O(N^2) summation; the certified reference
  bluestein,  ///< O(N log N) chirp transform, any N
};

CyclicFunction dft(const CyclicFunction& f, DftMethod method = DftMethod::direct);
CyclicFunction idft(const CyclicFunction& F, DftMethod method = DftMethod::direct);

/// (f*g)(n) = sum_{a+b=n mod N} f(a) g(b), by direct summation.
CyclicFunction cyclic_convolve(const CyclicFunction& f, const CyclicFunction& g);

// ---------------------------------------------------------------------------
// CRT split of Z_M, M = m1 m2
// ---------------------------------------------------------------------------

/// V = m1 Z_M (order m2) and W = m2 Z_M (order m1), with Z_M = V (+) W.
class CrtSplit {
 public:
  CrtSplit(std::int64_t m1, std::int64_t m2);

  std::int64_t m1() const noexcept { return m1_; }
  std::int64_t m2() const noexcept { return m2_; }
  std::int64_t M() const noexcept { return m1_ * m2_; }

  /// Component of a in V: v(a) = 0 mod m1 and v(a) = a mod m2.
  std::int64_t v(std::int64_t a) const;
  /// Component of a in W: w(a) = a - v(a) mod M.
  std::int64_t w(std::int64_t a) const;

  bool in_V(std::int64_t a) const { return mod(a, M()) % m1_ == 0; }
  bool in_W(std::int64_t a) const { return mod(a, M()) % m2_ == 0; }

  std::vector<std::int64_t> V() const;
  std::vector<std::int64_t> W() const;

 private:
  std::int64_t m1_;
  std::int64_t m2_;
  std::int64_t m1_inv_mod_m2_;
  std::int64_t m2_inv_mod_m1_;
};

/// Throws std::invalid_argument unless m1, m2 >= 1 and gcd(m1, m2) = 1.
CrtSplit crt_decompose(std::int64_t m1, std::int64_t m2);

// ---------------------------------------------------------------------------
// Distance to the nearest integer
// ---------------------------------------------------------------------------

struct Rational {
  std::int64_t num;
  std::int64_t den;  ///< > 0
};

/// Exact numerator of ||p/q|| over q: min(p mod q, q - p mod q).
std::int64_t mod_norm_numerator(std::int64_t p, std::int64_t q);

double mod_norm(Rational x);
double mod_norm(double x);

}  // namespace zncount
