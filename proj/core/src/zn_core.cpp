#include "zncount/zn_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace zncount {

// ---------------------------------------------------------------------------
// Integer helpers
// ---------------------------------------------------------------------------

std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t n) {
  __extension__ typedef __int128 wide;
  const wide r = static_cast<wide>(mod(a, n)) * mod(b, n) % n;
  return static_cast<std::int64_t>(r);
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("mod_inverse: modulus must be positive");
  std::int64_t r0 = n, r1 = mod(a, n);
  std::int64_t t0 = 0, t1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    r0 = std::exchange(r1, r0 - q * r1);
    t0 = std::exchange(t1, t0 - q * t1);
  }
  if (r0 != 1) {
    throw std::invalid_argument("mod_inverse: " + std::to_string(a) +
                                " is not invertible mod " + std::to_string(n));
  }
  return mod(t0, n);
}

namespace {

std::int64_t pow_mod(std::int64_t base, std::int64_t exp, std::int64_t n) {
  std::int64_t result = 1 % n;
  base = mod(base, n);
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, n);
    base = mul_mod(base, base, n);
    exp >>= 1;
  }
  return result;
}

}  // namespace

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::int64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // This witness set is deterministic below 3.3e24.
  for (std::int64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::int64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::int64_t next_prime(std::int64_t n) {
  if (n <= 2) return 2;
  while (!is_prime(n)) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// CyclicFunction
// ---------------------------------------------------------------------------

CyclicFunction::CyclicFunction(std::int64_t modulus, std::vector<Complex> values)
    : modulus_(modulus), values_(std::move(values)) {
  if (modulus_ < 1) throw std::invalid_argument("CyclicFunction: modulus must be >= 1");
  if (static_cast<std::int64_t>(values_.size()) != modulus_) {
    throw std::invalid_argument("CyclicFunction: expected " + std::to_string(modulus_) +
                                " values, got " + std::to_string(values_.size()));
  }
}

CyclicFunction CyclicFunction::zeros(std::int64_t modulus) {
  if (modulus < 1) throw std::invalid_argument("CyclicFunction: modulus must be >= 1");
  return CyclicFunction(modulus, std::vector<Complex>(static_cast<std::size_t>(modulus)));
}

CyclicFunction CyclicFunction::constant(std::int64_t modulus, double value) {
  if (modulus < 1) throw std::invalid_argument("CyclicFunction: modulus must be >= 1");
  return CyclicFunction(modulus,
                        std::vector<Complex>(static_cast<std::size_t>(modulus), value));
}

CyclicFunction CyclicFunction::from_real(std::span<const double> values) {
  return CyclicFunction(static_cast<std::int64_t>(values.size()),
                        std::vector<Complex>(values.begin(), values.end()));
}

CyclicFunction CyclicFunction::indicator(std::int64_t modulus,
                                         std::span<const std::int64_t> support) {
  auto f = zeros(modulus);
  for (std::int64_t s : support) f[s] = 1.0;
  return f;
}

bool CyclicFunction::is_real(double tol) const {
  return std::all_of(values_.begin(), values_.end(),
                     [tol](const Complex& z) { return std::abs(z.imag()) <= tol; });
}

bool CyclicFunction::is_density(double tol) const {
  return std::all_of(values_.begin(), values_.end(), [tol](const Complex& z) {
    return std::isfinite(z.real()) && std::abs(z.imag()) <= tol && z.real() >= -tol &&
           z.real() <= 1.0 + tol;
  });
}

std::vector<double> CyclicFunction::real_values() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](const Complex& z) { return z.real(); });
  return out;
}

void CyclicFunction::require_density(const char* what, double tol) const {
  if (!is_density(tol)) {
    throw std::invalid_argument(std::string(what) + ": function is not a density (values in [0,1])");
  }
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------
namespace {

// exp(sign * 2 pi i j / N) for j = 0..N-1, each entry evaluated directly.
std::vector<Complex> roots_of_unity(std::int64_t n, int sign) {
  std::vector<Complex> w(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    // Fold into (-N/2, N/2] so the angle is as small as possible.
    const double angle = sign * kTwoPi * static_cast<double>(centered(j, n)) /
                         static_cast<double>(n);
    w[static_cast<std::size_t>(j)] = {std::cos(angle), std::sin(angle)};
  }
  return w;
}

std::vector<Complex> dft_direct(std::span<const Complex> f, int sign) {
  const auto n = static_cast<std::int64_t>(f.size());
  const auto w = roots_of_unity(n, sign);
  std::vector<Complex> out(f.size());
  for (std::int64_t a = 0; a < n; ++a) {
    Complex acc = 0.0;
    std::int64_t idx = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      acc += f[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(idx)];
      idx += a;
      if (idx >= n) idx -= n;
    }
    out[static_cast<std::size_t>(a)] = acc;
  }
  return out;
}

// In-place iterative radix-2 FFT, exp(sign * 2 pi i / n) kernel.
void fft_pow2(std::vector<Complex>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto roots = roots_of_unity(static_cast<std::int64_t>(n), sign);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * roots[k * step];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Bluestein: a n = (a^2 + n^2 - (a-n)^2) / 2, so the transform is a chirp
// multiply, a linear convolution with the conjugate chirp, and a chirp multiply.
std::vector<Complex> dft_chirp(std::span<const Complex> f, int sign) {
  const auto n = static_cast<std::int64_t>(f.size());
  const std::int64_t two_n = 2 * n;
  std::vector<Complex> chirp(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    // exp(sign * pi i j^2 / N), with j^2 reduced mod 2N to keep the angle small.
    const std::int64_t sq = mul_mod(j, j, two_n);
    const double angle = sign * kTwoPi * 0.5 * static_cast<double>(centered(sq, two_n)) /
                         static_cast<double>(n);
    chirp[static_cast<std::size_t>(j)] = {std::cos(angle), std::sin(angle)};
  }
  std::size_t size = 1;
  while (size < static_cast<std::size_t>(2 * n - 1)) size <<= 1;

  std::vector<Complex> x(size), y(size);
  for (std::int64_t j = 0; j < n; ++j) {
    x[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(j)] * chirp[static_cast<std::size_t>(j)];
  }
  y[0] = std::conj(chirp[0]);
  for (std::int64_t j = 1; j < n; ++j) {
    y[static_cast<std::size_t>(j)] = std::conj(chirp[static_cast<std::size_t>(j)]);
    y[size - static_cast<std::size_t>(j)] = std::conj(chirp[static_cast<std::size_t>(j)]);
  }
  fft_pow2(x, -1);
  fft_pow2(y, -1);
  for (std::size_t i = 0; i < size; ++i) x[i] *= y[i];
  fft_pow2(x, +1);
  const double scale = 1.0 / static_cast<double>(size);
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (std::int64_t a = 0; a < n; ++a) {
    out[static_cast<std::size_t>(a)] =
        x[static_cast<std::size_t>(a)] * scale * chirp[static_cast<std::size_t>(a)];
  }
  return out;
}

std::vector<Complex> transform(std::span<const Complex> f, int sign, DftMethod method) {
  return method == DftMethod::direct ? dft_direct(f, sign) : dft_chirp(f, sign);
}

void require_transformable(const CyclicFunction& f, const char* what) {
  if (f.modulus() < 2) throw std::invalid_argument(std::string(what) + ": modulus must be >= 2");
}

}  // namespace

CyclicFunction dft(const CyclicFunction& f, DftMethod method) {
  require_transformable(f, "dft");
  return CyclicFunction(f.modulus(), transform(f.values(), +1, method));
}

CyclicFunction idft(const CyclicFunction& F, DftMethod method) {
  require_transformable(F, "idft");
  auto out = transform(F.values(), -1, method);
  const double scale = 1.0 / static_cast<double>(F.modulus());
  for (auto& z : out) z *= scale;
  return CyclicFunction(F.modulus(), std::move(out));
}

CyclicFunction cyclic_convolve(const CyclicFunction& f, const CyclicFunction& g) {
  if (f.modulus() != g.modulus()) {
    throw std::invalid_argument("cyclic_convolve: modulus mismatch (" +
                                std::to_string(f.modulus()) + " vs " +
                                std::to_string(g.modulus()) + ")");
  }
  const std::int64_t n = f.modulus();
  auto out = CyclicFunction::zeros(n);
  const auto fv = f.values();
  const auto gv = g.values();
  for (std::int64_t a = 0; a < n; ++a) {
    const Complex fa = fv[static_cast<std::size_t>(a)];
    if (fa == Complex{}) continue;
    for (std::int64_t b = 0; b < n; ++b) {
      std::int64_t s = a + b;
      if (s >= n) s -= n;
      out.values()[static_cast<std::size_t>(s)] += fa * gv[static_cast<std::size_t>(b)];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CRT
// ---------------------------------------------------------------------------

CrtSplit::CrtSplit(std::int64_t m1, std::int64_t m2) : m1_(m1), m2_(m2) {
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("CrtSplit: factors must be positive");
  if (std::gcd(m1, m2) != 1) {
    throw std::invalid_argument("CrtSplit: gcd(" + std::to_string(m1) + ", " +
                                std::to_string(m2) + ") != 1");
  }
  m1_inv_mod_m2_ = m2 == 1 ? 0 : mod_inverse(m1, m2);
  m2_inv_mod_m1_ = m1 == 1 ? 0 : mod_inverse(m2, m1);
}

std::int64_t CrtSplit::v(std::int64_t a) const {
  if (m2_ == 1) return 0;
  return m1_ * mul_mod(a, m1_inv_mod_m2_, m2_);
}

std::int64_t CrtSplit::w(std::int64_t a) const {
  if (m1_ == 1) return 0;
  return m2_ * mul_mod(a, m2_inv_mod_m1_, m1_);
}

std::vector<std::int64_t> CrtSplit::V() const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(m2_));
  for (std::int64_t x = 0; x < m2_; ++x) out[static_cast<std::size_t>(x)] = m1_ * x;
  return out;
}

std::vector<std::int64_t> CrtSplit::W() const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(m1_));
  for (std::int64_t x = 0; x < m1_; ++x) out[static_cast<std::size_t>(x)] = m2_ * x;
  return out;
}

CrtSplit crt_decompose(std::int64_t m1, std::int64_t m2) { return CrtSplit(m1, m2); }

// ---------------------------------------------------------------------------
// ||.||
// ---------------------------------------------------------------------------

std::int64_t mod_norm_numerator(std::int64_t p, std::int64_t q) {
  if (q <= 0) throw std::invalid_argument("mod_norm: denominator must be positive");
  const std::int64_t r = mod(p, q);
  return std::min(r, q - r);
}

double mod_norm(Rational x) {
  return static_cast<double>(mod_norm_numerator(x.num, x.den)) / static_cast<double>(x.den);
}

double mod_norm(double x) {
  const double r = x - std::floor(x);
  return std::min(r, 1.0 - r);
}

}  // namespace zncount
