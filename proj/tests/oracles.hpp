#pragma once

// Slow reference implementations. Nothing here calls into the library
// except for the plain data types, so that every comparison is two
// independently written computations.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "zncount/transfer.hpp"
#include "zncount/zn_core.hpp"

namespace oracle {

using LComplex = std::complex<long double>;
using zncount::CyclicFunction;

inline std::int64_t md(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

// e(p / q) with p reduced first, in long double.
inline LComplex e(std::int64_t p, std::int64_t q) {
  const long double t = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(md(p, q)) /
                        static_cast<long double>(q);
  return {std::cos(t), std::sin(t)};
}

inline LComplex e_real(long double t) {
  const long double x = 2.0L * std::numbers::pi_v<long double> * t;
  return {std::cos(x), std::sin(x)};
}

inline std::vector<LComplex> dft(std::span<const zncount::Complex> f) {
  const auto n = static_cast<std::int64_t>(f.size());
  std::vector<LComplex> out(f.size());
  for (std::int64_t a = 0; a < n; ++a) {
    LComplex s = 0;
    for (std::int64_t x = 0; x < n; ++x) s += LComplex(f[x].real(), f[x].imag()) * e(a * x, n);
    out[a] = s;
  }
  return out;
}

inline std::vector<LComplex> dft(const CyclicFunction& f) { return dft(f.values()); }

inline std::vector<double> convolve(std::span<const double> f, std::span<const double> g) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out[(a + b) % n] += f[a] * g[b];
  return out;
}

// Sum of prod f(x_i) over every x in Z_N^d with sum a_i x_i = 0, by full
// enumeration of all N^d tuples.
inline long double count_enumerate(std::span<const double> f, std::span<const std::int64_t> a) {
  const auto n = static_cast<std::int64_t>(f.size());
  const std::size_t d = a.size();
  std::vector<std::int64_t> x(d, 0);
  long double total = 0.0L;
  while (true) {
    std::int64_t s = 0;
    long double p = 1.0L;
    for (std::size_t i = 0; i < d; ++i) {
      s += a[i] * x[i];
      p *= f[x[i]];
    }
    if (md(s, n) == 0) total += p;
    std::size_t i = 0;
    while (i < d && ++x[i] == n) x[i++] = 0;
    if (i == d) break;
  }
  return total;
}

// ||a/M - b/N|| <= band / M, evaluated through the rational (aN - bM) / (MN).
inline bool in_band(std::int64_t a, std::int64_t M, std::int64_t N, std::int64_t b, double band) {
  const std::int64_t MN = M * N;
  const std::int64_t r = md(a * N - b * M, MN);
  const std::int64_t dist = std::min(r, MN - r);
  return static_cast<long double>(dist) <= static_cast<long double>(band) * static_cast<long double>(N);
}

// g^(a) = N^{-1} |I|^{-L+1} sum_{b in Z_N} e(u b / N) F(b) D(a/M - b/N)^L,
// D(t) = sum_{|n| <= I_half} e(n t), F the transform of the dilated f.
inline std::vector<LComplex> g_hat_dual(const std::vector<LComplex>& F, const zncount::TransferPlan& p,
                                        std::int64_t u_g) {
  const std::int64_t N = p.N, M = p.M;
  const long double scale =
      std::pow(static_cast<long double>(p.I_size()), -static_cast<long double>(p.L - 1)) /
      static_cast<long double>(N);
  std::vector<LComplex> out(static_cast<std::size_t>(M));
  for (std::int64_t a = 0; a < M; ++a) {
    LComplex s = 0;
    for (std::int64_t b = 0; b < N; ++b) {
      const long double t = static_cast<long double>(a) / M - static_cast<long double>(b) / N;
      LComplex D = 0;
      for (std::int64_t n = -p.I_half; n <= p.I_half; ++n) D += e_real(n * t);
      LComplex DL = 1;
      for (std::int64_t j = 0; j < p.L; ++j) DL *= D;
      s += e(u_g * b, N) * F[b] * DL;
    }
    out[a] = s * scale;
  }
  return out;
}

// h = (1_{u + V} g) * 1_W on Z_M, straight from the definition.
inline std::vector<double> h_from_definition(std::span<const zncount::Complex> g, std::int64_t m1,
                                             std::int64_t m2, std::int64_t u) {
  const std::int64_t M = m1 * m2;
  std::vector<double> out(static_cast<std::size_t>(M), 0.0);
  for (std::int64_t n = 0; n < M; ++n) {
    long double s = 0;
    for (std::int64_t t = 0; t < m1; ++t) {
      const std::int64_t y = md(n - m2 * t, M);
      if (md(y - u, M) % m1 == 0) s += g[y].real();
    }
    out[n] = static_cast<double>(s);
  }
  return out;
}

// The Sigma inner expression at translate u, written out term by term:
//   V = m1 Z_M, W = m2 Z_M, v(a) the V-component of a, w(a) = a - v(a),
//   H(v) = sum_{x in W} e(-x u / M) G(v + x),
//   inner = sum_{a in Xc} |G(a) - e(w(a) u / M) H(v(a))|^2 + sum_{v in V \ v(Xc)} |H(v)|^2.
inline long double sigma_inner(std::span<const zncount::Complex> G, std::int64_t m1, std::int64_t m2,
                               std::span<const std::int64_t> Xc, std::int64_t u) {
  const std::int64_t M = m1 * m2;
  auto v_of = [&](std::int64_t a) {
    for (std::int64_t j = 0; j < m2; ++j)
      if (md(j * m1 - a, m2) == 0) return j * m1;
    return std::int64_t{-1};
  };
  auto H = [&](std::int64_t v) {
    LComplex s = 0;
    for (std::int64_t t = 0; t < m1; ++t) {
      const std::int64_t x = t * m2;
      s += e(-x * u, M) * LComplex(G[md(v + x, M)].real(), G[md(v + x, M)].imag());
    }
    return s;
  };
  std::vector<bool> used(static_cast<std::size_t>(M), false);
  long double total = 0;
  for (std::int64_t a : Xc) {
    const std::int64_t v = v_of(a);
    used[v] = true;
    const LComplex diff = LComplex(G[a].real(), G[a].imag()) - e(md(a - v, M) * u, M) * H(v);
    total += std::norm(diff);
  }
  for (std::int64_t j = 0; j < m2; ++j) {
    const std::int64_t v = j * m1;
    if (!used[v]) total += std::norm(H(v));
  }
  return total;
}

}  // namespace oracle
