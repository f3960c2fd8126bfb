#include "zncount/examples.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zncount/spectrum.hpp"
#include "zncount/summation.hpp"

namespace zncount {

// ---------------------------------------------------------------------------
// Sieve
// ---------------------------------------------------------------------------

SievePack SievePack::build(std::int64_t limit) {
  if (limit < 1) throw std::invalid_argument("SievePack: limit must be >= 1");
  SievePack s;
  s.limit = limit;
  const std::size_t n = static_cast<std::size_t>(limit) + 1;
  s.moebius.assign(n, 1);
  s.tau.assign(n, 0);
  s.moebius[0] = 0;
  std::vector<char> composite(n, 0);
  std::vector<std::int64_t> primes;
  for (std::int64_t i = 2; i <= limit; ++i) {
    if (!composite[static_cast<std::size_t>(i)]) {
      primes.push_back(i);
      s.moebius[static_cast<std::size_t>(i)] = -1;
    }
    for (std::int64_t p : primes) {
      if (p * i > limit) break;
      composite[static_cast<std::size_t>(p * i)] = 1;
      if (i % p == 0) {
        s.moebius[static_cast<std::size_t>(p * i)] = 0;
        break;
      }
      s.moebius[static_cast<std::size_t>(p * i)] = -s.moebius[static_cast<std::size_t>(i)];
    }
  }
  for (std::int64_t d = 1; d <= limit; ++d) {
    for (std::int64_t m = d; m <= limit; m += d) ++s.tau[static_cast<std::size_t>(m)];
  }
  return s;
}

std::int64_t SievePack::max_tau(std::int64_t upto) const {
  if (upto < 1 || upto > limit) throw std::invalid_argument("SievePack::max_tau: out of range");
  return *std::max_element(tau.begin() + 1, tau.begin() + upto + 1);
}

// ---------------------------------------------------------------------------
// Sumsets
// ---------------------------------------------------------------------------

CyclicFunction sumset_density(std::int64_t N, std::span<const std::int64_t> S, int t) {
  if (N < 1) throw std::invalid_argument("sumset_density: N must be >= 1");
  if (S.empty()) throw std::invalid_argument("sumset_density: S must be nonempty");
  if (t < 2) throw std::invalid_argument("sumset_density: t must be >= 2");
  std::vector<std::int64_t> set;
  for (std::int64_t s : S) set.push_back(mod(s, N));
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  const double size = static_cast<double>(set.size());

  // Exact integer counts while |S|^{t-1} fits in 53 bits, normalized afterwards.
  const bool exact = (t - 1) * std::log2(size) < 52.0;
  std::vector<double> c(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t s : set) c[static_cast<std::size_t>(s)] = 1.0;
  for (int step = 1; step < t; ++step) {
    std::vector<double> next(static_cast<std::size_t>(N), 0.0);
    for (std::int64_t x = 0; x < N; ++x) {
      const double cx = c[static_cast<std::size_t>(x)];
      if (cx == 0.0) continue;
      for (std::int64_t s : set) {
        std::int64_t y = x + s;
        if (y >= N) y -= N;
        next[static_cast<std::size_t>(y)] += cx;
      }
    }
    if (!exact) {
      for (double& v : next) v /= size;
    }
    c = std::move(next);
  }
  if (exact) {
    const double scale = std::pow(size, t - 1);
    for (double& v : c) v /= scale;
  }
  for (double& v : c) v = std::min(v, 1.0);
  return CyclicFunction::from_real(c);
}

// ---------------------------------------------------------------------------
// GPY weight
// ---------------------------------------------------------------------------

std::int64_t truncation_level(std::int64_t N, double delta) {
  if (N < 1) throw std::invalid_argument("truncation_level: N must be >= 1");
  const double x = std::pow(static_cast<double>(N), delta);
  std::int64_t D = static_cast<std::int64_t>(std::floor(x));
  // pow may land an ulp below an exact integer power.
  if (static_cast<double>(D + 1) <= x * (1.0 + 1e-14)) ++D;
  return std::max<std::int64_t>(D, 1);
}

namespace {

void require_gpy_domain(std::int64_t N, double delta, const char* what) {
  if (N < 16) throw std::invalid_argument(std::string(what) + ": N must be >= 16");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument(std::string(what) + ": delta must lie in (0, 1/2)");
  }
}

}  // namespace

GpyData gpy_data(std::int64_t N, double delta) {
  require_gpy_domain(N, delta, "gpy_weight");
  const std::int64_t half = N / 2;
  const SievePack sieve = SievePack::build(half);
  GpyData out{CyclicFunction::zeros(N)};
  out.truncation = std::min(truncation_level(N, delta), half);
  out.max_tau = sieve.max_tau(half);
  out.inner.assign(static_cast<std::size_t>(N), 0.0);
  const double log_n = std::log(static_cast<double>(N));
  for (std::int64_t d = 1; d <= out.truncation; ++d) {
    const int mu = sieve.moebius[static_cast<std::size_t>(d)];
    if (mu == 0) continue;
    const double term = mu * std::log(static_cast<double>(N) / static_cast<double>(d));
    for (std::int64_t n = d; n <= half; n += d) out.inner[static_cast<std::size_t>(n)] += term;
  }
  const double tau_sq = static_cast<double>(out.max_tau * out.max_tau);
  for (std::int64_t n = 1; n <= half; ++n) {
    const double r = out.inner[static_cast<std::size_t>(n)] / log_n;
    out.f[n] = r * r / tau_sq;
  }
  return out;
}

CyclicFunction gpy_weight(std::int64_t N, double delta) { return gpy_data(N, delta).f; }

// ---------------------------------------------------------------------------
// Smoothing windows
// ---------------------------------------------------------------------------

namespace {

Complex unit(std::int64_t num, std::int64_t N) {
  return std::polar(1.0, kTwoPi * static_cast<double>(centered(num, N)) / static_cast<double>(N));
}

// (1/len) * c convolved with the indicator of {0..len-1}, linear, output length
// c.size() + len - 1.
std::vector<double> box_step(const std::vector<double>& c, std::int64_t len) {
  const std::int64_t n = static_cast<std::int64_t>(c.size());
  std::vector<long double> prefix(c.size() + 1, 0.0L);
  for (std::size_t i = 0; i < c.size(); ++i) prefix[i + 1] = prefix[i] + c[i];
  std::vector<double> out(static_cast<std::size_t>(n + len - 1));
  for (std::int64_t i = 0; i < n + len - 1; ++i) {
    const std::int64_t lo = std::max<std::int64_t>(0, i - len + 1);
    const std::int64_t hi = std::min(n - 1, i);
    out[static_cast<std::size_t>(i)] = static_cast<double>(
        (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) /
        static_cast<long double>(len));
  }
  return out;
}

// X^{-P} (1_{[0, X)})^{*P}, on [0, P(X-1)].
std::vector<double> box_power(std::int64_t X, int P) {
  std::vector<double> c(static_cast<std::size_t>(X), 1.0 / static_cast<double>(X));
  for (int j = 1; j < P; ++j) c = box_step(c, X);
  return c;
}

}  // namespace

Complex SmoothingWindow::box(std::int64_t a) const {
  const std::int64_t N = w.modulus();
  CompensatedComplexSum s;
  const std::int64_t step = mul_mod(mod(a, N), d % N, N);
  std::int64_t idx = 0;
  for (std::int64_t n = 0; n < X; ++n) {
    s.add(unit(idx, N));
    idx = (idx + step) % N;
  }
  return s.value();
}

Complex SmoothingWindow::w_hat_formula(std::int64_t a) const {
  const std::int64_t N = w.modulus();
  CompensatedComplexSum comb;
  const std::int64_t step = mul_mod(mod(a, N), d % N, N);
  std::int64_t idx = 0;
  for (std::int64_t j = 0; j <= comb_last; ++j) {
    comb.add(unit(idx, N));
    idx = (idx + step) % N;
  }
  const Complex b = box(a) / static_cast<double>(X);
  return std::pow(b, power) * comb.value();
}

SmoothingWindow smoothing_window(std::int64_t d, std::int64_t N, int power, double alpha,
                                 bool clamp) {
  if (N < 2) throw std::invalid_argument("smoothing_window: N must be >= 2");
  if (d < 1 || 2 * d > N) throw std::invalid_argument("smoothing_window: need 1 <= d <= N/2");
  if (power < 2 || power % 2 != 0) {
    throw std::invalid_argument("smoothing_window: power must be even and >= 2");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("smoothing_window: alpha must lie in (0, 1)");
  }
  SmoothingWindow win{CyclicFunction::zeros(N), CyclicFunction::zeros(N)};
  win.d = d;
  win.power = power;
  win.alpha = alpha;
  const std::int64_t half_units = N / (2 * d);
  win.X_nominal = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(N), alpha))));
  win.X = win.X_nominal;
  if (2 * power * (win.X - 1) > half_units) {
    win.degenerate = true;
    if (clamp) {
      win.X = half_units / (2 * power) + 1;
      win.warnings.push_back("degenerate window: plateau empty for X=" +
                             std::to_string(win.X_nominal) + ", X clamped to " +
                             std::to_string(win.X));
    } else {
      win.warnings.push_back("degenerate window: plateau empty for X=" +
                             std::to_string(win.X_nominal));
    }
  }
  const std::int64_t spread = power * (win.X - 1);
  win.comb_last = std::max<std::int64_t>(-1, half_units - spread);
  win.plateau_lo = spread * d;
  win.plateau_hi = win.comb_last * d;

  if (win.comb_last >= 0) {
    const auto kernel = box_power(win.X, power);
    std::vector<long double> prefix(kernel.size() + 1, 0.0L);
    for (std::size_t i = 0; i < kernel.size(); ++i) prefix[i + 1] = prefix[i] + kernel[i];
    const std::int64_t K = static_cast<std::int64_t>(kernel.size()) - 1;
    for (std::int64_t n = 0; n <= half_units; ++n) {
      // sum_{j=0}^{comb_last} kernel(n - j)
      const std::int64_t lo = std::max<std::int64_t>(0, n - win.comb_last);
      const std::int64_t hi = std::min(K, n);
      if (lo > hi) continue;
      const long double s =
          prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)];
      win.w[n * d] = std::min(1.0, static_cast<double>(s));
    }
  }
  win.w_hat = dft(win.w);
  return win;
}

WindowCriterion check_window_criterion(const SmoothingWindow& win) {
  const std::int64_t N = win.w.modulus();
  const double n = static_cast<double>(N);
  WindowCriterion c;
  c.threshold = 1.0 / (n * n);
  const double floor_box = static_cast<double>(win.X) * std::pow(n, -3.0 / win.power) / 2.0;
  for (std::int64_t a = 0; a < N; ++a) {
    c.max_formula_error = std::max(c.max_formula_error, std::abs(win.w_hat(a) - win.w_hat_formula(a)));
    if (std::abs(win.w_hat(a)) >= c.threshold) {
      ++c.large_count;
      if (!(std::abs(win.box(a)) > floor_box)) ++c.criterion_failures;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Smoothed pseudoprime
// ---------------------------------------------------------------------------

SmoothedPseudoprime smoothed_pseudoprime(std::int64_t N, double delta,
                                         const SmoothedParams& params) {
  require_gpy_domain(N, delta, "smoothed_pseudoprime");
  if (params.star_power < 1) throw std::invalid_argument("smoothed_pseudoprime: star_power must be >= 1");
  const GpyData gpy = gpy_data(N, delta);
  const std::int64_t half = N / 2;
  const SievePack sieve = SievePack::build(std::max<std::int64_t>(gpy.truncation, 1));
  const double log_n = std::log(static_cast<double>(N));
  const double tau_sq = static_cast<double>(gpy.max_tau * gpy.max_tau);

  SmoothedPseudoprime out{gpy.f, CyclicFunction::zeros(N), CyclicFunction::zeros(N)};
  out.g = gpy.inner;
  out.g2.assign(static_cast<std::size_t>(N), 0.0);
  out.agree_lo = 1;
  out.agree_hi = half;
  for (std::int64_t d = 1; d <= gpy.truncation; ++d) {
    const int mu = sieve.moebius[static_cast<std::size_t>(d)];
    if (mu == 0) continue;
    SmoothingWindow win = smoothing_window(d, N, params.power, params.alpha);
    const double coef = mu * std::log(static_cast<double>(N) / static_cast<double>(d));
    for (std::int64_t m = 1; m < N; ++m) out.g2[static_cast<std::size_t>(m)] += coef * win.w(m).real();
    out.agree_lo = std::max(out.agree_lo, win.plateau_lo);
    out.agree_hi = std::min(out.agree_hi, win.plateau_hi);
    for (const auto& w : win.warnings) out.warnings.push_back("d=" + std::to_string(d) + ": " + w);
    out.windows.push_back(std::move(win));
  }
  for (std::int64_t m = out.agree_lo; m <= out.agree_hi; ++m) {
    out.g_agreement_error = std::max(
        out.g_agreement_error,
        std::abs(out.g2[static_cast<std::size_t>(m)] - out.g[static_cast<std::size_t>(m)]));
  }

  // w* = C * shift by ceil(N/5) of the star_power-fold box {0..floor(N/(5P*))}.
  const std::int64_t shift = (N + 4) / 5;
  const std::int64_t width = std::max<std::int64_t>(0, N / (5 * params.star_power));
  auto kernel = box_power(width + 1, params.star_power);
  const double peak = *std::max_element(kernel.begin(), kernel.end());
  out.star_lo = shift;
  out.star_hi = shift + static_cast<std::int64_t>(kernel.size()) - 1;
  if (out.star_hi >= N) throw std::invalid_argument("smoothed_pseudoprime: w* does not fit in Z_N");
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    out.w_star[shift + static_cast<std::int64_t>(i)] = std::min(1.0, kernel[i] / peak);
  }
  out.star_inside_agreement = out.agree_lo <= out.star_lo && out.star_hi <= out.agree_hi;
  if (!out.star_inside_agreement) {
    out.warnings.push_back("support of w* is not inside the g2 = g agreement range");
  }

  for (std::int64_t m = 0; m < N; ++m) {
    const double fm = out.f(m).real();
    const double ws = out.w_star(m).real();
    const double v = fm * ws;
    out.f3[m] = v;
    if (v > 0.0 && !(fm > 0.0)) ++out.positivity_violations;
    if (ws > 0.0) {
      const double r = out.g2[static_cast<std::size_t>(m)] / log_n;
      out.f2_agreement_error = std::max(out.f2_agreement_error, std::abs(r * r / tau_sq - fm));
    }
  }

  const SortedSpectrum s = sort_spectrum(out.f3);
  out.f3_mass = s.entries[0].coefficient.real();
  for (double rel : params.sweep) {
    const double thr = rel * out.f3_mass;
    std::int64_t count = 0;
    for (const auto& e : s.entries) {
      if (std::abs(e.coefficient) > thr) ++count;
    }
    out.sweep.push_back({rel, count});
  }
  for (std::int64_t k : params.tail_ranks) {
    if (k >= 1 && k <= N) {
      out.tail_ratios.emplace_back(k, s.sigma_sq > 0.0 ? tail_energy(s, k) / s.sigma_sq : 0.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeded smooth density
// ---------------------------------------------------------------------------

CyclicFunction smooth_density(std::int64_t N, std::uint64_t seed,
                              const SmoothDensityParams& params) {
  if (N < 2) throw std::invalid_argument("smooth_density: N must be >= 2");
  if (!(params.amplitude >= 0.0 && params.noise >= 0.0)) {
    throw std::invalid_argument("smooth_density: amplitude and noise must be >= 0");
  }
  Rng rng(seed);
  const std::int64_t b = 1 + rng.below(N - 1);
  const double phi = kTwoPi * rng.uniform();
  std::vector<double> v(static_cast<std::size_t>(N));
  for (std::int64_t n = 0; n < N; ++n) {
    const double ang =
        kTwoPi * static_cast<double>(centered(mul_mod(b, n, N), N)) / static_cast<double>(N) + phi;
    const double x = params.mean + params.amplitude * std::cos(ang) +
                     params.noise * (2.0 * rng.uniform() - 1.0);
    v[static_cast<std::size_t>(n)] = std::clamp(x, 0.0, 1.0);
  }
  return CyclicFunction::from_real(v);
}

}  // namespace zncount
