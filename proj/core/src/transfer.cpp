#include "zncount/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "zncount/errors.hpp"
#include "zncount/summation.hpp"

namespace zncount {

namespace {

double kpow(std::int64_t k, double e) { return std::pow(static_cast<double>(k), e); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Overrides and plan
// ---------------------------------------------------------------------------

TransferOverrides TransferOverrides::parse(const std::string& text) {
  TransferOverrides o;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("overrides: expected key=value, got '" + item + "'");
    }
    const std::string key = trim(item.substr(0, eq));
    const std::string val = trim(item.substr(eq + 1));
    double x = 0.0;
    std::size_t pos = 0;
    try {
      x = std::stod(val, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != val.size() || !std::isfinite(x) || x <= 0.0) {
      throw std::invalid_argument("overrides: '" + key + "' needs a positive number, got '" +
                                  val + "'");
    }
    if (key == "i_scale") {
      o.i_scale = x;
    } else if (key == "x_scale") {
      o.x_scale = x;
    } else {
      throw std::invalid_argument("overrides: unknown key '" + key +
                                  "' (expected i_scale or x_scale)");
    }
  }
  return o;
}

TransferPlan::TransferPlan(std::int64_t N_, std::int64_t k_, double epsilon_, EquationForm eq_,
                           TransferOverrides overrides_)
    : N(N_), k(k_), epsilon(epsilon_), eq(std::move(eq_)), overrides(overrides_) {
  if (!is_prime(N)) throw std::invalid_argument("transfer: N must be prime, got " + std::to_string(N));
  if (k < 2) throw std::invalid_argument("transfer: k must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("transfer: epsilon must lie in (0, 1)");
  }
  if (!(overrides.i_scale > 0.0 && overrides.x_scale > 0.0)) {
    throw std::invalid_argument("transfer: overrides must be positive");
  }
  const double n = static_cast<double>(N);
  L = static_cast<std::int64_t>(std::floor(std::log(n))) + 1;
  I_half = static_cast<std::int64_t>(std::floor(overrides.i_scale * kpow(k, -epsilon) * n));
  x_band = overrides.x_scale * kpow(k, 3.0 * epsilon);
  separation_numer = overrides.x_scale * kpow(k, 4.0 * epsilon);
  const double j = kpow(k, -2.0 - epsilon) * n;
  J_lo = static_cast<std::int64_t>(std::ceil(j));
  J_hi = static_cast<std::int64_t>(std::floor(2.0 * j));
}

// ---------------------------------------------------------------------------
// m2, dilation, separation
// ---------------------------------------------------------------------------

std::int64_t choose_m2(std::int64_t k, double epsilon) {
  if (k < 2) throw std::invalid_argument("choose_m2: k must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("choose_m2: epsilon must lie in (0, 1)");
  }
  const double t = kpow(k, 2.0 + 2.0 * epsilon);
  const std::int64_t p = next_prime(static_cast<std::int64_t>(std::ceil(t)));
  if (static_cast<double>(p) > 2.0 * t) {
    throw InternalError("choose_m2: no prime in [" + fmt(t) + ", " + fmt(2.0 * t) + "]");
  }
  return p;
}

CyclicFunction dilate(const CyclicFunction& f, std::int64_t q) {
  const std::int64_t n = f.modulus();
  if (std::gcd(mod(q, n), n) != 1) {
    throw std::invalid_argument("dilate: q=" + std::to_string(q) + " is not invertible mod " +
                                std::to_string(n));
  }
  std::vector<Complex> out(static_cast<std::size_t>(n));
  const std::int64_t qq = mod(q, n);
  std::int64_t idx = 0;
  for (std::int64_t x = 0; x < n; ++x) {
    out[static_cast<std::size_t>(x)] = f(idx);
    idx += qq;
    if (idx >= n) idx -= n;
  }
  return CyclicFunction(n, std::move(out));
}

namespace {

// Distinct nonzero differences a_u b_i - a_v b_j (mod N), folded to [1, N/2].
std::vector<std::int64_t> separation_differences(std::span<const std::int64_t> b_set,
                                                 const EquationForm& eq, std::int64_t N) {
  std::vector<std::int64_t> prods;
  for (std::int64_t b : b_set) {
    for (std::int64_t a : eq.coeffs()) prods.push_back(mul_mod(mod(a, N), mod(b, N), N));
  }
  std::vector<std::int64_t> out;
  for (std::int64_t x : prods) {
    for (std::int64_t y : prods) {
      const std::int64_t d = mod(x - y, N);
      if (d != 0) out.push_back(std::min(d, N - d));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool separates_diffs(std::int64_t m1, std::span<const std::int64_t> diffs, std::int64_t N,
                     std::int64_t m2, double numer) {
  const double limit = numer * static_cast<double>(N);
  for (std::int64_t x : diffs) {
    const std::int64_t r = mod_norm_numerator(mul_mod(m1, x, N), N);
    if (!(static_cast<double>(r) * static_cast<double>(m2) > limit)) return false;
  }
  return true;
}

// Number of bad m1 in [lo, hi]; stops once the count exceeds stop_after.
std::int64_t count_bad(std::span<const std::int64_t> diffs, std::int64_t N, std::int64_t lo,
                       std::int64_t hi, std::int64_t m2, double numer, std::int64_t stop_after) {
  std::int64_t bad = 0;
  for (std::int64_t m1 = lo; m1 <= hi; ++m1) {
    if (!separates_diffs(m1, diffs, N, m2, numer) && ++bad > stop_after) break;
  }
  return bad;
}

std::vector<std::int64_t> dilate_set(std::span<const std::int64_t> b, std::int64_t q,
                                     std::int64_t N) {
  std::vector<std::int64_t> out;
  out.reserve(b.size());
  for (std::int64_t x : b) out.push_back(mul_mod(mod(q, N), mod(x, N), N));
  return out;
}

void require_J(std::int64_t lo, std::int64_t hi) {
  if (lo > hi || lo < 1) {
    throw PlanRejected("m1 range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] is empty");
  }
}

}  // namespace

std::vector<std::int64_t> separation_frequencies(const SortedSpectrum& spectrum, std::int64_t k) {
  std::vector<std::int64_t> out;
  for (std::int64_t j = 0; j < k && j < spectrum.modulus; ++j) {
    const auto& e = spectrum.entries[static_cast<std::size_t>(j)];
    if (e.coefficient != Complex(0.0)) out.push_back(e.frequency);
  }
  return out;
}

bool separates(std::int64_t m1, std::span<const std::int64_t> b_set, const EquationForm& eq,
               std::int64_t N, std::int64_t m2, double separation_numer) {
  const auto diffs = separation_differences(b_set, eq, N);
  return separates_diffs(m1, diffs, N, m2, separation_numer);
}

double separation_bad_fraction(std::span<const std::int64_t> b_set, const EquationForm& eq,
                               std::int64_t N, std::int64_t J_lo, std::int64_t J_hi,
                               std::int64_t m2, double separation_numer) {
  require_J(J_lo, J_hi);
  const auto diffs = separation_differences(b_set, eq, N);
  const std::int64_t bad = count_bad(diffs, N, J_lo, J_hi, m2, separation_numer,
                                     std::numeric_limits<std::int64_t>::max());
  return static_cast<double>(bad) / static_cast<double>(J_hi - J_lo + 1);
}

SeparationResult separation_search(const SortedSpectrum& spectrum, const EquationForm& eq,
                                   std::int64_t k, double epsilon, std::int64_t m2,
                                   const TransferOverrides& overrides) {
  const std::int64_t N = spectrum.modulus;
  const TransferPlan shape(N, k, epsilon, eq, overrides);
  require_J(shape.J_lo, shape.J_hi);
  const auto top = separation_frequencies(spectrum, k);

  SeparationResult r;
  r.candidates = shape.J_hi - shape.J_lo + 1;
  // fraction <= k^{-2}  <=>  bad * k^2 <= |J|
  const std::int64_t allowed = r.candidates / (k * k);
  for (std::int64_t q = 1; q < N; ++q) {
    const auto b = dilate_set(top, q, N);
    const auto diffs = separation_differences(b, eq, N);
    const std::int64_t bad =
        count_bad(diffs, N, shape.J_lo, shape.J_hi, m2, shape.separation_numer, allowed);
    if (bad <= allowed) {
      r.q = q;
      r.bad_count = bad;
      r.bad_fraction = static_cast<double>(bad) / static_cast<double>(r.candidates);
      return r;
    }
  }
  throw SearchFailure("separation_search: no dilation q in [1, " + std::to_string(N - 1) +
                      "] leaves at most a k^-2 fraction of bad m1 (threshold " +
                      fmt(shape.separation_numer) + "/" + std::to_string(m2) + ")");
}

// ---------------------------------------------------------------------------
// X split and correspondence
// ---------------------------------------------------------------------------

XSplit compute_X(std::int64_t M, std::int64_t N, std::span<const std::int64_t> b_set,
                 double band) {
  if (M < 1 || N < 1) throw std::invalid_argument("compute_X: moduli must be positive");
  if (!(band >= 0.0)) throw std::invalid_argument("compute_X: band must be >= 0");
  std::vector<char> in(static_cast<std::size_t>(M), 0);
  const double limit = band * static_cast<double>(N);
  const std::int64_t MN = M * N;
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(band)) + 2;
  for (std::int64_t b0 : b_set) {
    const std::int64_t b = mod(b0, N);
    auto test = [&](std::int64_t a) {
      const std::int64_t r = mod_norm_numerator(mod(a, M) * N - b * M, MN);
      if (static_cast<double>(r) <= limit) in[static_cast<std::size_t>(mod(a, M))] = 1;
    };
    if (2 * reach + 1 >= M) {
      for (std::int64_t a = 0; a < M; ++a) test(a);
    } else {
      const std::int64_t c = b * M / N;
      for (std::int64_t a = c - reach; a <= c + reach; ++a) test(a);
    }
  }
  XSplit out;
  for (std::int64_t a = 0; a < M; ++a) {
    if (in[static_cast<std::size_t>(a)]) out.Xc.push_back(a);
  }
  out.X_size = M - static_cast<std::int64_t>(out.Xc.size());
  return out;
}

XSplit compute_X(const TransferPlan& plan) {
  if (plan.M == 0) throw std::invalid_argument("compute_X: plan has no modulus M yet");
  return compute_X(plan.M, plan.N, plan.b_set, plan.x_band);
}

CorrespondenceResult verify_correspondence(std::int64_t M, std::int64_t m1, std::int64_t m2,
                                           std::span<const std::int64_t> Xc,
                                           const EquationForm& eq) {
  if (m1 * m2 != M) throw std::invalid_argument("verify_correspondence: m1 m2 != M");
  const CrtSplit split = crt_decompose(m1, m2);
  CorrespondenceResult r;
  for (std::int64_t x : Xc) {
    const std::int64_t vx = split.v(x);
    for (std::int64_t y : Xc) {
      const std::int64_t vy = split.v(y);
      for (std::int64_t ai : eq.coeffs()) {
        for (std::int64_t aj : eq.coeffs()) {
          const std::int64_t diff = ai * x - aj * y;
          const bool mod_M = mod(diff, M) == 0;
          const bool mod_m2 = mod(diff, m2) == 0;
          const bool proj = mod(ai * vx - aj * vy, M) == 0;
          if (mod_M != mod_m2) r.holds = false;
          if (mod_M != proj) r.projection_form_holds = false;
          if ((mod_M != mod_m2 || mod_M != proj) && !r.witness) {
            r.witness = std::array<std::int64_t, 4>{x, y, ai, aj};
          }
        }
      }
    }
  }
  return r;
}

std::int64_t choose_m1(const TransferPlan& plan) {
  if (plan.m2 == 0) throw std::invalid_argument("choose_m1: m2 not fixed");
  require_J(plan.J_lo, plan.J_hi);
  const auto diffs = separation_differences(plan.b_set, plan.eq, plan.N);
  for (std::int64_t m1 = plan.J_lo; m1 <= plan.J_hi; ++m1) {
    if (std::gcd(m1, plan.m2) != 1) continue;
    const std::int64_t M = m1 * plan.m2;
    if (M % 2 == 0) continue;
    bool coprime = true;
    for (std::int64_t a : plan.eq.coeffs()) coprime = coprime && std::gcd(M, std::abs(a)) == 1;
    if (!coprime) continue;
    if (!separates_diffs(m1, diffs, plan.N, plan.m2, plan.separation_numer)) continue;
    const auto xs = compute_X(M, plan.N, plan.b_set, plan.x_band);
    const auto corr = verify_correspondence(M, m1, plan.m2, xs.Xc, plan.eq);
    if (corr.holds && corr.projection_form_holds) return m1;
  }
  throw SearchFailure("choose_m1: no m1 in [" + std::to_string(plan.J_lo) + ", " +
                      std::to_string(plan.J_hi) + "] qualifies");
}

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, error_kind(e), e.what());
  }
}

}  // namespace

TransferPlan plan_transfer(const CyclicFunction& f, const EquationForm& eq, double epsilon,
                           std::int64_t k, const TransferOverrides& overrides) {
  TransferPlan plan(f.modulus(), k, epsilon, eq, overrides);
  f.require_density("plan_transfer");
  if (!f.is_real()) throw std::invalid_argument("plan_transfer: f must be real-valued");
  staged("separation-search", [&] {
    const auto spectrum = sort_spectrum(f);
    plan.top_frequencies = top_frequencies(spectrum, k);
    plan.m2 = choose_m2(k, epsilon);
    const auto sep = separation_search(spectrum, eq, k, epsilon, plan.m2, overrides);
    plan.q = sep.q;
    plan.separation_bad_fraction = sep.bad_fraction;
    plan.b_set = dilate_set(separation_frequencies(spectrum, k), plan.q, plan.N);
    return 0;
  });
  staged("m1-search", [&] {
    plan.m1 = choose_m1(plan);
    plan.M = plan.m1 * plan.m2;
    plan.Xc = compute_X(plan).Xc;
    return 0;
  });
  return plan;
}

// ---------------------------------------------------------------------------
// g
// ---------------------------------------------------------------------------

std::vector<double> transfer_window(std::int64_t I_half, std::int64_t L) {
  if (I_half < 0 || L < 1) throw std::invalid_argument("transfer_window: need I_half >= 0, L >= 1");
  const std::int64_t R = L * I_half;
  const std::size_t len = static_cast<std::size_t>(2 * R + 1);
  const double size = static_cast<double>(2 * I_half + 1);
  // c_1 = 1_I; c_{j+1} = (c_j * 1_I) / |I|, all stored on [-R, R].
  std::vector<double> c(len, 0.0);
  for (std::int64_t n = -I_half; n <= I_half; ++n) c[static_cast<std::size_t>(n + R)] = 1.0;
  std::vector<long double> prefix(len + 1);
  for (std::int64_t step = 1; step < L; ++step) {
    prefix[0] = 0.0L;
    for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + c[i];
    std::vector<double> next(len, 0.0);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(len); ++i) {
      const std::int64_t lo = std::max<std::int64_t>(0, i - I_half);
      const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(len) - 1, i + I_half);
      const long double s = prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)];
      next[static_cast<std::size_t>(i)] = static_cast<double>(s / size);
    }
    c = std::move(next);
  }
  return c;
}

GBuild build_g(const CyclicFunction& f_dilated, const TransferPlan& plan) {
  if (f_dilated.modulus() != plan.N) throw std::invalid_argument("build_g: modulus mismatch");
  if (plan.M == 0) throw std::invalid_argument("build_g: plan has no modulus M yet");
  const std::int64_t N = plan.N;
  const std::int64_t M = plan.M;
  const std::int64_t R = plan.window_radius();
  if (2 * R >= N) {
    throw PlanRejected("build_g: window radius L*I_half = " + std::to_string(R) +
                       " does not fit inside (-N/2, N/2] (needs k^eps > 2L, or a smaller i_scale)");
  }
  if (plan.eq.abs_sum() * R >= M) {
    throw PlanRejected("build_g: sum|a_i| * L*I_half = " + std::to_string(plan.eq.abs_sum() * R) +
                       " >= M = " + std::to_string(M) + "; confined solutions could wrap mod M");
  }

  GBuild out{CyclicFunction::zeros(M)};
  out.radius = R;
  out.window = transfer_window(plan.I_half, plan.L);
  const double size = static_cast<double>(plan.I_size());
  {
    CompensatedSum s;
    for (double x : out.window) {
      if (x < -kDensityTolerance || x > 1.0 + kDensityTolerance) {
        throw InternalError("build_g: window value " + fmt(x) + " outside [0, 1]");
      }
      s.add(x);
    }
    out.window_mass = s.value();
  }
  if (std::abs(out.window_mass - size) > 1e-6 * size) {
    throw InternalError("build_g: window mass " + fmt(out.window_mass) + " != |I| = " + fmt(size));
  }

  const auto fv = f_dilated.real_values();
  const auto& w = out.window;
  double best = -1.0;
  for (std::int64_t u = 0; u < N; ++u) {
    CompensatedSum s;
    std::int64_t idx = mod(-R - u, N);
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.add(fv[static_cast<std::size_t>(idx)] * w[i]);
      if (++idx == N) idx = 0;
    }
    if (s.value() > best) {
      best = s.value();
      out.u_g = u;
    }
  }

  CompensatedSum mass;
  CompensatedSum fsum;
  for (double x : fv) fsum.add(x);
  for (std::int64_t n = -R; n <= R; ++n) {
    const double v = fv[static_cast<std::size_t>(mod(n - out.u_g, N))] * w[static_cast<std::size_t>(n + R)];
    out.g[n] = v;
    mass.add(v);
  }
  out.mass = mass.value();
  const double theta = fsum.value() / static_cast<double>(N);
  out.averaging_bound = size * theta;
  out.scaled_mass_bound = plan.overrides.i_scale * kpow(plan.k, -plan.epsilon) * theta *
                          static_cast<double>(N);
  const double slack = 1e-9 * (1.0 + out.averaging_bound);
  if (out.mass < out.averaging_bound - slack) {
    throw InternalError("build_g: best translate has mass " + fmt(out.mass) +
                        " below the average " + fmt(out.averaging_bound));
  }
  if (out.mass < out.scaled_mass_bound - slack) {
    throw InternalError("build_g: mass " + fmt(out.mass) + " below k^-eps theta N = " +
                        fmt(out.scaled_mass_bound));
  }
  return out;
}

// ---------------------------------------------------------------------------
// h and the Sigma functional
// ---------------------------------------------------------------------------

namespace {

class SigmaEvaluator {
 public:
  SigmaEvaluator(const CyclicFunction& g_hat, const TransferPlan& plan)
      : G_(g_hat), split_(plan.m1, plan.m2), M_(plan.M), Xc_(plan.Xc) {
    if (g_hat.modulus() != M_) throw std::invalid_argument("sigma: transform is not on Z_M");
    twiddle_.resize(static_cast<std::size_t>(M_));
    for (std::int64_t j = 0; j < M_; ++j) {
      const double ang = -kTwoPi * static_cast<double>(centered(j, M_)) / static_cast<double>(M_);
      twiddle_[static_cast<std::size_t>(j)] = std::polar(1.0, ang);
    }
    in_V1_.assign(static_cast<std::size_t>(plan.m2), 0);
    for (std::int64_t a : Xc_) {
      in_V1_[static_cast<std::size_t>(split_.v(a) / plan.m1)] = 1;
      wa_.push_back(split_.w(a));
      va_index_.push_back(split_.v(a) / plan.m1);
    }
    H_.resize(static_cast<std::size_t>(plan.m2));
  }

  double inner(std::int64_t u) {
    const std::int64_t m1 = split_.m1();
    const std::int64_t m2 = split_.m2();
    const std::int64_t ur = mod(u, M_);
    for (std::int64_t s = 0; s < m2; ++s) {
      CompensatedComplexSum acc;
      const std::int64_t v = m1 * s;
      for (std::int64_t t = 0; t < m1; ++t) {
        const std::int64_t x = m2 * t;
        acc.add(twiddle_[static_cast<std::size_t>(mul_mod(x, ur, M_))] * G_(v + x));
      }
      H_[static_cast<std::size_t>(s)] = acc.value();
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < Xc_.size(); ++i) {
      const Complex phase = std::conj(twiddle_[static_cast<std::size_t>(mul_mod(wa_[i], ur, M_))]);
      total.add(std::norm(G_(Xc_[i]) - phase * H_[static_cast<std::size_t>(va_index_[i])]));
    }
    for (std::int64_t s = 0; s < m2; ++s) {
      if (!in_V1_[static_cast<std::size_t>(s)]) total.add(std::norm(H_[static_cast<std::size_t>(s)]));
    }
    return total.value();
  }

 private:
  const CyclicFunction& G_;
  CrtSplit split_;
  std::int64_t M_;
  std::vector<std::int64_t> Xc_;
  std::vector<Complex> twiddle_;
  std::vector<char> in_V1_;
  std::vector<std::int64_t> wa_;
  std::vector<std::int64_t> va_index_;
  std::vector<Complex> H_;
};

}  // namespace

double sigma_inner(const CyclicFunction& g_hat, const TransferPlan& plan, std::int64_t u) {
  SigmaEvaluator ev(g_hat, plan);
  return ev.inner(u);
}

Complex h_hat_formula(const CyclicFunction& g_hat, const CrtSplit& split, std::int64_t u,
                      std::int64_t a) {
  const std::int64_t M = split.M();
  CompensatedComplexSum acc;
  for (std::int64_t t = 0; t < split.m1(); ++t) {
    const std::int64_t x = split.m2() * t;
    const double ang =
        -kTwoPi * static_cast<double>(centered(mul_mod(x, mod(u, M), M), M)) / static_cast<double>(M);
    acc.add(std::polar(1.0, ang) * g_hat(a + x));
  }
  return acc.value();
}

HBuild build_h(const CyclicFunction& g, const CyclicFunction& g_hat, const TransferPlan& plan) {
  if (plan.M == 0) throw std::invalid_argument("build_h: plan has no modulus M yet");
  if (g.modulus() != plan.M || g_hat.modulus() != plan.M) {
    throw std::invalid_argument("build_h: g and its transform must live on Z_M");
  }
  const std::int64_t M = plan.M;
  const CrtSplit split(plan.m1, plan.m2);
  SigmaEvaluator ev(g_hat, plan);

  HBuild out{CyclicFunction::zeros(M), CyclicFunction::zeros(M)};
  CompensatedSum period_sum;
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t u = 0; u < plan.m1; ++u) {
    const double val = ev.inner(u);
    period_sum.add(val);
    if (val < best) {
      best = val;
      out.u_h = u;
    }
  }
  out.sigma_value = best;
  out.sigma_total = static_cast<double>(plan.m2) * period_sum.value();
  out.sigma_average = out.sigma_total / static_cast<double>(M);
  {
    std::vector<char> in_xc(static_cast<std::size_t>(M), 0);
    for (std::int64_t a : plan.Xc) in_xc[static_cast<std::size_t>(a)] = 1;
    CompensatedSum s;
    for (std::int64_t a = 0; a < M; ++a) {
      if (!in_xc[static_cast<std::size_t>(a)]) s.add(std::norm(g_hat(a)));
    }
    out.sigma_identity_rhs = static_cast<double>(M) * s.value();
  }
  if (out.sigma_value > out.sigma_average * (1.0 + 1e-12) + 1e-300) {
    throw InternalError("build_h: minimum " + fmt(out.sigma_value) + " exceeds the average " +
                        fmt(out.sigma_average));
  }

  for (std::int64_t n = 0; n < M; ++n) out.h[n] = g(n - split.w(n - out.u_h));
  out.h_hat = dft(out.h);
  return out;
}

// ---------------------------------------------------------------------------
// Deductions
// ---------------------------------------------------------------------------

bool projection_injective(const CrtSplit& split, std::span<const std::int64_t> Xc) {
  std::set<std::int64_t> seen;
  for (std::int64_t a : Xc) {
    if (!seen.insert(split.v(a)).second) return false;
  }
  return true;
}

TupleFormResult check_tuple_form(const CrtSplit& split, std::span<const std::int64_t> Xc,
                                 const EquationForm& eq) {
  const std::int64_t M = split.M();
  TupleFormResult r;
  std::unordered_map<std::int64_t, std::int64_t> preimage;  // v(x) -> x
  std::vector<char> in_xc(static_cast<std::size_t>(M), 0);
  for (std::int64_t x : Xc) {
    in_xc[static_cast<std::size_t>(mod(x, M))] = 1;
    if (!preimage.emplace(split.v(x), mod(x, M)).second) r.holds = false;
  }
  const auto coeffs = eq.coeffs();
  if (std::gcd(mod(coeffs[0], M), M) != 1) {
    throw std::invalid_argument("check_tuple_form: a_1 must be invertible mod M");
  }
  const std::int64_t inv_a1 = mod_inverse(mod(coeffs[0], M), M);

  for (std::int64_t s = 0; s < split.m2(); ++s) {
    const std::int64_t v = split.m1() * s;
    std::vector<std::int64_t> xs;
    for (std::int64_t a : coeffs) {
      auto it = preimage.find(mod(a * v, M));
      if (it == preimage.end()) break;
      xs.push_back(it->second);
    }
    if (xs.size() != coeffs.size()) continue;
    ++r.v_tuples;
    const std::int64_t b = mul_mod(xs[0], inv_a1, M);
    if (split.v(b) != v) r.holds = false;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (mod(coeffs[i] * b, M) != xs[i]) r.holds = false;
    }
  }
  for (std::int64_t b = 0; b < M; ++b) {
    bool all = true;
    for (std::int64_t a : coeffs) {
      if (!in_xc[static_cast<std::size_t>(mod(a * b, M))]) {
        all = false;
        break;
      }
    }
    if (all) ++r.b_tuples;
  }
  if (r.v_tuples != r.b_tuples) r.holds = false;
  return r;
}

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

bool ChainReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

void require_planned(const CyclicFunction& f, const TransferPlan& plan) {
  if (f.modulus() != plan.N) throw std::invalid_argument("transfer: f modulus differs from plan N");
  if (plan.M == 0 || plan.m1 * plan.m2 != plan.M) {
    throw std::invalid_argument("transfer: plan has no consistent modulus M = m1 m2");
  }
  f.require_density("transfer");
}

double max_abs(const CyclicFunction& F) {
  double m = 0.0;
  for (const Complex& z : F.values()) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

ChainReport execute_plan(const CyclicFunction& f, TransferPlan& plan) {
  require_planned(f, plan);
  const std::int64_t N = plan.N;
  const std::int64_t M = plan.M;
  const CrtSplit split(plan.m1, plan.m2);
  const EquationForm& eq = plan.eq;
  const int d = eq.d();

  ChainReport r;
  r.hypothesis = check_hypothesis(f, d, plan.epsilon, plan.k, HypothesisMode::relaxed);

  const CyclicFunction fd = dilate(f, plan.q);
  const GBuild gb = staged("g-build", [&] { return build_g(fd, plan); });
  plan.u_g = gb.u_g;
  const CyclicFunction G = dft(gb.g);
  const HBuild hb = staged("h-build", [&] { return build_h(gb.g, G, plan); });
  plan.u_h = hb.u_h;
  const CyclicFunction& h = hb.h;
  const CyclicFunction& H = hb.h_hat;

  r.count_f = count_bruteforce(f, eq);
  r.count_g = count_bruteforce(gb.g, eq);
  r.count_g_fourier = count_fourier_from_transform(G, eq);
  {
    CompensatedComplexSum acc;
    for (std::int64_t s = 0; s < plan.m2; ++s) {
      const std::int64_t v = plan.m1 * s;
      Complex term = 1.0;
      for (std::int64_t a : eq.coeffs()) term *= H(mod(a, M) * v % M);
      acc.add(term);
    }
    const Complex c = acc.value() / static_cast<double>(M);
    if (std::abs(c.imag()) > 1e-6 * (1.0 + std::abs(c.real()))) {
      throw StageError("h-build", "numerical-inconsistency",
                       "count_h has imaginary residue " + fmt(c.imag()));
    }
    r.count_h = c.real();
  }
  r.count_h_direct = count_bruteforce(h, eq);
  {
    CompensatedSum s;
    for (double x : h.real_values()) s.add(std::pow(x, d));
    r.h_floor = std::pow(static_cast<double>(plan.m1), d - 2) * s.value();
  }
  r.g_mass = gb.mass;
  r.h_mass = H(0).real();
  r.sigma_value = hb.sigma_value;

  r.separation_limit = 1.0 / static_cast<double>(plan.k * plan.k);
  r.separation_bad_fraction = separation_bad_fraction(plan.b_set, eq, N, plan.J_lo, plan.J_hi,
                                                      plan.m2, plan.separation_numer);
  const auto corr = verify_correspondence(M, plan.m1, plan.m2, plan.Xc, eq);
  r.correspondence = corr.holds;
  r.correspondence_projection = corr.projection_form_holds;
  r.projection_injective = projection_injective(split, plan.Xc);
  r.tuple_form = check_tuple_form(split, plan.Xc, eq);
  r.Xc_size = static_cast<std::int64_t>(plan.Xc.size());
  r.Xc_limit = 3.0 * static_cast<double>(plan.k) * plan.x_band;
  r.Xc_limit_paper = 3.0 * kpow(plan.k, 1.0 + 3.0 * plan.epsilon);

  for (std::int64_t n = 0; n < M; ++n) {
    const std::int64_t c = centered(n, M);
    const double val = gb.g(n).real();
    if (2 * c > N || 2 * c <= -N) r.g_leak = std::max(r.g_leak, std::abs(val));
    r.g_range_violation = std::max({r.g_range_violation, -val, val - 1.0});
  }
  r.window_mass_rel_error =
      std::abs(gb.window_mass - static_cast<double>(plan.I_size())) / static_cast<double>(plan.I_size());
  r.g_averaging_bound = gb.averaging_bound;
  r.g_mass_bound = gb.scaled_mass_bound;

  double formula_err = 0.0;
  for (std::int64_t a = 0; a < M; ++a) {
    if (split.in_V(a)) {
      formula_err = std::max(formula_err, std::abs(H(a) - h_hat_formula(G, split, plan.u_h, a)));
    } else {
      r.h_hat_off_V = std::max(r.h_hat_off_V, std::abs(H(a)));
    }
  }
  const double h_scale = max_abs(H);
  r.h_hat_formula_rel_error = h_scale > 0.0 ? formula_err / h_scale : formula_err;
  for (std::int64_t t = 1; t < plan.m1; ++t) {
    const std::int64_t x = plan.m2 * t;
    for (std::int64_t n = 0; n < M; ++n) {
      r.h_w_invariance = std::max(r.h_w_invariance, std::abs(h(n + x) - h(n)));
    }
  }
  r.count_h_rel_error =
      std::abs(r.count_h - r.count_h_direct) / std::max(1.0, std::abs(r.count_h_direct));
  r.sigma_total = hb.sigma_total;
  r.sigma_identity_rhs = hb.sigma_identity_rhs;
  r.sigma_identity_rel_error = std::abs(hb.sigma_total - hb.sigma_identity_rhs) /
                               std::max(1e-300, std::abs(hb.sigma_identity_rhs));
  r.sigma_average = hb.sigma_average;

  const double keps_n = kpow(plan.k, plan.epsilon) * static_cast<double>(N);
  bool coprime = M % 2 == 1 && std::gcd(plan.m1, plan.m2) == 1;
  for (std::int64_t a : eq.coeffs()) coprime = coprime && std::gcd(M, std::abs(a)) == 1;

  auto add = [&](std::string name, bool ok) { r.checks.push_back({std::move(name), ok}); };
  add("M odd and coprime to m-split and coefficients", coprime);
  add("k^eps N < M <= 4 k^eps N", static_cast<double>(M) > keps_n && static_cast<double>(M) <= 4.0 * keps_n);
  add("bad m1 fraction <= k^-2", r.separation_bad_fraction <= r.separation_limit);
  add("m1 separates every quadruple",
      separates(plan.m1, plan.b_set, eq, N, plan.m2, plan.separation_numer));
  add("correspondence property", r.correspondence);
  add("correspondence property (projection form)", r.correspondence_projection);
  add("v injective on Xc", r.projection_injective);
  add("tuple form on Xc^d", r.tuple_form.holds);
  add("|Xc| < 3 k band", static_cast<double>(r.Xc_size) < r.Xc_limit);
  add("|Xc| < 3 k^(1+3eps)", static_cast<double>(r.Xc_size) < r.Xc_limit_paper);
  add("g vanishes outside (-N/2, N/2]", r.g_leak < 1e-9);
  add("g values in [0,1]", r.g_range_violation <= kDensityTolerance);
  add("window mass equals |I|", r.window_mass_rel_error <= 1e-6);
  add("g mass >= |I| theta", r.g_mass >= r.g_averaging_bound - 1e-9 * (1.0 + r.g_averaging_bound));
  add("g mass >= k^-eps theta N", r.g_mass >= r.g_mass_bound - 1e-9 * (1.0 + r.g_mass_bound));
  add("count_f >= count_g", r.count_f >= r.count_g - 1e-6 * (1.0 + r.count_f));
  add("count_g direct = fourier",
      std::abs(r.count_g - r.count_g_fourier) <= 1e-6 * std::max(1.0, std::abs(r.count_g)));
  add("h^ vanishes off V", r.h_hat_off_V < 1e-8 * (1.0 + std::abs(H(0))));
  add("h^ matches the W-sum formula on V", r.h_hat_formula_rel_error <= 1e-6);
  add("h is W-invariant", r.h_w_invariance < 1e-9);
  add("count_h direct = fourier", r.count_h_rel_error <= 1e-6);
  add("count_h >= h_floor", r.count_h >= r.h_floor - 1e-6 * (1.0 + r.count_h));
  add("Sigma identity", r.sigma_identity_rel_error <= 1e-6);
  add("selected Sigma term <= average", r.sigma_value <= r.sigma_average * (1.0 + 1e-12));
  return r;
}

ChainResult run_chain(const CyclicFunction& f, const EquationForm& eq, double epsilon,
                      std::int64_t k, const TransferOverrides& overrides) {
  TransferPlan plan = plan_transfer(f, eq, epsilon, k, overrides);
  ChainReport report = execute_plan(f, plan);
  return ChainResult{std::move(plan), std::move(report)};
}

std::vector<std::string> verify_plan(const CyclicFunction& f, const TransferPlan& plan) {
  std::vector<std::string> bad;
  const TransferPlan fresh_shape(plan.N, plan.k, plan.epsilon, plan.eq, plan.overrides);
  auto cmp = [&](const char* name, auto a, auto b) {
    if (a != b) bad.emplace_back(name);
  };
  cmp("L", plan.L, fresh_shape.L);
  cmp("I_half", plan.I_half, fresh_shape.I_half);
  cmp("J_lo", plan.J_lo, fresh_shape.J_lo);
  cmp("J_hi", plan.J_hi, fresh_shape.J_hi);
  if (std::abs(plan.x_band - fresh_shape.x_band) > 1e-12 * fresh_shape.x_band) bad.emplace_back("x_band");
  if (std::abs(plan.separation_numer - fresh_shape.separation_numer) >
      1e-12 * fresh_shape.separation_numer) {
    bad.emplace_back("separation_numer");
  }
  if (f.modulus() != plan.N) {
    bad.emplace_back("N");
    return bad;
  }
  TransferPlan fresh = plan_transfer(f, plan.eq, plan.epsilon, plan.k, plan.overrides);
  cmp("m2", plan.m2, fresh.m2);
  cmp("q", plan.q, fresh.q);
  cmp("top_frequencies", plan.top_frequencies, fresh.top_frequencies);
  cmp("b_set", plan.b_set, fresh.b_set);
  cmp("m1", plan.m1, fresh.m1);
  cmp("M", plan.M, fresh.M);
  cmp("Xc", plan.Xc, fresh.Xc);
  if (std::abs(plan.separation_bad_fraction - fresh.separation_bad_fraction) > 1e-12) {
    bad.emplace_back("separation_bad_fraction");
  }
  if (!bad.empty()) return bad;
  const GBuild gb = build_g(dilate(f, fresh.q), fresh);
  cmp("u_g", plan.u_g, gb.u_g);
  const HBuild hb = build_h(gb.g, dft(gb.g), fresh);
  cmp("u_h", plan.u_h, hb.u_h);
  return bad;
}

}  // namespace zncount
