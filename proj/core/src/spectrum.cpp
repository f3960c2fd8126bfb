#include "zncount/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace zncount {

SortedSpectrum sort_spectrum(const CyclicFunction& f, DftMethod method) {
  if (!f.is_real()) throw std::invalid_argument("sort_spectrum: input must be real-valued");
  f.require_density("sort_spectrum");
  const std::int64_t n = f.modulus();
  auto F = dft(f, method);

  // Real input: F(-a) = conj F(a). Impose it exactly.
  for (std::int64_t a = 1; 2 * a < n; ++a) F[n - a] = std::conj(F(a));
  if (n % 2 == 0) F[n / 2] = F(n / 2).real();
  F[0] = F(0).real();
  // Coefficients at roundoff level are zero; snapping them makes the
  // ascending-frequency tie rule deterministic (e.g. for constant f).
  const double floor = 1e-12 * std::abs(F(0));
  for (std::int64_t a = 1; a < n; ++a) {
    if (std::abs(F(a)) <= floor) F[a] = 0.0;
  }

  std::vector<double> norm(static_cast<std::size_t>(n));
  for (std::int64_t a = 0; a < n; ++a) norm[static_cast<std::size_t>(a)] = std::norm(F(a));

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  // For f >= 0 the zero frequency dominates; pin it first so rounding cannot
  // move a mathematically equal coefficient ahead of it.
  std::stable_sort(order.begin() + 1, order.end(), [&](std::int64_t x, std::int64_t y) {
    return norm[static_cast<std::size_t>(x)] > norm[static_cast<std::size_t>(y)];
  });

  SortedSpectrum s;
  s.modulus = n;
  s.entries.reserve(static_cast<std::size_t>(n));
  for (std::int64_t a : order) s.entries.push_back({a, F(a)});
  s.tail_sums.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t j = n - 1; j >= 0; --j) {
    s.tail_sums[static_cast<std::size_t>(j)] =
        s.tail_sums[static_cast<std::size_t>(j) + 1] +
        std::norm(s.entries[static_cast<std::size_t>(j)].coefficient);
  }
  s.sigma_sq = s.tail_sums[0];
  return s;
}

namespace {

void require_rank(const SortedSpectrum& s, std::int64_t k, const char* what) {
  if (k < 1 || k > s.modulus) {
    throw std::invalid_argument(std::string(what) + ": k=" + std::to_string(k) +
                                " outside [1, " + std::to_string(s.modulus) + "]");
  }
}

}  // namespace

double tail_energy(const SortedSpectrum& s, std::int64_t k) {
  require_rank(s, k, "tail_energy");
  return s.tail_sums[static_cast<std::size_t>(k - 1)];
}

std::vector<std::int64_t> top_frequencies(const SortedSpectrum& s, std::int64_t k) {
  require_rank(s, k, "top_frequencies");
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) out.push_back(s.entries[static_cast<std::size_t>(j)].frequency);
  return out;
}

const char* to_string(HypothesisMode mode) {
  return mode == HypothesisMode::strict ? "strict" : "relaxed";
}

HypothesisMode parse_hypothesis_mode(const std::string& text) {
  if (text == "strict") return HypothesisMode::strict;
  if (text == "relaxed") return HypothesisMode::relaxed;
  throw std::invalid_argument("mode must be 'strict' or 'relaxed', got '" + text + "'");
}

HypothesisReport check_hypothesis(const CyclicFunction& f, int d, double epsilon,
                                  std::int64_t k, HypothesisMode mode) {
  if (d < 3) throw std::invalid_argument("check_hypothesis: d must be >= 3");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("check_hypothesis: epsilon must lie in (0, 1)");
  }
  if (mode == HypothesisMode::strict && !is_prime(f.modulus())) {
    throw std::invalid_argument("check_hypothesis: strict mode needs a prime modulus, got " +
                                std::to_string(f.modulus()));
  }
  return check_hypothesis(f, sort_spectrum(f), d, epsilon, k, mode);
}

HypothesisReport check_hypothesis(const CyclicFunction& f, const SortedSpectrum& s, int d,
                                  double epsilon, std::int64_t k, HypothesisMode mode) {
  if (d < 3) throw std::invalid_argument("check_hypothesis: d must be >= 3");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("check_hypothesis: epsilon must lie in (0, 1)");
  }
  if (s.modulus != f.modulus()) throw std::invalid_argument("check_hypothesis: spectrum/modulus mismatch");
  if (mode == HypothesisMode::strict && !is_prime(f.modulus())) {
    throw std::invalid_argument("check_hypothesis: strict mode needs a prime modulus, got " +
                                std::to_string(f.modulus()));
  }
  require_rank(s, k, "check_hypothesis");

  const std::int64_t n = f.modulus();
  const double log_n = std::log(static_cast<double>(n));
  HypothesisReport r;
  r.modulus = n;
  r.k = k;
  r.epsilon = epsilon;
  r.d = d;
  r.mode = mode;
  r.theta = s.entries[0].coefficient.real() / static_cast<double>(n);
  r.sigma_sq = s.sigma_sq;
  r.tail_energy = tail_energy(s, k);
  r.tail_threshold =
      std::pow(static_cast<double>(k), -(4.0 + 10.0 * epsilon) * (d - 2)) * s.sigma_sq;
  r.k_upper = std::pow(static_cast<double>(n), 1.0 / 11.0);

  r.theta_positive = r.theta > 0.0;
  r.tail_ok = r.tail_energy < r.tail_threshold;
  r.k_at_most_upper = static_cast<double>(k) <= r.k_upper;
  if (r.theta_positive) {
    // 1000^{d/eps} theta^{-1/(eps d)} log N, kept in log10 form as well since
    // it overflows double for small eps.
    r.k_lower_strict_log10 =
        3.0 * d / epsilon - std::log10(r.theta) / (epsilon * d) + std::log10(log_n);
    r.k_lower_strict = std::pow(10.0, r.k_lower_strict_log10);
    r.k_at_least_lower = std::log10(static_cast<double>(k)) >= r.k_lower_strict_log10;
  } else {
    r.k_lower_strict = HUGE_VAL;
    r.k_lower_strict_log10 = HUGE_VAL;
    r.k_at_least_lower = false;
  }

  const bool relaxed_ok = r.theta_positive && r.tail_ok;
  r.passed = mode == HypothesisMode::relaxed
                 ? relaxed_ok
                 : relaxed_ok && r.k_at_most_upper && r.k_at_least_lower;

  if (!r.theta_positive) r.warnings.emplace_back("theta > 0 violated");
  if (epsilon >= 1.0 / 3.0) {
    r.warnings.emplace_back("epsilon >= 1/3: the dilation-count argument assumes epsilon < 1/3");
  }
  if (!r.k_at_most_upper) r.warnings.emplace_back("k exceeds N^{1/11}");
  return r;
}

}  // namespace zncount
