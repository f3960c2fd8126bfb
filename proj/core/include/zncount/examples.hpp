#pragma once

/**
 * @file examples.hpp
 * @brief Density generators: sumset densities, the GPY pseudoprime weight and
 * its smoothed variants, and a seeded near-constant density for the transfer
 * pipeline.
 *
 * Asymptotic constants (kernel power 1000, width exponent 0.999, w* power
 * 1000) are parameters. The desk defaults below keep every plateau nonempty
 * for N in the low thousands.
 */

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zncount/random.hpp"
#include "zncount/zn_core.hpp"

namespace zncount {

/// Moebius function and divisor counts on 1..limit (index 0 unused).
struct SievePack {
  std::int64_t limit = 0;
  std::vector<int> moebius{};
  std::vector<std::int64_t> tau{};

  static SievePack build(std::int64_t limit);
  /// max_{1 <= n <= upto} tau(n).
  std::int64_t max_tau(std::int64_t upto) const;
};

/// |S|^{-(t-1)} (1_S * ... * 1_S) with t factors.
CyclicFunction sumset_density(std::int64_t N, std::span<const std::int64_t> S, int t);

/// Largest integer D with D <= N^delta.
std::int64_t truncation_level(std::int64_t N, double delta);

struct GpyData {
  CyclicFunction f;  ///< the pseudoprime weight, values in [0,1]
  /// inner(n) = sum_{d | n, d <= N^delta} mu(d) ln(N/d) for 1 <= n <= N/2, else 0.
  std::vector<double> inner{};
  std::int64_t truncation = 1;
  std::int64_t max_tau = 1;  ///< max_{n <= N/2} tau(n)
};

/// f(n) = (inner(n) / ln N)^2 / max tau^2 on 1 <= n <= N/2, 0 elsewhere.
GpyData gpy_data(std::int64_t N, double delta);
CyclicFunction gpy_weight(std::int64_t N, double delta);

struct SmoothingWindow {
  CyclicFunction w;      ///< values at multiples of d in [0, N/2]
  CyclicFunction w_hat;  ///< dft(w)
  std::int64_t d = 1;
  int power = 8;
  double alpha = 0.7;
  std::int64_t X_nominal = 0;  ///< floor(N^alpha)
  std::int64_t X = 0;          ///< box length actually used
  std::int64_t comb_last = 0;  ///< comb atoms at d j, 0 <= j <= comb_last (-1: none)
  /// w(m) = 1 for plateau_lo <= m <= plateau_hi (multiples of d).
  std::int64_t plateau_lo = 0;
  std::int64_t plateau_hi = -1;
  bool degenerate = false;
  std::vector<std::string> warnings{};

  bool plateau_empty() const { return plateau_lo > plateau_hi; }
  /// box(a) = sum_{0 <= n < X} e(a d n / N).
  Complex box(std::int64_t a) const;
  /// X^{-P} box(a)^P comb(a), the closed form of w_hat.
  Complex w_hat_formula(std::int64_t a) const;
};

/// w = X^{-P} (1_B)^{*P} * comb with B = {0, d, ..., (X-1) d} and the comb
/// {0, d, ..., comb_last d}, comb_last = floor(N / 2d) - P (X-1), so that the
/// support stays in [0, N/2] and w = 1 between P(X-1) d and comb_last d.
/// When that plateau would be empty and clamp is set, X is reduced to the
/// largest value leaving a nonempty plateau; either way a warning is recorded.
SmoothingWindow smoothing_window(std::int64_t d, std::int64_t N, int power, double alpha,
                                 bool clamp = true);

struct WindowCriterion {
  double threshold = 0.0;        ///< N^{-2}
  std::int64_t large_count = 0;  ///< a with |w_hat(a)| >= threshold
  std::int64_t criterion_failures = 0;  ///< large a with |box(a)| <= X N^{-3/P} / 2
  double max_formula_error = 0.0;  ///< max |dft(w) - closed form|
};

WindowCriterion check_window_criterion(const SmoothingWindow& win);

struct SmoothedParams {
  int power = 8;        ///< P for every w_d
  double alpha = 0.4;   ///< X = floor(N^alpha)
  int star_power = 8;   ///< kernel power of w*
  /// Thresholds on |f3^(a)| / f3^(0) for the large-coefficient sweep.
  std::vector<double> sweep = {1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<std::int64_t> tail_ranks = {2, 5, 10, 20};
};

struct SweepRow {
  double relative_threshold;
  std::int64_t count;
};

struct SmoothedPseudoprime {
  CyclicFunction f;    ///< gpy weight
  CyclicFunction f3;   ///< f w*
  CyclicFunction w_star;
  std::vector<double> g{};   ///< truncated divisor sum on 1..N/2
  std::vector<double> g2{};  ///< sum_d mu(d) ln(N/d) w_d(m), m >= 1
  std::vector<SmoothingWindow> windows{};  ///< one per d <= N^delta
  std::int64_t agree_lo = 0;  ///< intersection of the w_d plateaus
  std::int64_t agree_hi = -1;
  double g_agreement_error = 0.0;   ///< max |g2 - g| on [agree_lo, agree_hi]
  std::int64_t star_lo = 0;          ///< support of w* is within [star_lo, star_hi]
  std::int64_t star_hi = 0;
  bool star_inside_agreement = false;
  double f2_agreement_error = 0.0;  ///< max |f2 - f| on supp w*
  std::int64_t positivity_violations = 0;  ///< m with f3(m) > 0 but f(m) = 0
  double f3_mass = 0.0;             ///< f3^(0)
  std::vector<SweepRow> sweep{};
  std::vector<std::pair<std::int64_t, double>> tail_ratios{};  ///< (k, tail_k / sigma^2)
  std::vector<std::string> warnings{};
};

SmoothedPseudoprime smoothed_pseudoprime(std::int64_t N, double delta,
                                         const SmoothedParams& params = {});

struct SmoothDensityParams {
  double mean = 0.5;
  double amplitude = 0.04;  ///< of the single cosine mode
  double noise = 0.002;     ///< uniform noise half-width
};

/// mean + amplitude cos(2 pi b n / N + phi) + U(-noise, noise), with b and phi
/// drawn from the seed. Values are clipped to [0, 1].
CyclicFunction smooth_density(std::int64_t N, std::uint64_t seed,
                              const SmoothDensityParams& params = {});

}  // namespace zncount
