#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zncount/zn_core.hpp"

namespace zncount {

struct SpectrumEntry {
  std::int64_t frequency;  ///< b_j in Z_N
  Complex coefficient;     ///< lambda_j = F(b_j)
};

/// Fourier coefficients in rank order: |lambda_1| >= |lambda_2| >= ...
/// Ties are broken by ascending frequency. For a density the zero
/// frequency is always rank 1.
struct SortedSpectrum {
  std::int64_t modulus = 0;
  std::vector<SpectrumEntry> entries;
  /// tail_sums[j] = sum_{r >= j} |lambda_{r+1}|^2 (0-based), tail_sums[N] = 0.
  std::vector<double> tail_sums;
  double sigma_sq = 0.0;
};

/// Requires a real function with values in [0,1]. Conjugate pairs are given
/// bit-identical magnitudes so the tie rule is exact for real input, and
/// coefficients with |F(a)| <= 1e-12 F(0) are set to exactly 0.
SortedSpectrum sort_spectrum(const CyclicFunction& f, DftMethod method = DftMethod::direct);

/// sum_{j >= k} |lambda_j|^2 with 1-based ranks; k in [1, N].
double tail_energy(const SortedSpectrum& s, std::int64_t k);

/// b_1, ..., b_k in rank order.
std::vector<std::int64_t> top_frequencies(const SortedSpectrum& s, std::int64_t k);

enum class HypothesisMode { strict, relaxed };

const char* to_string(HypothesisMode mode);
HypothesisMode parse_hypothesis_mode(const std::string& text);

/// Outcome of testing the smoothness hypothesis of the lower-bound theorem:
///   theta > 0,
///   sum_{j >= k} |lambda_j|^2 < k^{-(4+10 eps)(d-2)} sigma^2,
///   1000^{d/eps} theta^{-1/(eps d)} log N <= k <= N^{1/11}.
/// Relaxed mode keeps only the first two conditions; the k-range flags are
/// still computed and reported.
struct HypothesisReport {
  std::int64_t modulus = 0;
  double theta = 0.0;
  std::int64_t k = 0;
  double epsilon = 0.0;
  int d = 0;
  double sigma_sq = 0.0;
  double tail_energy = 0.0;
  double tail_threshold = 0.0;
  double k_lower_strict = 0.0;        ///< may be +inf
  double k_lower_strict_log10 = 0.0;  ///< finite whenever theta > 0
  double k_upper = 0.0;
  HypothesisMode mode = HypothesisMode::relaxed;

  bool theta_positive = false;
  bool tail_ok = false;
  bool k_at_most_upper = false;
  bool k_at_least_lower = false;
  bool passed = false;
  std::vector<std::string> warnings;
};

HypothesisReport check_hypothesis(const CyclicFunction& f, int d, double epsilon,
                                  std::int64_t k, HypothesisMode mode);

/// Same, reusing an already sorted spectrum of f.
HypothesisReport check_hypothesis(const CyclicFunction& f, const SortedSpectrum& s, int d,
                                  double epsilon, std::int64_t k, HypothesisMode mode);

}  // namespace zncount
