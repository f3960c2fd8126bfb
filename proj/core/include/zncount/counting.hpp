#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zncount/spectrum.hpp"
#include "zncount/zn_core.hpp"

namespace zncount {

/// Coefficients of an invariant equation a_1 x_1 + ... + a_d x_d = 0 with
/// sum a_i = 0, every a_i != 0 and d >= 3.
class EquationForm {
 public:
  explicit EquationForm(std::vector<std::int64_t> coeffs);

  /// Parses "a1,a2,...,ad" (signed integers, optional spaces).
  static EquationForm parse(const std::string& text);

  std::span<const std::int64_t> coeffs() const noexcept { return coeffs_; }
  int d() const noexcept { return static_cast<int>(coeffs_.size()); }
  /// D = 4 d max |a_i|.
  std::int64_t big_d() const noexcept { return big_d_; }
  /// sum |a_i|.
  std::int64_t abs_sum() const noexcept { return abs_sum_; }

  std::string to_string() const;

 private:
  std::vector<std::int64_t> coeffs_;
  std::int64_t big_d_ = 0;
  std::int64_t abs_sum_ = 0;
};

/// sum over solutions of a_1 x_1 + ... + a_d x_d = 0 (mod N) of f(x_1)...f(x_d),
/// enumerating (x_1..x_{d-1}) and all gcd(a_d, N) solutions for x_d.
/// f must be real.
double count_bruteforce(const CyclicFunction& f, const EquationForm& eq);

/// N^{-1} sum_b prod_i F(a_i b). Throws NumericalInconsistency when the
/// imaginary residue exceeds 1e-6 (1 + |result|).
double count_fourier(const CyclicFunction& f, const EquationForm& eq,
                     DftMethod method = DftMethod::direct);

/// Same as count_fourier, given F = dft(f) directly.
double count_fourier_from_transform(const CyclicFunction& F, const EquationForm& eq);

/// 10^{-1} 4^{-d} k^{-2(d-2) - 2 eps (d - 3/2)} theta (theta N)^{d-1}.
double theorem_lower_bound(double theta, std::int64_t N, std::int64_t k, double epsilon, int d);

enum class CountMethod { brute, fourier };

const char* to_string(CountMethod method);

struct Certificate {
  HypothesisReport hypothesis;
  double count = 0.0;
  double lower_bound = 0.0;
  bool satisfied = false;  ///< count > lower_bound
  bool hypothesis_failed = false;
  CountMethod method = CountMethod::fourier;
};

Certificate certify(const CyclicFunction& f, const EquationForm& eq, double epsilon,
                    std::int64_t k, HypothesisMode mode,
                    CountMethod method = CountMethod::fourier);

}  // namespace zncount
