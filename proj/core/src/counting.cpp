#include "zncount/counting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "zncount/errors.hpp"
#include "zncount/summation.hpp"

namespace zncount {

// ---------------------------------------------------------------------------
// EquationForm
// ---------------------------------------------------------------------------

EquationForm::EquationForm(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 3) {
    throw std::invalid_argument("EquationForm: need d >= 3 coefficients, got " +
                                std::to_string(coeffs_.size()));
  }
  std::int64_t sum = 0;
  std::int64_t max_abs = 0;
  for (std::int64_t a : coeffs_) {
    if (a == 0) throw std::invalid_argument("EquationForm: coefficients must be nonzero");
    sum += a;
    max_abs = std::max(max_abs, std::abs(a));
    abs_sum_ += std::abs(a);
  }
  if (sum != 0) {
    throw std::invalid_argument("EquationForm: coefficients must sum to 0 (sum is " +
                                std::to_string(sum) + ")");
  }
  big_d_ = 4 * static_cast<std::int64_t>(coeffs_.size()) * max_abs;
}

EquationForm EquationForm::parse(const std::string& text) {
  std::vector<std::int64_t> coeffs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    std::int64_t value = 0;
    try {
      value = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("EquationForm: cannot parse coefficient '" + item + "'");
    }
    while (pos < item.size() && item[pos] == ' ') ++pos;
    if (pos != item.size()) {
      throw std::invalid_argument("EquationForm: cannot parse coefficient '" + item + "'");
    }
    coeffs.push_back(value);
  }
  return EquationForm(std::move(coeffs));
}

std::string EquationForm::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(coeffs_[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute force
// ---------------------------------------------------------------------------
namespace {

class BruteCounter {
 public:
  BruteCounter(const CyclicFunction& f, const EquationForm& eq)
      : n_(f.modulus()), values_(f.real_values()) {
    for (std::int64_t a : eq.coeffs()) reduced_.push_back(mod(a, n_));
    const std::int64_t last = reduced_.back();
    gcd_ = std::gcd(last, n_);  // gcd(0, n) = n
    step_ = n_ / gcd_;
    inv_ = step_ == 1 ? 0 : mod_inverse(last / gcd_, step_);
    // class_sum_[r] = sum of f over x = r (mod n / gcd).
    class_sum_.assign(static_cast<std::size_t>(step_), 0.0);
    for (std::int64_t r = 0; r < step_; ++r) {
      CompensatedSum s;
      for (std::int64_t x = r; x < n_; x += step_) s.add(values_[static_cast<std::size_t>(x)]);
      class_sum_[static_cast<std::size_t>(r)] = s.value();
    }
  }

  double run() {
    recurse(0, 0, 1.0);
    return total_.value();
  }

 private:
  void recurse(std::size_t level, std::int64_t partial, double product) {
    const std::int64_t a = reduced_[level];
    const bool last_free = level + 2 == reduced_.size();
    std::int64_t p = partial;
    for (std::int64_t x = 0; x < n_; ++x, p = (p + a) % n_) {
      const double fx = values_[static_cast<std::size_t>(x)];
      if (fx == 0.0) continue;
      if (last_free) {
        const std::int64_t target = p == 0 ? 0 : n_ - p;
        if (target % gcd_ != 0) continue;
        const std::int64_t x0 = mul_mod(target / gcd_, inv_, step_);
        total_.add(product * fx * class_sum_[static_cast<std::size_t>(x0)]);
      } else {
        recurse(level + 1, p, product * fx);
      }
    }
  }

  std::int64_t n_;
  std::vector<double> values_;
  std::vector<std::int64_t> reduced_;
  std::int64_t gcd_ = 1;
  std::int64_t step_ = 1;
  std::int64_t inv_ = 0;
  std::vector<double> class_sum_;
  CompensatedSum total_;
};

}  // namespace

double count_bruteforce(const CyclicFunction& f, const EquationForm& eq) {
  if (!f.is_real()) throw std::invalid_argument("count_bruteforce: f must be real-valued");
  return BruteCounter(f, eq).run();
}

// ---------------------------------------------------------------------------
// Fourier
// ---------------------------------------------------------------------------

double count_fourier_from_transform(const CyclicFunction& F, const EquationForm& eq) {
  const std::int64_t n = F.modulus();
  std::vector<std::int64_t> reduced;
  for (std::int64_t a : eq.coeffs()) reduced.push_back(mod(a, n));
  CompensatedComplexSum acc;
  std::vector<std::int64_t> idx(reduced.size(), 0);  // a_i b mod n, advanced incrementally
  for (std::int64_t b = 0; b < n; ++b) {
    Complex term = 1.0;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      term *= F(idx[i]);
      idx[i] += reduced[i];
      if (idx[i] >= n) idx[i] -= n;
    }
    acc.add(term);
  }
  const Complex total = acc.value() / static_cast<double>(n);
  if (std::abs(total.imag()) > 1e-6 * (1.0 + std::abs(total.real()))) {
    throw NumericalInconsistency("count_fourier: imaginary residue " +
                                 std::to_string(total.imag()) + " exceeds tolerance");
  }
  return total.real();
}

double count_fourier(const CyclicFunction& f, const EquationForm& eq, DftMethod method) {
  return count_fourier_from_transform(dft(f, method), eq);
}

// ---------------------------------------------------------------------------
// Lower bound and certificate
// ---------------------------------------------------------------------------
namespace {

double lower_bound_formula(double theta, std::int64_t N, std::int64_t k, double epsilon, int d) {
  const double k_exp = -2.0 * (d - 2) - 2.0 * epsilon * (d - 1.5);
  return 0.1 * std::pow(4.0, -d) * std::pow(static_cast<double>(k), k_exp) * theta *
         std::pow(theta * static_cast<double>(N), d - 1);
}

}  // namespace

double theorem_lower_bound(double theta, std::int64_t N, std::int64_t k, double epsilon, int d) {
  if (!(theta > 0.0 && theta <= 1.0 + kDensityTolerance)) {
    throw std::invalid_argument("theorem_lower_bound: theta must lie in (0, 1]");
  }
  if (N < 1) throw std::invalid_argument("theorem_lower_bound: N must be positive");
  if (k < 1) throw std::invalid_argument("theorem_lower_bound: k must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("theorem_lower_bound: epsilon must lie in (0, 1)");
  }
  if (d < 3) throw std::invalid_argument("theorem_lower_bound: d must be >= 3");
  return lower_bound_formula(theta, N, k, epsilon, d);
}

const char* to_string(CountMethod method) {
  return method == CountMethod::brute ? "brute" : "fourier";
}

Certificate certify(const CyclicFunction& f, const EquationForm& eq, double epsilon,
                    std::int64_t k, HypothesisMode mode, CountMethod method) {
  Certificate c;
  c.method = method;
  c.hypothesis = check_hypothesis(f, eq.d(), epsilon, k, mode);
  c.hypothesis_failed = !c.hypothesis.passed;
  c.count = method == CountMethod::brute ? count_bruteforce(f, eq) : count_fourier(f, eq);
  c.lower_bound = c.hypothesis.theta > 0.0
                      ? theorem_lower_bound(c.hypothesis.theta, f.modulus(), k, epsilon, eq.d())
                      : 0.0;
  c.satisfied = c.count > c.lower_bound;
  return c;
}

}  // namespace zncount
