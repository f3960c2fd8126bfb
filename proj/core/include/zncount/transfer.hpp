#pragma once

/**
 * @file transfer.hpp
 * @brief Moving a counting problem from Z_N to Z_M, M = m1 m2.
 *
 * Pipeline, in order:
 *   1. pick a prime m2 in [k^{2+2eps}, 2 k^{2+2eps}];
 *   2. dilate f by q so that its top-k frequencies are "separated" for all
 *      but a k^{-2} fraction of m1 in J = [k^{-2-eps} N, 2 k^{-2-eps} N];
 *   3. pick m1 in J giving M = m1 m2 odd, coprime to every a_i, and with the
 *      correspondence property on the exceptional frequencies X^c;
 *   4. build g on Z_M: a window-multiplied translate of f supported on
 *      (-N/2, N/2], so that the Z_M count of g is at most the Z_N count of f;
 *   5. build h = (1_{u+V} g) * 1_W, which is invariant under W, and bound
 *      its count below by |W|^{d-2} sum_n h(n)^d.
 *
 * Every stage is checked directly instead of through asymptotic estimates.
 * Two multiplicative overrides make the structural checks reachable at
 * N ~ 10^3..10^4: i_scale shrinks the window half-width k^{-eps} N, and
 * x_scale shrinks the X-band k^{3 eps} together with the separation
 * threshold k^{4 eps} = k^{eps} * k^{3 eps}.
 */

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zncount/counting.hpp"
#include "zncount/spectrum.hpp"
#include "zncount/zn_core.hpp"

namespace zncount {

struct TransferOverrides {
  double i_scale = 1.0;
  double x_scale = 1.0;

  bool any() const { return i_scale != 1.0 || x_scale != 1.0; }
  /// Parses "key=val,key=val" with keys i_scale and x_scale.
  static TransferOverrides parse(const std::string& text);
};

struct TransferPlan {
  TransferPlan(std::int64_t N, std::int64_t k, double epsilon, EquationForm eq,
               TransferOverrides overrides = {});

  // Inputs.
  std::int64_t N;
  std::int64_t k;
  double epsilon;
  EquationForm eq;
  TransferOverrides overrides;

  // Derived from the inputs alone.
  std::int64_t L;             ///< floor(ln N) + 1
  std::int64_t I_half;        ///< floor(i_scale k^{-eps} N); I = [-I_half, I_half]
  double x_band;              ///< x_scale k^{3 eps}
  double separation_numer;    ///< x_scale k^{4 eps}; threshold is this / m2
  std::int64_t J_lo;          ///< ceil(k^{-2-eps} N)
  std::int64_t J_hi;          ///< floor(2 k^{-2-eps} N)

  // Search results.
  std::int64_t m2 = 0;
  std::int64_t q = 1;
  double separation_bad_fraction = 0.0;
  std::vector<std::int64_t> top_frequencies{};  ///< b_1..b_k of the undilated f
  std::vector<std::int64_t> b_set{};            ///< q b_i mod N over nonzero lambda_i
  std::int64_t m1 = 0;
  std::int64_t M = 0;
  std::vector<std::int64_t> Xc{};  ///< sorted residues in [0, M)
  std::int64_t u_g = 0;
  std::int64_t u_h = 0;

  std::int64_t I_size() const { return 2 * I_half + 1; }
  /// Support radius of the window: L * I_half.
  std::int64_t window_radius() const { return L * I_half; }
  std::int64_t X_size() const { return M - static_cast<std::int64_t>(Xc.size()); }
  CrtSplit split() const { return CrtSplit(m1, m2); }
};

// ---------------------------------------------------------------------------
// Stage 1-3: constants, dilation, modulus
// ---------------------------------------------------------------------------

/// Smallest prime >= ceil(k^{2+2 eps}); InternalError if it exceeds 2 k^{2+2 eps}.
std::int64_t choose_m2(std::int64_t k, double epsilon);

/// f*(n) = f(q n). Throws std::invalid_argument unless gcd(q, N) = 1.
CyclicFunction dilate(const CyclicFunction& f, std::int64_t q);

/// The top-k frequencies whose coefficient is nonzero. Ranks among exact
/// zeros are arbitrary, so they take no part in the separation search.
std::vector<std::int64_t> separation_frequencies(const SortedSpectrum& spectrum, std::int64_t k);

/// True when every quadruple over b_set x coeffs satisfies: either
/// a_u b_i = a_v b_j (mod N) or ||m1 (a_u b_i - a_v b_j) / N|| > numer / m2.
bool separates(std::int64_t m1, std::span<const std::int64_t> b_set, const EquationForm& eq,
               std::int64_t N, std::int64_t m2, double separation_numer);

/// Fraction of m1 in [J_lo, J_hi] for which separates() fails.
double separation_bad_fraction(std::span<const std::int64_t> b_set, const EquationForm& eq,
                               std::int64_t N, std::int64_t J_lo, std::int64_t J_hi,
                               std::int64_t m2, double separation_numer);

struct SeparationResult {
  std::int64_t q = 1;
  std::int64_t bad_count = 0;
  std::int64_t candidates = 0;  ///< |J|
  double bad_fraction = 0.0;
};

/// Smallest q in [1, N-1] whose dilated top-k set has a bad-m1 fraction of
/// at most k^{-2}. Throws SearchFailure when no q qualifies.
SeparationResult separation_search(const SortedSpectrum& spectrum, const EquationForm& eq,
                                   std::int64_t k, double epsilon, std::int64_t m2,
                                   const TransferOverrides& overrides = {});

struct XSplit {
  std::vector<std::int64_t> Xc{};  ///< sorted, in [0, M)
  std::int64_t X_size = 0;
};

/// X^c = {a in Z_M : ||a/M - b/N|| <= band / M for some b in b_set}, by exact
/// integer comparison.
XSplit compute_X(std::int64_t M, std::int64_t N, std::span<const std::int64_t> b_set,
                 double band);
XSplit compute_X(const TransferPlan& plan);

struct CorrespondenceResult {
  bool holds = true;                  ///< mod-M vs mod-m2 form
  bool projection_form_holds = true;  ///< mod-M vs projection v(.) form
  /// First violating (x, y, a_i, a_j), if any.
  std::optional<std::array<std::int64_t, 4>> witness;
};

/// For all x, y in Xc and a_i, a_j: a_i x = a_j y (mod M) iff (mod m2).
CorrespondenceResult verify_correspondence(std::int64_t M, std::int64_t m1, std::int64_t m2,
                                           std::span<const std::int64_t> Xc,
                                           const EquationForm& eq);

/// Smallest m1 in [J_lo, J_hi] that separates plan.b_set, makes M = m1 m2 odd
/// and coprime to every a_i with gcd(m1, m2) = 1, and satisfies the
/// correspondence property. Throws SearchFailure when none does.
std::int64_t choose_m1(const TransferPlan& plan);

/// Dilation, m2, q, m1, M and X^c for f. u_g and u_h are filled by the builders.
TransferPlan plan_transfer(const CyclicFunction& f, const EquationForm& eq, double epsilon,
                           std::int64_t k, const TransferOverrides& overrides = {});

// ---------------------------------------------------------------------------
// Stage 4-5: g and h
// ---------------------------------------------------------------------------

struct GBuild {
  CyclicFunction g;           ///< on Z_M
  std::int64_t u_g = 0;
  std::vector<double> window{};  ///< w(n) for n = -R..R, R = L I_half
  std::int64_t radius = 0;
  double window_mass = 0.0;    ///< sum w, should equal |I|
  double mass = 0.0;           ///< g^(0) = sum g
  double averaging_bound = 0.0;  ///< N^{-1} |I| f^(0)
  double scaled_mass_bound = 0.0;  ///< i_scale k^{-eps} theta N
};

/// w = |I|^{-L+1} (1_I)^{*L} on [-R, R] (linear convolution, no wrap).
std::vector<double> transfer_window(std::int64_t I_half, std::int64_t L);

/// g(n) = f(n - u_g) w(n) on representatives n in [-R, R], 0 elsewhere in Z_M,
/// with u_g the smallest maximizer of sum_n f(n - u) w(n).
/// PlanRejected when R >= N/2 (support confinement) or sum|a_i| R >= M
/// (confined solutions would not be integer solutions).
GBuild build_g(const CyclicFunction& f_dilated, const TransferPlan& plan);

/// Inner expression of the Sigma functional at translate u:
///   sum_{a in Xc} |G(a) - e(w(a) u / M) H_u(v(a))|^2 + sum_{v in V2} |H_u(v)|^2,
/// H_u(v) = sum_{x in W} e(-x u / M) G(v + x), V1 = v(Xc), V2 = V \ V1.
double sigma_inner(const CyclicFunction& g_hat, const TransferPlan& plan, std::int64_t u);

struct HBuild {
  CyclicFunction h;  ///< on Z_M
  CyclicFunction h_hat;
  std::int64_t u_h = 0;
  double sigma_value = 0.0;     ///< inner(u_h)
  double sigma_total = 0.0;     ///< sum_{u in Z_M} inner(u)
  double sigma_identity_rhs = 0.0;  ///< M sum_{a in X} |G(a)|^2
  double sigma_average = 0.0;   ///< sigma_total / M
};

/// h = (1_{u_h + V} g) * 1_W with u_h the smallest minimizer of sigma_inner.
/// inner(u) depends on u mod m1 only, so the exhaustive scan runs over
/// [0, m1) and Sigma = m2 * sum_{u < m1} inner(u).
HBuild build_h(const CyclicFunction& g, const CyclicFunction& g_hat, const TransferPlan& plan);

/// H(a) = sum_{x in W} e(-x u / M) G(a + x), the closed form of h^ on V.
Complex h_hat_formula(const CyclicFunction& g_hat, const CrtSplit& split, std::int64_t u,
                      std::int64_t a);

// ---------------------------------------------------------------------------
// Deductions from the correspondence property
// ---------------------------------------------------------------------------

/// v restricted to Xc is injective.
bool projection_injective(const CrtSplit& split, std::span<const std::int64_t> Xc);

struct TupleFormResult {
  std::int64_t v_tuples = 0;  ///< v in V with (a_i v) in V1^d
  std::int64_t b_tuples = 0;  ///< b in Z_M with (a_i b) in Xc^d
  bool holds = true;          ///< preimages have the form (a_i b) with v = v(b), bijectively
};

TupleFormResult check_tuple_form(const CrtSplit& split, std::span<const std::int64_t> Xc,
                                 const EquationForm& eq);

// ---------------------------------------------------------------------------
// Whole chain
// ---------------------------------------------------------------------------

struct ChainReport {
  HypothesisReport hypothesis;  ///< advisory

  double count_f = 0.0;          ///< Z_N, brute force
  double count_g = 0.0;          ///< Z_M, brute force
  double count_g_fourier = 0.0;
  double count_h = 0.0;          ///< Z_M, M^{-1} sum_{v in V} prod H(a_i v)
  double count_h_direct = 0.0;   ///< Z_M, brute force
  double h_floor = 0.0;          ///< |W|^{d-2} sum_n h(n)^d
  double g_mass = 0.0;
  double h_mass = 0.0;
  double sigma_value = 0.0;

  double separation_bad_fraction = 0.0;
  double separation_limit = 0.0;  ///< k^{-2}
  bool correspondence = false;
  bool correspondence_projection = false;
  bool projection_injective = false;
  TupleFormResult tuple_form;
  std::int64_t Xc_size = 0;
  double Xc_limit = 0.0;          ///< 3 k x_band (= 3 k^{1+3 eps} without overrides)
  double Xc_limit_paper = 0.0;    ///< 3 k^{1+3 eps}
  double g_leak = 0.0;            ///< max |g| on representatives outside (-N/2, N/2]
  double g_range_violation = 0.0; ///< max distance of g values from [0,1]
  double window_mass_rel_error = 0.0;
  double g_averaging_bound = 0.0;
  double g_mass_bound = 0.0;      ///< i_scale k^{-eps} theta N
  double h_hat_off_V = 0.0;       ///< max_{a not in V} |H(a)|
  double h_hat_formula_rel_error = 0.0;
  double h_w_invariance = 0.0;    ///< max |h(n + w) - h(n)|
  double count_h_rel_error = 0.0; ///< fourier vs direct
  double sigma_total = 0.0;
  double sigma_identity_rhs = 0.0;
  double sigma_identity_rel_error = 0.0;
  double sigma_average = 0.0;

  struct Check {
    std::string name;
    bool passed;
  };
  std::vector<Check> checks{};
  bool all_passed() const;
};

struct ChainResult {
  TransferPlan plan;
  ChainReport report;
};

/// Builds g and h for a plan whose q, m2, m1, Xc are already fixed, then
/// evaluates every chain check. u_g and u_h are recomputed and written back.
ChainReport execute_plan(const CyclicFunction& f, TransferPlan& plan);

/// plan_transfer followed by execute_plan; failures carry a stage label
/// (separation-search, m1-search, g-build, h-build).
ChainResult run_chain(const CyclicFunction& f, const EquationForm& eq, double epsilon,
                      std::int64_t k, const TransferOverrides& overrides = {});

/// Re-derives every searched quantity of a (possibly deserialized) plan and
/// lists the fields that disagree. Empty means the plan is consistent.
std::vector<std::string> verify_plan(const CyclicFunction& f, const TransferPlan& plan);

}  // namespace zncount
