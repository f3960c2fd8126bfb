#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "zncount/errors.hpp"
#include "zncount/examples.hpp"
#include "zncount/random.hpp"
#include "zncount/transfer.hpp"

using namespace zncount;

namespace {

const EquationForm kEq({1, 1, -2});

// Either a_u b_i = a_v b_j (mod N) or ||m1 (a_u b_i - a_v b_j) / N|| > numer / m2,
// compared as integers: m2 * dist > numer * N.
bool separates_oracle(std::int64_t m1, const std::vector<std::int64_t>& b, const EquationForm& eq,
                      std::int64_t N, std::int64_t m2, double numer) {
  for (std::int64_t bi : b)
    for (std::int64_t bj : b)
      for (std::int64_t au : eq.coeffs())
        for (std::int64_t av : eq.coeffs()) {
          const std::int64_t x = oracle::md(au * bi - av * bj, N);
          if (x == 0) continue;
          const std::int64_t r = oracle::md(m1 * x, N);
          const std::int64_t dist = std::min(r, N - r);
          if (!(static_cast<long double>(dist) * m2 > static_cast<long double>(numer) * N)) return false;
        }
  return true;
}

struct Instance {
  CyclicFunction f;
  TransferPlan plan;
  ChainReport report;
};

const Instance& small_instance() {
  static const Instance inst = [] {
    auto f = smooth_density(199, 0);
    auto res = run_chain(f, kEq, 0.1, 2, TransferOverrides{0.04, 0.3});
    return Instance{f, res.plan, res.report};
  }();
  return inst;
}

const Instance& demo_instance() {
  static const Instance inst = [] {
    auto f = smooth_density(4999, 0);
    auto res = run_chain(f, kEq, 0.1, 3, TransferOverrides{0.03, 0.8});
    return Instance{f, res.plan, res.report};
  }();
  return inst;
}

}  // namespace

TEST(Overrides, Parse) {
  const auto o = TransferOverrides::parse("i_scale=0.03, x_scale=0.8");
  EXPECT_DOUBLE_EQ(o.i_scale, 0.03);
  EXPECT_DOUBLE_EQ(o.x_scale, 0.8);
  EXPECT_TRUE(o.any());
  EXPECT_FALSE(TransferOverrides{}.any());
  EXPECT_THROW(TransferOverrides::parse("y_scale=1"), std::invalid_argument);
  EXPECT_THROW(TransferOverrides::parse("i_scale=-1"), std::invalid_argument);
  EXPECT_THROW(TransferOverrides::parse("i_scale"), std::invalid_argument);
}

TEST(PlanConstants, Derived) {
  const TransferPlan p(4999, 3, 0.1, kEq);
  EXPECT_EQ(p.L, static_cast<std::int64_t>(std::floor(std::log(4999.0))) + 1);
  EXPECT_EQ(p.I_half, static_cast<std::int64_t>(std::floor(std::pow(3.0, -0.1) * 4999)));
  EXPECT_EQ(p.J_lo, static_cast<std::int64_t>(std::ceil(std::pow(3.0, -2.1) * 4999)));
  EXPECT_EQ(p.J_hi, static_cast<std::int64_t>(std::floor(2 * std::pow(3.0, -2.1) * 4999)));
  EXPECT_NEAR(p.x_band, std::pow(3.0, 0.3), 1e-12);
  EXPECT_NEAR(p.separation_numer, std::pow(3.0, 0.4), 1e-12);
  EXPECT_THROW(TransferPlan(4998, 3, 0.1, kEq), std::invalid_argument);
  EXPECT_THROW(TransferPlan(4999, 1, 0.1, kEq), std::invalid_argument);
}

TEST(ChooseM2, Examples) {
  EXPECT_EQ(choose_m2(2, 0.5), 11);
  EXPECT_EQ(choose_m2(10, 0.1), 163);
  for (std::int64_t k = 2; k < 40; ++k) {
    for (double eps : {0.05, 0.1, 0.3, 0.9}) {
      const std::int64_t m2 = choose_m2(k, eps);
      const double t = std::pow(static_cast<double>(k), 2 + 2 * eps);
      EXPECT_TRUE(is_prime(m2));
      EXPECT_GE(static_cast<double>(m2), t);
      EXPECT_LE(static_cast<double>(m2), 2 * t);
    }
  }
}

TEST(Dilate, Examples) {
  const std::int64_t one[] = {1}, three[] = {3};
  const auto d = dilate(CyclicFunction::indicator(5, one), 2);
  const auto e = CyclicFunction::indicator(5, three);
  for (int n = 0; n < 5; ++n) EXPECT_EQ(d(n), e(n));
  EXPECT_THROW(dilate(CyclicFunction::zeros(6), 2), std::invalid_argument);

  Rng rng(1);
  std::vector<double> v(101);
  for (double& x : v) x = rng.uniform();
  const auto f = CyclicFunction::from_real(v);
  const auto same = dilate(f, 1);
  for (int n = 0; n < 101; ++n) EXPECT_EQ(same(n), f(n));
  const auto s0 = sort_spectrum(f);
  const auto s1 = sort_spectrum(dilate(f, 37));
  for (std::size_t j = 0; j < s0.entries.size(); ++j) {
    EXPECT_NEAR(std::abs(s0.entries[j].coefficient), std::abs(s1.entries[j].coefficient), 1e-9 * 101);
  }
}

TEST(Separation, ZeroFrequencyIsVacuous) {
  const std::vector<std::int64_t> zero{0};
  for (std::int64_t m1 = 1; m1 < 200; ++m1) EXPECT_TRUE(separates(m1, zero, kEq, 4999, 13, 1e6));
  EXPECT_EQ(separation_bad_fraction(zero, kEq, 4999, 100, 200, 13, 1e6), 0.0);
  const auto s = sort_spectrum(CyclicFunction::constant(4999, 0.5));
  EXPECT_EQ(separation_frequencies(s, 3), zero);
  EXPECT_EQ(separation_search(s, kEq, 3, 0.1, choose_m2(3, 0.1)).q, 1);
}

TEST(Separation, DemoQPassesIndependentReverification) {
  const auto f = smooth_density(4999, 0);
  const TransferOverrides ov{0.03, 0.8};
  const auto s = sort_spectrum(f);
  const std::int64_t m2 = choose_m2(3, 0.1);
  const auto r = separation_search(s, kEq, 3, 0.1, m2, ov);
  const TransferPlan shape(4999, 3, 0.1, kEq, ov);
  std::vector<std::int64_t> b;
  for (std::int64_t x : separation_frequencies(s, 3)) b.push_back(oracle::md(x * r.q, 4999));
  std::int64_t bad = 0;
  for (std::int64_t m1 = shape.J_lo; m1 <= shape.J_hi; ++m1) {
    bad += !separates_oracle(m1, b, kEq, 4999, m2, shape.separation_numer);
  }
  const double fraction = static_cast<double>(bad) / (shape.J_hi - shape.J_lo + 1);
  EXPECT_LE(fraction, 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(fraction, r.bad_fraction);
  for (std::int64_t q = 1; q < r.q; ++q) {
    std::vector<std::int64_t> bq;
    for (std::int64_t x : separation_frequencies(s, 3)) bq.push_back(oracle::md(x * q, 4999));
    EXPECT_GT(separation_bad_fraction(bq, kEq, 4999, shape.J_lo, shape.J_hi, m2, shape.separation_numer),
              1.0 / 9.0)
        << q;
  }
}

TEST(Separation, LiteralThresholdFailsAtDemoScale) {
  const auto f = smooth_density(4999, 0);
  const auto s = sort_spectrum(f);
  EXPECT_THROW(separation_search(s, kEq, 3, 0.1, choose_m2(3, 0.1), TransferOverrides{0.03, 1.0}),
               SearchFailure);
  try {
    run_chain(f, kEq, 0.1, 3, TransferOverrides{0.03, 1.0});
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "separation-search");
    EXPECT_EQ(e.kind(), "search-failure");
  }
}

TEST(Separation, DefaultWindowIsRejected) {
  const auto f = smooth_density(4999, 0);
  try {
    run_chain(f, kEq, 0.1, 3, TransferOverrides{1.0, 0.8});
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "g-build");
    EXPECT_EQ(e.kind(), "plan-rejected");
  }
}

TEST(ComputeX, SingleFrequencyBand) {
  for (std::int64_t M : {135, 235, 1001}) {
    const std::vector<std::int64_t> zero{0};
    const auto x = compute_X(M, 101, zero, 1.0);
    EXPECT_EQ(x.Xc, (std::vector<std::int64_t>{0, 1, M - 1}));
    EXPECT_EQ(x.X_size, M - 3);
    EXPECT_EQ(compute_X(M, 101, zero, 2.5).Xc.size(), 5u);
  }
}

TEST(ComputeX, MatchesRationalOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t N = next_prime(50 + rng.below(500));
    const std::int64_t M = 101 + 2 * rng.below(400);
    std::vector<std::int64_t> b;
    for (int i = 0; i < 3; ++i) b.push_back(rng.below(N));
    const double band = 0.3 + 3.0 * rng.uniform();
    const auto x = compute_X(M, N, b, band);
    std::vector<std::int64_t> expected;
    for (std::int64_t a = 0; a < M; ++a) {
      bool in = false;
      for (std::int64_t bi : b) in = in || oracle::in_band(a, M, N, bi, band);
      if (in) expected.push_back(a);
    }
    EXPECT_EQ(x.Xc, expected);
  }
}

TEST(Correspondence, TrivialSets) {
  const std::vector<std::int64_t> zero{0}, none{};
  EXPECT_TRUE(verify_correspondence(235, 47, 5, zero, kEq).holds);
  EXPECT_TRUE(verify_correspondence(235, 47, 5, none, kEq).holds);
  EXPECT_TRUE(verify_correspondence(235, 47, 5, none, kEq).projection_form_holds);
  const std::vector<std::int64_t> clash{0, 5};
  const auto bad = verify_correspondence(235, 47, 5, clash, kEq);
  EXPECT_FALSE(bad.holds);
  ASSERT_TRUE(bad.witness.has_value());
}

TEST(SmallInstance, PlanInvariants) {
  const auto& [f, p, r] = small_instance();
  EXPECT_EQ(p.M, p.m1 * p.m2);
  EXPECT_EQ(p.M % 2, 1);
  EXPECT_EQ(std::gcd(p.m1, p.m2), 1);
  for (std::int64_t a : p.eq.coeffs()) EXPECT_EQ(std::gcd(p.M, std::abs(a)), 1);
  EXPECT_GE(p.m1, p.J_lo);
  EXPECT_LE(p.m1, p.J_hi);
  const double keps = std::pow(2.0, 0.1);
  EXPECT_GT(static_cast<double>(p.M), keps * p.N);
  EXPECT_LE(static_cast<double>(p.M), 4 * keps * p.N);
  EXPECT_LE(p.M, 1000);
  EXPECT_TRUE(separates_oracle(p.m1, p.b_set, p.eq, p.N, p.m2, p.separation_numer));
  EXPECT_LE(p.separation_bad_fraction, 0.25);
  EXPECT_LT(static_cast<double>(p.Xc.size()), 3 * 2 * p.x_band);
  EXPECT_TRUE(verify_correspondence(p.M, p.m1, p.m2, p.Xc, p.eq).holds);
  EXPECT_TRUE(verify_plan(f, p).empty());
  EXPECT_TRUE(r.all_passed());
}

TEST(SmallInstance, ChooseM1IsSmallestQualifying) {
  const auto& p = small_instance().plan;
  EXPECT_EQ(choose_m1(p), p.m1);
  for (std::int64_t m1 = p.J_lo; m1 < p.m1; ++m1) {
    const std::int64_t M = m1 * p.m2;
    const bool arithmetic = std::gcd(m1, p.m2) == 1 && M % 2 == 1;
    if (!arithmetic || !separates_oracle(m1, p.b_set, p.eq, p.N, p.m2, p.separation_numer)) continue;
    const auto xs = compute_X(M, p.N, p.b_set, p.x_band);
    const auto c = verify_correspondence(M, m1, p.m2, xs.Xc, p.eq);
    EXPECT_FALSE(c.holds && c.projection_form_holds) << m1;
  }
}

TEST(SmallInstance, GHatDualFormula) {
  const auto& [f, p, r] = small_instance();
  const auto fd = dilate(f, p.q);
  const auto gb = build_g(fd, p);
  const auto direct = oracle::dft(gb.g);
  const auto dual = oracle::g_hat_dual(oracle::dft(fd), p, gb.u_g);
  const auto G = dft(gb.g);
  long double scale = std::abs(direct[0]);
  for (std::int64_t a = 0; a < p.M; ++a) {
    ASSERT_LT(std::abs(direct[a] - dual[a]), 1e-6L * scale) << a;
    ASSERT_LT(std::abs(std::complex<long double>(G(a).real(), G(a).imag()) - direct[a]), 1e-9L * scale);
  }
}

TEST(SmallInstance, GSupportAndMass) {
  const auto& [f, p, r] = small_instance();
  const auto gb = build_g(dilate(f, p.q), p);
  const std::int64_t R = p.window_radius();
  ASSERT_LT(2 * R, p.N);
  for (std::int64_t n = 0; n < p.M; ++n) {
    const std::int64_t c = centered(n, p.M);
    if (c < -R || c > R) ASSERT_EQ(gb.g(n), Complex(0.0)) << n;
    ASSERT_GE(gb.g(n).real(), -1e-12);
    ASSERT_LE(gb.g(n).real(), 1.0 + 1e-12);
  }
  EXPECT_NEAR(gb.window_mass, static_cast<double>(p.I_size()), 1e-9 * p.I_size());
  EXPECT_GE(gb.mass, gb.scaled_mass_bound);
  EXPECT_GE(gb.mass, gb.averaging_bound - 1e-9);
  EXPECT_GE(r.count_f, r.count_g);
}

TEST(SmallInstance, WindowIsIteratedBoxConvolution) {
  const std::int64_t I_half = 3, L = 4;
  const auto w = transfer_window(I_half, L);
  const std::int64_t R = L * I_half;
  ASSERT_EQ(static_cast<std::int64_t>(w.size()), 2 * R + 1);
  std::vector<long double> c(2 * R + 1, 0.0L);
  for (std::int64_t n = -I_half; n <= I_half; ++n) c[n + R] = 1.0L;
  for (std::int64_t step = 1; step < L; ++step) {
    std::vector<long double> next(2 * R + 1, 0.0L);
    for (std::int64_t n = -R; n <= R; ++n)
      for (std::int64_t t = -I_half; t <= I_half; ++t)
        if (n - t >= -R && n - t <= R) next[n + R] += c[n - t + R];
    for (auto& x : next) x /= (2 * I_half + 1);
    c = next;
  }
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], static_cast<double>(c[i]), 1e-15);
}

TEST(SmallInstance, ConstantOneGivesWindow) {
  const auto one = CyclicFunction::constant(199, 1.0);
  const auto p = plan_transfer(one, kEq, 0.1, 2, TransferOverrides{0.04, 0.3});
  EXPECT_EQ(p.q, 1);
  const auto gb = build_g(one, p);
  const std::int64_t R = p.window_radius();
  for (std::int64_t n = -R; n <= R; ++n) EXPECT_DOUBLE_EQ(gb.g(n).real(), gb.window[n + R]);
  EXPECT_NEAR(gb.mass, static_cast<double>(p.I_size()), 1e-9 * p.I_size());
  EXPECT_GE(gb.mass, std::pow(2.0, -0.1) * 199 * p.overrides.i_scale);
}

TEST(SmallInstance, HFromDefinitionAndFormula) {
  const auto& [f, p, r] = small_instance();
  const auto gb = build_g(dilate(f, p.q), p);
  const auto G = dft(gb.g);
  const auto hb = build_h(gb.g, G, p);
  const auto h_def = oracle::h_from_definition(gb.g.values(), p.m1, p.m2, hb.u_h);
  for (std::int64_t n = 0; n < p.M; ++n) ASSERT_NEAR(hb.h(n).real(), h_def[n], 1e-12) << n;
  for (std::int64_t n = 0; n < p.M; ++n)
    for (std::int64_t t = 1; t < p.m1; t += 5) ASSERT_EQ(hb.h(n), hb.h(n + p.m2 * t));

  const auto H = oracle::dft(hb.h);
  const CrtSplit split(p.m1, p.m2);
  const long double scale = std::abs(H[0]);
  for (std::int64_t a = 0; a < p.M; ++a) {
    if (split.in_V(a)) {
      const Complex z = h_hat_formula(G, split, hb.u_h, a);
      ASSERT_LT(std::abs(std::complex<long double>(z.real(), z.imag()) - H[a]), 1e-9L * scale) << a;
    } else {
      ASSERT_LT(std::abs(H[a]), 1e-8L * (1 + scale)) << a;
    }
  }
}

TEST(SmallInstance, SigmaScanOverAllTranslates) {
  const auto& [f, p, r] = small_instance();
  const auto gb = build_g(dilate(f, p.q), p);
  const auto G = dft(gb.g);
  const auto hb = build_h(gb.g, G, p);
  long double total = 0;
  long double best = 1e300L;
  std::int64_t arg = -1;
  for (std::int64_t u = 0; u < p.M; ++u) {
    const long double v = oracle::sigma_inner(G.values(), p.m1, p.m2, p.Xc, u);
    ASSERT_NEAR(sigma_inner(G, p, u), static_cast<double>(v), 1e-9 * (1 + static_cast<double>(v))) << u;
    total += v;
    if (v < best * (1 - 1e-12L)) {
      best = v;
      arg = u;
    }
  }
  EXPECT_EQ(hb.u_h, arg);
  EXPECT_NEAR(hb.sigma_total, static_cast<double>(total), 1e-9 * static_cast<double>(total));
  EXPECT_NEAR(hb.sigma_total, hb.sigma_identity_rhs, 1e-6 * hb.sigma_identity_rhs);
  EXPECT_LE(hb.sigma_value, hb.sigma_average * (1 + 1e-12));
}

TEST(SmallInstance, CountsAndDeductions) {
  const auto& [f, p, r] = small_instance();
  EXPECT_LE(std::abs(r.count_h - r.count_h_direct), 1e-6 * std::max(1.0, r.count_h_direct));
  EXPECT_GE(r.count_h, r.h_floor - 1e-6 * (1 + r.count_h));
  EXPECT_GE(r.count_f, r.count_g - 1e-6 * (1 + r.count_f));
  const CrtSplit split(p.m1, p.m2);
  EXPECT_TRUE(projection_injective(split, p.Xc));
  const auto t = check_tuple_form(split, p.Xc, p.eq);
  EXPECT_TRUE(t.holds);
  EXPECT_EQ(t.v_tuples, t.b_tuples);
  EXPECT_GE(t.b_tuples, 1);
}

TEST(ConstantChain, ClosedForms) {
  for (double theta : {0.5, 1.0}) {
    const auto res = run_chain(CyclicFunction::constant(4999, theta), kEq, 0.1, 3, TransferOverrides{0.03, 0.8});
    const double expected = theta * theta * theta * 4999.0 * 4999.0;
    EXPECT_NEAR(res.report.count_f, expected, 1e-9 * expected);
    EXPECT_GE(res.report.count_f, res.report.count_g);
    EXPECT_EQ(res.plan.q, 1);
    EXPECT_TRUE(res.report.all_passed());
  }
}

TEST(DemoInstance, AllChecksGreen) {
  const auto& [f, p, r] = demo_instance();
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name;
  EXPECT_LE(r.separation_bad_fraction, 1.0 / 9.0);
  EXPECT_TRUE(r.correspondence);
  EXPECT_LT(static_cast<double>(r.Xc_size), 3 * std::pow(3.0, 1.3));
  EXPECT_LT(r.g_leak, 1e-9);
  EXPECT_GE(r.g_mass, 0.03 * std::pow(3.0, -0.1) * r.hypothesis.theta * 4999);
  EXPECT_LT(r.h_hat_off_V, 1e-8 * r.h_mass);
  EXPECT_LT(r.h_w_invariance, 1e-9);
  EXPECT_GE(r.count_f, r.count_g);
  EXPECT_GE(r.count_h, r.h_floor - 1e-6 * (1 + r.count_h));
  EXPECT_LE(r.sigma_identity_rel_error, 1e-6);
  EXPECT_TRUE(verify_plan(f, p).empty());
}

TEST(DemoInstance, VerifyPlanDetectsTampering) {
  const auto& [f, p, r] = demo_instance();
  TransferPlan bad = p;
  bad.m1 += 2;
  bad.M = bad.m1 * bad.m2;
  const auto diff = verify_plan(f, bad);
  EXPECT_NE(std::find(diff.begin(), diff.end(), "m1"), diff.end());
}
