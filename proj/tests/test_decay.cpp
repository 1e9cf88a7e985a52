#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "vid/decay.hpp"

using namespace vid;

TEST_CASE("closed-form envelope values") {
  const PolyBoundParams p{1.0, 1.0, 1.0, 3.0};
  // head = (1 + 2)^(-1/3), so bound(0) = 27 * 3 = 81.
  CHECK(poly_bound(p, 0.0) == doctest::Approx(81.0).epsilon(1e-13));

  // Large-t asymptote: bound * t^q -> q^q (2 M2)^q M3.
  const PolyBoundParams p2{2.0, 1.5, 0.7, 3.0};
  const double t = 1e8;
  const double expected = std::pow(3.0, 3) * std::pow(2.0 * 1.5, 3) * 0.7;
  CHECK(poly_bound(p2, t) * std::pow(t, 3.0) ==
        doctest::Approx(expected).epsilon(1e-4));

  // y0 = 0 head.
  const PolyBoundParams p3{0.0, 1.3, 0.4, 3.0};
  CHECK(poly_bound(p3, 0.0) ==
        doctest::Approx(std::pow(3.0, 3) * 2.0 * std::pow(1.3, 3) * 0.4)
            .epsilon(1e-13));
}

TEST_CASE("envelope decreases in t") {
  const PolyBoundParams p{4.0, 0.8, 2.0, 2.5};
  double prev = poly_bound(p, 0.0);
  for (double t : {0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) {
    const double b = poly_bound(p, t);
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("rk4 oracle against closed forms") {
  // Forcing-free: y = (y0^(-1/q) + M2 t / q)^(-q).
  const PolyBoundParams p{2.0, 1.5, 0.0, 3.0};
  const OdeTrace trace = ode_oracle(p, 5.0, 1e-3);
  for (size_t i = 0; i < trace.t.size(); i += 500) {
    const double t = trace.t[i];
    const double exact =
        std::pow(std::pow(2.0, -1.0 / 3.0) + 1.5 * t / 3.0, -3.0);
    CHECK(trace.y[i] == doctest::Approx(exact).epsilon(1e-8));
  }

  // Pure integration: y0 = 0, M2 = 0 gives y = M3 (1 - (1+t)^-q) / q.
  const PolyBoundParams pi{0.0, 0.0, 2.0, 3.0};
  const OdeTrace ti = ode_oracle(pi, 5.0, 1e-3);
  for (size_t i = 0; i < ti.t.size(); i += 500) {
    const double t = ti.t[i];
    const double exact = 2.0 * (1.0 - std::pow(1.0 + t, -3.0)) / 3.0;
    CHECK(ti.y[i] == doctest::Approx(exact).epsilon(1e-8));
  }

  CHECK_THROWS_AS(ode_oracle(p, 1.0, 0.5), DomainError);
}

TEST_CASE("comparison bound on the tabulated cases") {
  // Mid-range parameters: the envelope dominates the equality solution.
  const LemmaReport mid = verify_lemma_bound({1.0, 1.0, 1.0, 3.0}, 50.0, 1e-3);
  CHECK(mid.pass);
  CHECK(mid.worst_margin > 0);

  // y0 = 0 start.
  const LemmaReport zero = verify_lemma_bound({0.0, 1.0, 1.0, 3.0}, 50.0, 1e-3);
  CHECK(zero.pass);

  // Degenerate forcing with a huge initial value: the head absorbs y0.
  const LemmaReport adv = verify_lemma_bound({1e6, 1.0, 0.0, 3.0}, 50.0, 1e-3);
  CHECK(adv.pass);
  CHECK(adv.degenerate_forcing);
}

TEST_CASE("comparison bound fails for weakly damped, weakly forced draws") {
  // The envelope's slope constant grows like 1/M2 while the equality solution
  // decays like (M2 t / q)^{-q}; for small M2 and M3 the stated bound is
  // crossed early. Kept as a regression anchor for the documented defect.
  const LemmaReport weak = verify_lemma_bound({1.0, 0.1, 0.1, 3.0}, 50.0, 1e-2);
  CHECK_FALSE(weak.pass);
  CHECK(weak.worst_margin < 0);
}

TEST_CASE("exponent arithmetic") {
  CHECK(pm_for(3.0).m == 1);
  CHECK(pm_for(3.0).p_m == doctest::Approx(1.0));
  CHECK(pm_for(10.0).m == 3);
  CHECK(pm_for(10.0).p_m == doctest::Approx(7.0));
  CHECK(pm_for(2.5).m == 1);
  CHECK(pm_for(2.5).p_m == doctest::Approx(1.0));
  CHECK_THROWS_AS(pm_for(2.0), DomainError);

  std::mt19937 rng(303);
  std::uniform_real_distribution<double> dist(2.0 + 1e-9, 40.0);
  PmResult prev = pm_for(2.0 + 1e-9);
  double prev_p = 2.0 + 1e-9;
  for (int i = 0; i < 500; ++i) {
    const double p = dist(rng);
    const PmResult r = pm_for(p);
    CHECK(r.p_m < p - 1.0);
    const double log2pm1 = std::log2(r.p_m + 1.0);
    CHECK(log2pm1 == doctest::Approx(std::round(log2pm1)).epsilon(1e-12));
    if (p >= prev_p) CHECK(r.p_m >= prev.p_m);
    prev = r;
    prev_p = p;
  }
}

TEST_CASE("decay fitting recovers synthetic models") {
  std::vector<double> t, y_pow, y_exp;
  for (int i = 0; i <= 400; ++i) {
    const double ti = 0.05 * i;
    t.push_back(ti);
    y_pow.push_back(std::pow(1.0 + ti, -2.0));
    y_exp.push_back(5.0 * std::exp(-0.7 * ti));
  }
  const DecayFit fp = fit_decay(t, y_pow, DecayModel::power);
  CHECK(fp.exponent == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(fp.r_squared >= 1.0 - 1e-9);
  CHECK(fp.t_lo == doctest::Approx(10.0));

  const DecayFit fe = fit_decay(t, y_exp, DecayModel::exponential);
  CHECK(fe.rate == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(fe.r_squared >= 1.0 - 1e-9);

  // Non-positive samples are trimmed, not fatal.
  std::vector<double> dirty = y_exp;
  dirty[350] = 0.0;
  dirty[360] = -1.0;
  const DecayFit fd = fit_decay(t, dirty, DecayModel::exponential);
  CHECK(fd.n_trimmed == 2);
  CHECK(fd.rate == doctest::Approx(0.7).epsilon(1e-5));

  // Explicit window.
  const DecayFit fw = fit_decay(t, y_exp, DecayModel::exponential, 2.0, 6.0);
  CHECK(fw.t_lo == doctest::Approx(2.0));
  CHECK(fw.t_hi == doctest::Approx(6.0));
  CHECK(fw.rate == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("linear comparison solution") {
  // Resonant case.
  CHECK(linear_comparison_ode(2.0, 0.5, 0.5, 3.0) ==
        doctest::Approx((2.0 + 3.0) * std::exp(-1.5)).epsilon(1e-13));
  // Generic case checked against a fine forward-Euler integration.
  const double z0 = 1.3, kappa = 2.0, b = 0.6;
  double z = z0;
  const double h = 1e-6;
  for (long i = 0; i < 2000000; ++i) {
    const double t = i * h;
    z += h * (std::exp(-kappa * t) - b * z);
  }
  CHECK(linear_comparison_ode(z0, kappa, b, 2.0) ==
        doctest::Approx(z).epsilon(1e-5));
}

TEST_CASE("exponential-envelope verification") {
  std::vector<double> t, clean, zero;
  for (int i = 0; i <= 300; ++i) {
    const double ti = 0.05 * i;
    t.push_back(ti);
    clean.push_back(3.0 * std::exp(-0.8 * ti));
    zero.push_back(0.0);
  }
  const ExpVerifyReport ok = verify_exp(t, clean, 2.0);
  CHECK(ok.pass);
  CHECK(ok.b2 == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(ok.max_ratio <= 1.0 + 1e-9);

  const ExpVerifyReport trivial = verify_exp(t, zero, 2.0);
  CHECK(trivial.pass);

  // A growing trace has a negative fitted rate: failure report, no throw.
  std::vector<double> growing;
  for (double ti : t) growing.push_back(std::exp(0.3 * ti));
  const ExpVerifyReport bad = verify_exp(t, growing, 2.0);
  CHECK_FALSE(bad.pass);
  CHECK(bad.b2 < 0);

  CHECK(exp_bound(2.0, 1.5, 0.4, 1.0) ==
        doctest::Approx(3.0 * std::exp(-0.4)).epsilon(1e-14));
}
