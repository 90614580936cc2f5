#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "powmod/bounds.hpp"

using namespace powmod;
using Catch::Approx;

TEST_CASE("thresholds_Q: unit log log point and ordering") {
    // q = e^e makes log q = e and log log q = 1
    const double q = std::exp(std::exp(1.0));
    const auto th = thresholds_Q(q);
    CHECK(th.log_Q1 == Approx(std::pow(std::exp(1.0), 7.0 / 3.0)).epsilon(1e-12));
    CHECK(th.log_Q2 == Approx(std::pow(std::exp(1.0), 7.0)).epsilon(1e-12));

    for (int k = 0; k <= 200; ++k) {
        const double qq = 16.0 * std::pow(1e9 / 16.0, k / 200.0);
        const auto t = thresholds_Q(qq);
        CHECK(t.log_Q2 > t.log_Q1);
    }
    CHECK_THROWS_AS(thresholds_Q(2.9), std::domain_error);
}

TEST_CASE("envelope_E: branch structure") {
    const EnvelopeConfig cfg;
    const double q = 8.0;
    const auto th = thresholds_Q(q);

    // both branch formulas are evaluable on either side of Q1; the jump
    // ratio is reported, not asserted away
    const double xm = th.Q1 * (1.0 - 1e-9);
    const double xp = th.Q1 * (1.0 + 1e-9);
    CHECK(envelope_branch(xm, q) == 1);
    CHECK(envelope_branch(xp, q) == 2);
    CHECK(envelope_branch(th.Q1, q) == 1);  // boundaries inclusive-left
    const double b1 = log_envelope_E_branch(1, 1, th.Q1, q, cfg);
    const double b2 = log_envelope_E_branch(1, 2, th.Q1, q, cfg);
    CHECK(std::isfinite(b1));
    CHECK(std::isfinite(b2));
    INFO("log jump ratio at Q1: " << b1 - b2);

    // increasing c strictly decreases E_j in every branch
    EnvelopeConfig cfg2;
    cfg2.c = 2.0;
    for (int branch : {1, 2, 3}) {
        const double x = (branch == 1) ? 20.0 : (branch == 2 ? th.Q1 * 4 : th.Q2 * 4);
        for (int j : {1, 2})
            CHECK(log_envelope_E_branch(j, branch, x, q, cfg2) <
                  log_envelope_E_branch(j, branch, x, q, cfg));
    }

    // E2/E1 carries the extra log x factor only in branch 1
    for (double x : {10.0, 25.0}) {
        CHECK(envelope_E(2, x, q, cfg) / envelope_E(1, x, q, cfg) ==
              Approx(std::log(x)).epsilon(1e-12));
    }
    const double x23 = th.Q2 * 10;
    CHECK(envelope_E(2, x23, q, cfg) / envelope_E(1, x23, q, cfg) == Approx(1.0));

    // strictly decreasing in x inside each branch
    for (int branch : {1, 2, 3}) {
        double lo = (branch == 1) ? 3.0 : (branch == 2 ? th.Q1 * 1.01 : th.Q2 * 1.01);
        double prev = log_envelope_E_branch(1, branch, lo, q, cfg);
        for (int k = 1; k <= 50; ++k) {
            const double x = lo * std::pow(1.5, k);
            const double cur = log_envelope_E_branch(1, branch, x, q, cfg);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(envelope_E(3, 10.0, 8.0, cfg), std::domain_error);
    CHECK_THROWS_AS(envelope_E(1, 2.0, 8.0, cfg), std::domain_error);
}

TEST_CASE("beta: piecewise, closed form, rationals") {
    CHECK(beta_rational({1, 7}) == Rational(4, 7));
    CHECK(beta_rational({3, 7}) == Rational(5, 7));
    CHECK(beta_rational_closed({1, 7}) == Rational(4, 7));
    CHECK(beta_rational_closed({3, 7}) == Rational(5, 7));

    CHECK(beta(0.75) == Approx(0.5).margin(1e-15));
    CHECK(beta(9.0 / 14.0) == Approx(4.0 / 7.0).margin(1e-15));
    CHECK(beta(3.0 / 5.0) == Approx(3.0 / 5.0).margin(1e-15));

    double mx = 0.0, arg = 0.0;
    for (int k = 1; k <= 100'000; ++k) {
        const double alpha = 2.0 * k / 100'000.0;
        const double b = beta(alpha);
        CHECK(std::abs(b - beta_closed(alpha)) <= 1e-15);
        if (b > mx) {
            mx = b;
            arg = alpha;
        }
        CHECK(beta_rational({k, 100'000}) == beta_rational_closed({k, 100'000}));
    }
    CHECK(mx == Approx(5.0 / 7.0).margin(1e-15));
    CHECK(arg == Approx(3.0 / 7.0).margin(1e-4));

    CHECK_THROWS_AS(beta(0.0), std::domain_error);
    CHECK_THROWS_AS(beta(-1.0), std::domain_error);
}

TEST_CASE("dyadic_envelope_f: domain, monotonicity under the small-xi0 condition") {
    EnvelopeConfig cfg;  // C = 1001
    const auto m = factor(8);
    const double q = 8.0;
    // floor: core^gamma0 = 2^10
    CHECK_THROWS_AS(dyadic_envelope_f(1000.0, q, m, cfg), std::domain_error);
    CHECK(std::isfinite(dyadic_envelope_f(1025.0, q, m, cfg)));

    // increasing on a log grid when xi0 < (3 C^2)^{-1}
    EnvelopeConfig small;
    small.xi0 = 1e-7;  // < (3 * 1001^2)^{-1} ~ 3.3e-7
    small.c0 = EnvelopeConfig::derived_c0(small.C_dyadic, small.xi0);
    double prev = -1e300;
    for (int k = 0; k < 1000; ++k) {
        const double lu = 10.0 * std::log(2.0) +
                          k * (small.C_dyadic * std::log(q) - 10.0 * std::log(2.0)) / 999.0;
        const double v = log_dyadic_envelope_branch(1, std::exp(std::min(lu, 700.0)), q, small);
        if (std::isfinite(v)) {
            CHECK(v >= prev);
            prev = v;
        }
    }

    // branch 2 scaling: log f - log u = -c0 log q exactly
    EnvelopeConfig tiny;
    tiny.C_dyadic = 3.0;
    tiny.xi0 = 1e-3;
    tiny.c0 = EnvelopeConfig::derived_c0(3.0, 1e-3);
    for (double u : {1e3, 1e5, 1e7}) {
        const double lf = log_dyadic_envelope_branch(2, u, q, tiny);
        CHECK(lf - std::log(u) == Approx(-tiny.c0 * std::log(q)).epsilon(1e-12));
    }

    // both branch values at the boundary u = q^C are finite and reported
    const double ub = std::exp(tiny.C_dyadic * std::log(q));
    const double f1 = log_dyadic_envelope_branch(1, ub, q, tiny);
    const double f2 = log_dyadic_envelope_branch(2, ub, q, tiny);
    CHECK(std::isfinite(f1));
    CHECK(std::isfinite(f2));
    INFO("log jump at q^C: " << f1 - f2);
}

TEST_CASE("region_params: displayed formulas recomputed") {
    const EnvelopeConfig cfg;
    const auto m = factor(8);
    const double q = 8.0, t = 1'000.0;
    const auto r = region_params(q, t, m, cfg);

    const double lq = std::log(q), llq = std::log(lq);
    const double tau = std::abs(t) + 3.0;
    const double ell = std::log(q * tau);
    CHECK(r.tau == Approx(tau));
    CHECK(r.ell == Approx(ell));
    CHECK(r.log_Q0 ==
          Approx(std::max(cfg.gamma0 * std::log(2.0), 4.0 * ell * std::log(2.0) / lq)));
    CHECK(r.log_Y == Approx(60.0 * std::pow(ell * std::log(2.0 * ell), 0.75)));
    CHECK(r.eta1 == Approx(cfg.A / (std::pow(lq, 2.0 / 3.0) * std::pow(llq, 1.0 / 3.0))));
    CHECK(r.eta2 == Approx(cfg.A * lq / ell));
    CHECK(r.eta3 == Approx(cfg.A / (std::sqrt(ell) * std::pow(std::log(ell), 0.75))));
    CHECK(r.vartheta1 == Approx(0.5 * r.eta1));
    CHECK(r.vartheta2 == Approx(0.5 * r.eta2));
    CHECK(r.vartheta3 == Approx(0.5 * std::pow(ell, -0.25) * r.eta3));
    CHECK(r.vartheta3 / r.eta3 == Approx(0.5 * std::pow(ell, -0.25)));
    CHECK(r.log_T1 == Approx(cfg.B1 * std::pow(lq, 5.0 / 3.0) * std::pow(llq, 1.0 / 3.0)));
    CHECK(r.log_T2 == Approx(cfg.B2 * std::pow(lq, 4.0) * std::pow(llq, 3.0)));
    CHECK(r.log_T3 == Approx(cfg.B2 * std::pow(lq, 4.0) / llq));

    // vartheta <= eta/2 in every branch by construction
    for (double tt : {0.0, 50.0, 1e5, 1e12, 1e30}) {
        const auto rr = region_select(q, tt, cfg);
        CHECK(rr.vartheta <= 0.5 * rr.eta + 1e-18);
    }
    CHECK_THROWS_AS(region_params(2.0, 0.0, m, cfg), std::domain_error);
}

TEST_CASE("region_params: branch selection against T1/T2 and T1/T3") {
    const EnvelopeConfig cfg;
    // q = 16 keeps T1 < T3 < T2 all finite (log log q > 1)
    const double q = 16.0;
    const auto base = region_select(q, 0.0, cfg);
    REQUIRE(base.T1 < base.T3);
    REQUIRE(base.T3 < base.T2);
    REQUIRE(std::isfinite(base.T2));
    // at |t| = T1 exactly the <= branch applies
    const auto at_T1 = region_select(q, base.T1, cfg);
    CHECK(at_T1.eta_branch == 1);
    CHECK(at_T1.theta_branch == 1);
    const auto above_T1 = region_select(q, base.T1 * (1 + 1e-9), cfg);
    CHECK(above_T1.eta_branch == 2);
    CHECK(above_T1.theta_branch == 2);
    // Theta switches at T3, (eta, vartheta) at T2; the transition points
    // differ deliberately
    const auto mid = region_select(q, base.T3 * 2.0, cfg);
    CHECK(mid.eta_branch == 2);
    CHECK(mid.theta_branch == 3);
    const auto high = region_select(q, base.T2 * 2.0, cfg);
    CHECK(high.eta_branch == 3);
    CHECK(high.theta_branch == 3);

    // T3 < T2 needs log log q > 1, i.e. q above e^e; the admissible moduli
    // (gamma >= 10 forces q >= 2^10) sit far inside that range
    for (int k = 0; k < 60; ++k) {
        const double qq = 16.0 * std::pow(1e10 / 16.0, k / 59.0);
        const auto rr = region_select(qq, 0.0, cfg);
        CHECK(rr.log_T3 < rr.log_T2);
    }
    const auto small = region_select(8.0, 0.0, cfg);
    CHECK(small.log_T3 > small.log_T2);  // the ordering genuinely flips below e^e
}

TEST_CASE("region_params: Theta nondecreasing in |t| with default constants") {
    const EnvelopeConfig cfg;
    for (double q : {8.0, 64.0, 1048576.0}) {
        double prev = 0.0;
        for (int k = 0; k <= 600; ++k) {
            const double t = std::exp(-3.0 + k * 70.0 / 600.0);
            const double Theta = region_select(q, t, cfg).Theta;
            CHECK(Theta >= prev - 1e-12);
            prev = Theta;
        }
    }
}

TEST_CASE("iwaniec_admissible: vartheta formula and domain") {
    const auto c = iwaniec_admissible(0.1, std::exp(1.0), 10.0, 8.0);
    CHECK(c.vartheta == Approx(0.1 / 400.0).margin(1e-18));

    // exact reproduction on a dyadic rational
    const auto e = iwaniec_admissible(0.25, std::exp(1.0), 10.0, 8.0);
    CHECK(e.vartheta == 0.25 / (400.0 * std::log(std::exp(1.0))));

    CHECK_THROWS_AS(iwaniec_admissible(0.4, 10.0, 10.0, 8.0), std::domain_error);
    CHECK_THROWS_AS(iwaniec_admissible(0.0, 10.0, 10.0, 8.0), std::domain_error);
    CHECK_THROWS_AS(iwaniec_admissible(0.1, 1.0, 10.0, 8.0), std::domain_error);

    // numeric sweep at K = 10: reported, not asserted. Both sides scale
    // like 1/eta but the left carries an extra log(1/eta), so the
    // inequality never fires at small K.
    for (double eta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const auto r = iwaniec_admissible(eta, 10.0, 10.0, 8.0);
        INFO("eta=" << eta << " lhs=" << r.lhs << " rhs=" << r.rhs);
        CHECK(r.vartheta == Approx(eta / (400.0 * std::log(10.0))));
        CHECK(r.lhs > r.rhs);
    }
    // the regime the lemma is used in: K exponential in the region data
    const auto big = iwaniec_admissible(0.3, std::exp(400.0), 10.0, 8.0);
    CHECK(big.holds);
    const auto small = iwaniec_admissible(0.3, std::exp(40.0), 10.0, 8.0);
    CHECK_FALSE(small.holds);
}

TEST_CASE("mv_bound_b: value, homogeneity, pole") {
    CHECK(mv_bound_b(1.0, 0.25, 0.5) == Approx(16.0 + 4.0 / std::log(2.0)).epsilon(1e-14));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0.15, 0.85), us(0.5, 20.0), ul(0.05, 20.0);
    for (int k = 0; k < 1'000; ++k) {
        const double Delta = us(rng);
        const double R = Delta * ud(rng);
        const double r = R * ud(rng);
        const double lam = ul(rng);
        CHECK(mv_bound_b(lam * Delta, lam * r, lam * R) * lam ==
              Approx(mv_bound_b(Delta, r, R)).epsilon(1e-12));
    }
    // divergence as r -> R
    CHECK(mv_bound_b(1.0, 0.499999, 0.5) > 1e10);
    CHECK_THROWS_AS(mv_bound_b(1.0, 0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(mv_bound_b(1.0, 0.6, 0.5), std::domain_error);
    CHECK_THROWS_AS(mv_bound_b(0.4, 0.2, 0.5), std::domain_error);
}

TEST_CASE("perron_T_select: case boundaries and monotonicity") {
    const EnvelopeConfig cfg;
    const double q = 8.0;
    const auto th = thresholds_Q(q);

    CHECK(perron_T_select(th.Q1, q, cfg).case_index == 1);  // inclusive boundary
    CHECK(perron_T_select(th.Q1 * 1.001, q, cfg).case_index == 2);
    CHECK(perron_T_select(th.Q2, q, cfg).case_index == 2);
    CHECK(perron_T_select(th.Q2 * 1.001, q, cfg).case_index == 3);

    // case-2 T increases with x
    const auto a = perron_T_select(th.Q1 * 10.0, q, cfg);
    const auto b = perron_T_select(th.Q1 * 20.0, q, cfg);
    CHECK(b.log_T > a.log_T);

    // monotone case index over a log grid in x
    int prev = 1;
    for (int k = 0; k <= 300; ++k) {
        const double x = std::exp(3.0 + k * (th.log_Q2 * 1.5 - 3.0) / 300.0);
        const int c = perron_T_select(x, q, cfg).case_index;
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS(perron_T_select(10.0, q, cfg), std::domain_error);  // x <= e^e
}

TEST_CASE("perron_wired_check: limit behavior and grid refinement") {
    EnvelopeConfig cfg;
    const auto w = perron_wired_check(8.0, 1'000.0, cfg);
    CHECK(w.holds);  // regression pin from the first run

    // c_perron -> 0 passes whenever vartheta > 0 on the grid
    EnvelopeConfig tiny;
    tiny.c_perron = 1e-12;
    CHECK(perron_wired_check(8.0, 1'000.0, tiny).holds);

    // refinement audit: 1e3 -> 1e4 grid does not flip the verdict
    const auto coarse = perron_wired_check(8.0, 1'000.0, cfg, 1'000);
    const auto fine = perron_wired_check(8.0, 1'000.0, cfg, 10'000);
    CHECK(coarse.holds == fine.holds);
    CHECK(std::isfinite(fine.worst_t));
}

TEST_CASE("vartheta3_remark: both sides evaluated, reduction in A attainable") {
    const auto m = factor(1 << 20);
    const double q = double(1 << 20);
    EnvelopeConfig cfg;
    for (double t : {0.0, 1e3, 1e9}) {
        const auto v = vartheta3_remark(q, t, m, cfg);
        const auto r = region_select(q, t, cfg);
        CHECK(v.vartheta3 ==
              Approx(cfg.A / std::pow(r.ell * std::log(r.ell), 0.75)));
        CHECK(v.bound ==
              Approx(1.0 / (40000.0 * (std::log(2.0) +
                                       std::pow(r.ell * std::log(2.0 * r.ell), 0.75)))));
        CHECK(v.combined == Approx(std::max(std::min(r.vartheta1, r.vartheta2), v.vartheta3)));
        // A = 1 never satisfies the reduction at desk-scale ell
        CHECK_FALSE(v.holds);
    }
    EnvelopeConfig tiny;
    tiny.A = 1e-7;
    CHECK(vartheta3_remark(q, 1e3, m, tiny).holds);
}

TEST_CASE("EnvelopeConfig: validation") {
    EnvelopeConfig c;
    CHECK_NOTHROW(c.validate());
    c.c_perron = 0.6;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
    c = EnvelopeConfig{};
    c.B1 = 2.0;
    c.B2 = 1.0;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
    c = EnvelopeConfig{};
    c.xi0 = -1.0;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
}

TEST_CASE("RegionPoint: derived quantities") {
    const RegionPoint p(8.0, 0.7, -4.0);
    CHECK(p.tau == Approx(7.0));
    CHECK(p.ell == Approx(std::log(56.0)));
}
