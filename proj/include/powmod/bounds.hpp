#pragma once

// Pure-formula layer. Everything here is an exact transcription of a
// displayed formula: the thresholds Q1, Q2 and envelopes E1, E2, the
// exponent function beta(alpha), the dyadic envelope f(u), the region
// parameters tau, ell, Q0, Y, eta_i, vartheta_i, T1, T2, T3, K, Theta,
// the admissibility inequality with vartheta = eta/(400 log K), the
// zero-to-log-derivative constant b(Delta,r,R), and the optimal-T selector
// for the truncated Perron integral. Exponents like (log q)^7 overflow
// doubles quickly, so every function works in log space and exponentiates
// last; the log_* fields stay finite when the plain value does not.
//
// None of the constants below are specified numerically by the theory;
// the defaults exist so every formula is evaluable, and outputs label
// them as non-paper defaults.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "powmod/arith.hpp"
#include "powmod/common.hpp"

namespace powmod {

struct EnvelopeConfig {
    double c = 1.0;        // envelope constant (depends only on the core)
    double c1 = 1.0;       // range constants of the three crossover corollaries
    double c2 = 1.0;
    double A = 1.0;        // zero-free-region strength
    double B = 1.0;
    double B1 = 1.0;       // transition heights, B1 <= B2
    double B2 = 1.0;
    unsigned gamma0 = 10;  // admissibility floor; "sufficiently large" in the theory
    double xi0 = 1e-4;     // Dirichlet-polynomial saving
    double C_dyadic = 1001.0;
    double c0 = derived_c0(1001.0, 1e-4);  // C(C-1)^2 * xi0
    double c_perron = 0.25;                // in (0, 1/2)

    static double derived_c0(double C, double xi0) { return C * (C - 1.0) * (C - 1.0) * xi0; }

    void validate() const {
        if (!(c > 0 && c1 > 0 && c2 > 0 && A > 0 && B > 0 && B1 > 0 && B2 > 0 && xi0 > 0 &&
              c0 > 0 && C_dyadic > 1))
            throw std::domain_error("EnvelopeConfig: constants must be positive (C > 1)");
        if (!(c_perron > 0 && c_perron < 0.5))
            throw std::domain_error("EnvelopeConfig: c_perron must lie in (0, 1/2)");
        if (!(B1 <= B2)) throw std::domain_error("EnvelopeConfig: need B1 <= B2");
        if (gamma0 < 1) throw std::domain_error("EnvelopeConfig: gamma0 must be >= 1");
    }
};

// sigma + it with tau = |t| + 3 and ell = log(q tau) attached.
struct RegionPoint {
    double sigma = 0.0;
    double t = 0.0;
    double tau = 3.0;
    double ell = 0.0;

    RegionPoint() = default;
    RegionPoint(double q, double sigma_, double t_) : sigma(sigma_), t(t_) {
        tau = std::abs(t_) + 3.0;
        ell = std::log(q * tau);
    }
};

namespace detail {

inline void require_q3(double q, const char* who) {
    if (!(q >= 3.0)) throw std::domain_error(std::string(who) + ": need q >= 3");
}

}  // namespace detail

struct Thresholds {
    double Q1 = 0.0;
    double Q2 = 0.0;
    double log_Q1 = 0.0;
    double log_Q2 = 0.0;
};

// Q1 = exp((log q)^{7/3} (log log q)^{5/3}), Q2 = exp((log q)^7 (log log q)^{-1}).
inline Thresholds thresholds_Q(double q) {
    detail::require_q3(q, "thresholds_Q");
    const double lq = std::log(q);
    const double llq = std::log(lq);
    Thresholds th;
    th.log_Q1 = std::pow(lq, 7.0 / 3.0) * std::pow(llq, 5.0 / 3.0);
    th.log_Q2 = std::pow(lq, 7.0) / llq;
    th.Q1 = std::exp(th.log_Q1);
    th.Q2 = std::exp(th.log_Q2);
    return th;
}

// The branch formulas of E_j; branch 1 carries the extra (log x)^j factor.
inline double log_envelope_E_branch(int j, int branch, double x, double q,
                                    const EnvelopeConfig& cfg) {
    if (j != 1 && j != 2) throw std::domain_error("envelope_E: j must be 1 or 2");
    detail::require_q3(q, "envelope_E");
    if (!(x >= 3.0)) throw std::domain_error("envelope_E: need x >= 3");
    const double lx = std::log(x);
    const double lq = std::log(q);
    const double llq = std::log(lq);
    const double llx = std::log(lx);
    switch (branch) {
        case 1:
            return -cfg.c * lx / (std::pow(lq, 2.0 / 3.0) * std::pow(llq, 4.0 / 3.0)) + j * llx;
        case 2:
            return -cfg.c * std::sqrt(lx * lq) / std::sqrt(llq);
        case 3:
            return -cfg.c * std::pow(lx, 4.0 / 7.0) / std::pow(llx, 3.0 / 7.0);
        default:
            throw std::domain_error("envelope_E: branch must be 1, 2 or 3");
    }
}

// Branch conditions compare the plain values: an overflowed threshold is
// +inf, which still orders correctly against any representable x.
inline int envelope_branch(double x, double q) {
    const Thresholds th = thresholds_Q(q);
    if (x <= th.Q1) return 1;
    if (x <= th.Q2) return 2;
    return 3;
}

inline double envelope_E(int j, double x, double q, const EnvelopeConfig& cfg) {
    return std::exp(log_envelope_E_branch(j, envelope_branch(x, q), x, q, cfg));
}

// beta(alpha) = 4/7 for alpha <= 1/7, (1+alpha)/2 for 1/7 <= alpha <= 3/7,
// 1 - 2 alpha/3 for alpha >= 3/7.
inline double beta(double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("beta: need alpha > 0");
    if (alpha <= 1.0 / 7.0) return 4.0 / 7.0;
    if (alpha <= 3.0 / 7.0) return (1.0 + alpha) / 2.0;
    return 1.0 - 2.0 * alpha / 3.0;
}

// Closed form: min{max{4/7, (1+alpha)/2}, 1 - 2 alpha/3}.
inline double beta_closed(double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("beta: need alpha > 0");
    return std::min(std::max(4.0 / 7.0, (1.0 + alpha) / 2.0), 1.0 - 2.0 * alpha / 3.0);
}

inline Rational beta_rational(Rational alpha) {
    if (alpha.num <= 0) throw std::domain_error("beta: need alpha > 0");
    const Rational k17{1, 7}, k37{3, 7};
    if (alpha <= k17) return {4, 7};
    if (alpha <= k37) return (Rational{1, 1} + alpha) / Rational{2, 1};
    return Rational{1, 1} - Rational{2, 3} * alpha;
}

inline Rational beta_rational_closed(Rational alpha) {
    if (alpha.num <= 0) throw std::domain_error("beta: need alpha > 0");
    const Rational mid = (Rational{1, 1} + alpha) / Rational{2, 1};
    const Rational hi = Rational{1, 1} - Rational{2, 3} * alpha;
    Rational m = std::max(Rational{4, 7}, mid, [](Rational a, Rational b) { return a < b; });
    return std::min(m, hi, [](Rational a, Rational b) { return a < b; });
}

// f(u) = u^{1 - xi0 (log u)^2 / (log q)^2} for core^{gamma0} <= u <= q^C,
// and u q^{-c0} beyond q^C. Increasing in u exactly when xi0 < (3 C^2)^{-1}.
inline double log_dyadic_envelope_branch(int branch, double u, double q,
                                         const EnvelopeConfig& cfg) {
    detail::require_q3(q, "dyadic_envelope_f");
    const double lu = std::log(u);
    const double lq = std::log(q);
    switch (branch) {
        case 1:
            return lu * (1.0 - cfg.xi0 * lu * lu / (lq * lq));
        case 2:
            return lu - cfg.c0 * lq;
        default:
            throw std::domain_error("dyadic_envelope_f: branch must be 1 or 2");
    }
}

inline double dyadic_envelope_f(double u, double q, const FactoredModulus& m,
                                const EnvelopeConfig& cfg) {
    detail::require_q3(q, "dyadic_envelope_f");
    if (!(u > 0.0)) throw std::domain_error("dyadic_envelope_f: need u > 0");
    const double lu = std::log(u);
    const double floor_log = cfg.gamma0 * std::log(static_cast<double>(m.core));
    if (lu < floor_log)
        throw std::domain_error("dyadic_envelope_f: u below the domain floor core^gamma0");
    const int branch = (lu <= cfg.C_dyadic * std::log(q)) ? 1 : 2;
    return std::exp(log_dyadic_envelope_branch(branch, u, q, cfg));
}

// (eta, vartheta) selected by |t| against T1, T2; Theta by |t| against T1, T3.
// The two transition points differ deliberately: Theta changes order of
// magnitude at T3, not at T2.
struct RegionParams {
    double tau = 0.0;
    double ell = 0.0;
    double Q0 = 0.0, log_Q0 = 0.0;
    double Y = 0.0, log_Y = 0.0;
    double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0;
    double vartheta1 = 0.0, vartheta2 = 0.0, vartheta3 = 0.0;
    double T1 = 0.0, T2 = 0.0, T3 = 0.0;
    double log_T1 = 0.0, log_T2 = 0.0, log_T3 = 0.0;
    double K = 0.0, log_K = 0.0;
    double eta = 0.0, vartheta = 0.0, Theta = 0.0;
    int eta_branch = 1;
    int theta_branch = 1;
};

// The m-independent part: everything except Q0 (which needs the core).
inline RegionParams region_select(double q, double t, const EnvelopeConfig& cfg) {
    detail::require_q3(q, "region_params");
    RegionParams r;
    r.tau = std::abs(t) + 3.0;
    r.ell = std::log(q * r.tau);
    const double lq = std::log(q);
    const double llq = std::log(lq);
    const double ell = r.ell;

    r.log_Y = 60.0 * std::pow(ell * std::log(2.0 * ell), 0.75);
    r.Y = std::exp(r.log_Y);

    r.eta1 = cfg.A / (std::pow(lq, 2.0 / 3.0) * std::pow(llq, 1.0 / 3.0));
    r.eta2 = cfg.A * lq / ell;
    r.eta3 = cfg.A / (std::sqrt(ell) * std::pow(std::log(ell), 0.75));
    r.vartheta1 = 0.5 * r.eta1;
    r.vartheta2 = 0.5 * r.eta2;
    r.vartheta3 = 0.5 * std::pow(ell, -0.25) * r.eta3;

    r.log_T1 = cfg.B1 * std::pow(lq, 5.0 / 3.0) * std::pow(llq, 1.0 / 3.0);
    r.log_T2 = cfg.B2 * std::pow(lq, 4.0) * std::pow(llq, 3.0);
    r.log_T3 = cfg.B2 * std::pow(lq, 4.0) / llq;
    r.T1 = std::exp(r.log_T1);
    r.T2 = std::exp(r.log_T2);
    r.T3 = std::exp(r.log_T3);

    const double at = std::abs(t);
    if (at <= r.T1) {
        r.eta = r.eta1;
        r.vartheta = r.vartheta1;
        r.eta_branch = 1;
        r.log_K = std::log(std::pow(lq, 2.0 / 3.0) * std::pow(llq, 1.0 / 3.0));
    } else if (at <= r.T2) {
        r.eta = r.eta2;
        r.vartheta = r.vartheta2;
        r.eta_branch = 2;
        r.log_K = std::log(ell / lq);
    } else {
        r.eta = r.eta3;
        r.vartheta = r.vartheta3;
        r.eta_branch = 3;
        r.log_K = 100.0 * std::pow(ell, 0.25);
    }
    r.K = std::exp(r.log_K);

    if (at <= r.T1) {
        r.Theta = std::pow(lq, 2.0 / 3.0) * std::pow(llq, 4.0 / 3.0);
        r.theta_branch = 1;
    } else if (at <= r.T3) {
        r.Theta = ell * llq / lq;
        r.theta_branch = 2;
    } else {
        r.Theta = std::pow(ell * std::log(ell), 0.75);
        r.theta_branch = 3;
    }
    return r;
}

inline RegionParams region_params(double q, double t, const FactoredModulus& m,
                                  const EnvelopeConfig& cfg) {
    RegionParams r = region_select(q, t, cfg);
    const double lq = std::log(q);
    const double lcore = std::log(static_cast<double>(m.core));
    r.log_Q0 = std::max(cfg.gamma0 * lcore, 4.0 * r.ell * lcore / lq);
    r.Q0 = std::exp(r.log_Q0);
    return r;
}

// Closing-remark combination of the zero-free regions: with
// vartheta3 = A (ell log ell)^{-3/4}, the region exponent becomes
// max{min{vartheta1, vartheta2}, vartheta3} once A is reduced so that
// vartheta3 <= 1/(40000 (log core + (ell log 2 ell)^{3/4})). Both sides
// are evaluated and reported; no universal A is chosen.
struct Vartheta3Remark {
    double vartheta3 = 0.0;
    double bound = 0.0;
    bool holds = false;
    double combined = 0.0;  // max(min(vartheta1, vartheta2), vartheta3)
};

inline Vartheta3Remark vartheta3_remark(double q, double t, const FactoredModulus& m,
                                        const EnvelopeConfig& cfg) {
    const RegionParams r = region_select(q, t, cfg);
    Vartheta3Remark v;
    v.vartheta3 = cfg.A / std::pow(r.ell * std::log(r.ell), 0.75);
    const double lcore = std::log(static_cast<double>(m.core));
    v.bound = 1.0 / (40000.0 * (lcore + std::pow(r.ell * std::log(2.0 * r.ell), 0.75)));
    v.holds = v.vartheta3 <= v.bound;
    v.combined = std::max(std::min(r.vartheta1, r.vartheta2), v.vartheta3);
    return v;
}

// The one-exceptional-character admissibility test:
// vartheta = eta / (400 log K), and the inequality
// 8 log(5 log 3q) + (24/eta) log(2K / (5 vartheta)) <= 1 / (15 vartheta).
struct IwaniecCheck {
    bool holds = false;
    double vartheta = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

inline IwaniecCheck iwaniec_admissible(double eta, double K, double T, double q) {
    if (!(eta > 0.0 && eta < 1.0 / 3.0))
        throw std::domain_error("iwaniec_admissible: need eta in (0, 1/3)");
    if (!(K >= std::exp(1.0))) throw std::domain_error("iwaniec_admissible: need K >= e");
    if (!(T >= 1.0)) throw std::domain_error("iwaniec_admissible: need T >= 1");
    if (!(q >= 1.0)) throw std::domain_error("iwaniec_admissible: need q >= 1");
    IwaniecCheck c;
    c.vartheta = eta / (400.0 * std::log(K));
    c.lhs = 8.0 * std::log(5.0 * std::log(3.0 * q)) +
            (24.0 / eta) * std::log(2.0 * K / (5.0 * c.vartheta));
    c.rhs = 1.0 / (15.0 * c.vartheta);
    c.holds = c.lhs <= c.rhs;
    return c;
}

// b(Delta, r, R) = 2R/(R-r)^2 + 1/((R-r) log(Delta/R)), 0 < r < R < Delta.
inline double mv_bound_b(double Delta, double r, double R) {
    if (!(0.0 < r && r < R && R < Delta))
        throw std::domain_error("mv_bound_b: need 0 < r < R < Delta");
    return 2.0 * R / ((R - r) * (R - r)) + 1.0 / ((R - r) * std::log(Delta / R));
}

// Optimal truncation height for the Perron integral, by the range of x
// against the thresholds: case 1 for x <= Q1, case 2 for Q1 < x <= Q2,
// case 3 beyond.
struct PerronChoice {
    int case_index = 0;
    double T = 0.0;
    double log_T = 0.0;
};

inline PerronChoice perron_T_select(double x, double q, const EnvelopeConfig& cfg) {
    detail::require_q3(q, "perron_T_select");
    if (!(x > std::exp(std::exp(1.0))))
        throw std::domain_error("perron_T_select: need x > e^e");
    const Thresholds th = thresholds_Q(q);
    const double lx = std::log(x);
    const double lq = std::log(q);
    const double llq = std::log(lq);
    const double llx = std::log(lx);
    PerronChoice pc;
    if (x <= th.Q1) {
        pc.case_index = 1;
        pc.log_T = cfg.B1 * lx / (std::pow(lq, 2.0 / 3.0) * std::pow(llq, 4.0 / 3.0));
    } else if (x <= th.Q2) {
        pc.case_index = 2;
        pc.log_T = cfg.B1 * std::sqrt(lx * lq) / std::sqrt(llq);
    } else {
        pc.case_index = 3;
        pc.log_T = 16.0 * cfg.B2 * std::pow(lx, 4.0 / 7.0) / std::pow(llx, 3.0 / 7.0);
    }
    pc.T = std::exp(pc.log_T);
    return pc;
}

// Verifies c_perron * Theta(T)^{-1} < vartheta(t) on a grid of t in [0, T].
struct WiredCheck {
    bool holds = true;
    double worst_t = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min vartheta(t) - c/Theta(T)
    double theta_at_T = 0.0;
};

inline WiredCheck perron_wired_check(double q, double T, const EnvelopeConfig& cfg,
                                     std::size_t grid_size = 1000) {
    detail::require_q3(q, "perron_wired_check");
    if (!(T >= 1.0)) throw std::domain_error("perron_wired_check: need T >= 1");
    if (grid_size < 2) throw std::domain_error("perron_wired_check: need grid_size >= 2");
    WiredCheck w;
    w.theta_at_T = region_select(q, T, cfg).Theta;
    const double bar = cfg.c_perron / w.theta_at_T;
    for (std::size_t k = 0; k < grid_size; ++k) {
        double t;
        if (k == 0) {
            t = 0.0;
        } else {
            const double s = static_cast<double>(k - 1) / static_cast<double>(grid_size - 2);
            t = std::exp(s * std::log(T));  // log grid from 1 to T
        }
        const double vt = region_select(q, t, cfg).vartheta;
        const double margin = vt - bar;
        if (margin < w.worst_margin) {
            w.worst_margin = margin;
            w.worst_t = t;
        }
        if (!(bar < vt)) w.holds = false;
    }
    return w;
}

}  // namespace powmod
