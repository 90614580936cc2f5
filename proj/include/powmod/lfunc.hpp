#pragma once

// Numerical Dirichlet L-functions. Two independent evaluation routes:
//
//  * truncated_abel: sum_{n<=N} chi(n) n^{-s} with the Abel-summation tail
//    bound |tail| <= (1 + |s|/sigma) B_chi N^{-sigma}, B_chi the max
//    partial character sum over one period. Valid for non-principal chi
//    and sigma > 0. Simple and rigorous, but N grows like
//    target^{-1/sigma}, so it is the cross-check workhorse near sigma = 1+
//    and hopeless deep in the strip.
//
//  * hurwitz_em: L(s,chi) = q^{-s} sum_a chi(a) zeta(s, a/q) with each
//    Hurwitz zeta evaluated by Euler-Maclaurin. The remainder after the
//    B_{2J} term is bounded through the periodic-Bernoulli sup
//    |~B_{2J+1}| <= 2.5 (2J+1)!/(2pi)^{2J+1}, giving
//      |R| <= 2.5 |(s)_{2J+1}| (w+M)^{-sigma-2J} / ((2pi)^{2J+1}(sigma+2J)).
//    The per-a pole terms (w+M)^{1-s}/(s-1) are assembled as
//    [(w+M)^{1-s}-1]/(s-1) so the 1/(s-1) pieces cancel exactly against
//    sum_a chi(a) = 0; L(1,chi) needs no special casing. The s-derivative
//    uses the differentiated formula with the matching remainder bound.
//
// Principal characters are handled only through zeta(s) times the Euler
// factors prod_{p|q}(1 - p^{-s}), restricted to sigma > 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "powmod/arith.hpp"
#include "powmod/bounds.hpp"
#include "powmod/characters.hpp"
#include "powmod/common.hpp"
#include "powmod/sums.hpp"

namespace powmod {

namespace detail {

using cplx = std::complex<double>;

// b^z for real b > 0.
inline cplx rpow(double b, cplx z) {
    const double lb = std::log(b);
    const double mag = std::exp(z.real() * lb);
    const double ph = z.imag() * lb;
    return {mag * std::cos(ph), mag * std::sin(ph)};
}

// (e^z - 1)/z, series near 0.
inline cplx phi1(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx term{1.0, 0.0}, sum{1.0, 0.0};
        for (int k = 2; k <= 26; ++k) {
            term *= z / static_cast<double>(k);
            sum += term;
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

// d/du [(e^{-Lu}-1)/u] as a function of u, stable near u = 0:
// series sum_{k>=2} (-L)^k (k-1) u^{k-2} / k!.
inline cplx gderiv(cplx u, double L) {
    if (std::abs(u) * L < 0.5) {
        cplx sum{0.0, 0.0};
        double fact = 1.0;  // k!
        cplx upow{1.0, 0.0};
        double Lk = 1.0;
        for (int k = 2; k <= 28; ++k) {
            fact *= k;
            Lk *= -L;
            if (k == 2) {
                Lk *= -L;  // bring L^k up to k = 2 on first pass
                sum += Lk * (k - 1) / fact;
                continue;
            }
            upow *= u;
            sum += Lk * static_cast<double>(k - 1) * upow / fact;
        }
        return sum;
    }
    const cplx e = std::exp(-L * u);
    const cplx g = (e - 1.0) / u;
    return -L * e / u - g / u;
}

struct Bernoulli {
    // B_{2j} / (2j)! for j = 1..12.
    static const std::array<double, 12>& coeffs() {
        static const std::array<double, 12> c = [] {
            const double b[12] = {1.0 / 6,           -1.0 / 30,          1.0 / 42,
                                  -1.0 / 30,         5.0 / 66,           -691.0 / 2730,
                                  7.0 / 6,           -3617.0 / 510,      43867.0 / 798,
                                  -174611.0 / 330,   854513.0 / 138,     -236364091.0 / 2730};
            std::array<double, 12> out{};
            long double fact = 1.0L;
            int n = 0;
            for (int j = 1; j <= 12; ++j) {
                while (n < 2 * j) fact *= ++n;
                out[j - 1] = static_cast<double>(static_cast<long double>(b[j - 1]) / fact);
            }
            return out;
        }();
        return c;
    }
};

inline constexpr int kEmJ = 12;

// Upper bound on |(s)(s+1)...(s+m)| and on sum 1/|s+i|, via |s+i| >= sigma+i.
inline double poch_abs_upper(cplx s, int m) {
    double p = 1.0;
    const double as = std::abs(s);
    for (int i = 0; i <= m; ++i) p *= as + i;
    return p;
}

inline double poch_recip_sum_upper(double sigma, int m) {
    double r = 0.0;
    for (int i = 0; i <= m; ++i) r += 1.0 / (sigma + i);
    return r;
}

struct EmBounds {
    double err = 0.0;
    double err_deriv = 0.0;
};

inline EmBounds em_remainder_bounds(cplx s, double wmin, std::uint64_t M) {
    const double sigma = s.real();
    const double e2J = sigma + 2.0 * kEmJ;
    const double base = wmin + static_cast<double>(M);
    const double c = 2.5 / std::pow(kTwoPi, 2 * kEmJ + 1);
    const double P = poch_abs_upper(s, 2 * kEmJ);
    const double decay = std::pow(base, -e2J);
    EmBounds b;
    b.err = c * P * decay / e2J;
    const double S = poch_recip_sum_upper(std::max(sigma, 0.05), 2 * kEmJ);
    const double lb = std::log(base);
    b.err_deriv = c * P * decay * (S / e2J + lb / e2J + 1.0 / (e2J * e2J));
    return b;
}

// Smallest M (power-of-two-ish) meeting the target for both bounds.
inline std::uint64_t choose_em_M(cplx s, double wmin, double target, std::uint64_t m_cap) {
    std::uint64_t M = 16;
    const double t_abs = std::abs(s.imag());
    if (t_abs > 16.0) M = static_cast<std::uint64_t>(t_abs / 4.0) + 16;
    while (true) {
        const EmBounds b = em_remainder_bounds(s, wmin, M);
        if (std::max(b.err, b.err_deriv) <= target) return M;
        if (M >= m_cap)
            throw precision_error("hurwitz_em: cannot reach target " + std::to_string(target) +
                                  " within term cap");
        M *= 2;
    }
}

// One Hurwitz zeta(s, w) with the 1/(s-1) piece kept separate:
//   zeta(s,w) = main + G + 1/(s-1),      G = [(w+M)^{1-s} - 1]/(s-1)
//   zeta'(s,w) = main_d + G_d - 1/(s-1)^2.
struct HurwitzParts {
    cplx main{0.0, 0.0};
    cplx main_d{0.0, 0.0};
    cplx G{0.0, 0.0};
    cplx G_d{0.0, 0.0};
};

inline HurwitzParts hurwitz_parts(cplx s, double w, std::uint64_t M, bool want_deriv) {
    HurwitzParts h;
    KahanComplex main, main_d;
    for (std::uint64_t k = 0; k < M; ++k) {
        const double b = w + static_cast<double>(k);
        const double lb = std::log(b);
        const double mag = std::exp(-s.real() * lb);
        const double ph = -s.imag() * lb;
        const cplx term{mag * std::cos(ph), mag * std::sin(ph)};
        main.add(term);
        if (want_deriv) main_d.add(-lb * term);
    }
    const double bM = w + static_cast<double>(M);
    const double LM = std::log(bM);
    const cplx pM = rpow(bM, -s);  // (w+M)^{-s}
    main.add(0.5 * pM);
    if (want_deriv) main_d.add(-0.5 * LM * pM);

    // Bernoulli tail: sum_j c_j (s)_{2j-1} (w+M)^{-s-2j+1}
    const auto& cj = Bernoulli::coeffs();
    cplx poch = s;             // (s)(s+1)...(s+2j-2), starts at j=1 with just s
    cplx recip_sum = 1.0 / s;  // sum 1/(s+i); d/ds poch = poch * recip_sum
    cplx power = pM / bM;  // (w+M)^{-s-1}
    for (int j = 1; j <= kEmJ; ++j) {
        const cplx term = cj[j - 1] * poch * power;
        main.add(term);
        if (want_deriv) main_d.add(cj[j - 1] * (poch * recip_sum - poch * LM) * power);
        if (j < kEmJ) {
            poch *= (s + static_cast<double>(2 * j - 1)) * (s + static_cast<double>(2 * j));
            recip_sum += 1.0 / (s + static_cast<double>(2 * j - 1)) +
                         1.0 / (s + static_cast<double>(2 * j));
            power /= bM * bM;
        }
    }
    h.main = main.value();
    h.main_d = main_d.value();

    const cplx u = s - 1.0;
    h.G = -LM * phi1(-u * LM);
    if (want_deriv) h.G_d = gderiv(u, LM);
    return h;
}

}  // namespace detail

enum class LMethod { Auto, TruncatedAbel, HurwitzEM };

struct LEvaluation {
    ComplexPoint s;
    std::complex<double> value{0.0, 0.0};
    double abs_error_bound = 0.0;
    LMethod method = LMethod::Auto;
    std::uint64_t terms_used = 0;
};

inline constexpr std::uint64_t kDefaultLTermCap = 10'000'000;

// Max over one period of |sum_{n<=k} chi(n)|; the constant in the Abel
// tail bound. Exact small integer combination of unit vectors.
inline double abel_prefix_bound(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.q();
    std::complex<double> run{0.0, 0.0};
    double best = 0.0;
    for (std::uint64_t k = 1; k < q; ++k) {
        run += chi.evaluate(static_cast<std::int64_t>(k));
        best = std::max(best, std::abs(run));
    }
    return best;
}

inline double abel_tail_bound(ComplexPoint s, const DirichletCharacter& chi, std::uint64_t N) {
    const double sig = s.sigma;
    const double smod = std::abs(s.value());
    return (1.0 + smod / sig) * abel_prefix_bound(chi) * std::pow(static_cast<double>(N), -sig);
}

inline std::uint64_t abel_terms_needed(ComplexPoint s, const DirichletCharacter& chi,
                                       double target) {
    const double sig = s.sigma;
    const double smod = std::abs(s.value());
    const double c = (1.0 + smod / sig) * abel_prefix_bound(chi);
    if (c <= target) return 1;
    const double logN = std::log(c / target) / sig;
    if (logN > 60.0) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(std::ceil(std::exp(logN))) + 1;
}

namespace detail {

inline LEvaluation abel_evaluate(ComplexPoint s, const DirichletCharacter& chi, double target,
                                 std::uint64_t term_cap) {
    const std::uint64_t N = abel_terms_needed(s, chi, target);
    if (N > term_cap)
        throw precision_error("evaluate_L: truncated_abel needs " +
                              (N == std::numeric_limits<std::uint64_t>::max()
                                   ? std::string("too many")
                                   : std::to_string(N)) +
                              " terms, cap is " + std::to_string(term_cap));
    KahanComplex acc;
    for (std::uint64_t n = 1; n <= N; ++n) {
        std::uint64_t num, den;
        if (!chi.angle(static_cast<std::int64_t>(n), num, den)) continue;
        acc.add(unit_phase(num, den) * rpow(static_cast<double>(n), cplx(-s.sigma, -s.t)));
    }
    LEvaluation ev;
    ev.s = s;
    ev.value = acc.value();
    ev.abs_error_bound = abel_tail_bound(s, chi, N);
    ev.method = LMethod::TruncatedAbel;
    ev.terms_used = N;
    return ev;
}

// Non-principal chi through the Hurwitz decomposition, poles cancelled.
inline LEvaluation hurwitz_evaluate(ComplexPoint s, const DirichletCharacter& chi, double target,
                                    std::uint64_t term_cap, bool want_deriv, cplx* deriv_out,
                                    double* deriv_err_out) {
    const std::uint64_t q = chi.q();
    const cplx sv = s.value();
    const double phi = static_cast<double>(chi.structure().phi());
    const double qfac = std::pow(static_cast<double>(q), -s.sigma);
    // target for each per-a remainder so the assembled error meets target
    const double per_target = target / std::max(1.0, 2.0 * qfac * phi);
    const double wmin = 1.0 / static_cast<double>(q);
    const std::uint64_t M = choose_em_M(sv, wmin, per_target, term_cap);
    KahanComplex val, dval;
    double err = 0.0, derr = 0.0;
    std::uint64_t terms = 0;
    for (std::uint64_t a = 1; a <= q; ++a) {
        std::uint64_t num, den;
        if (!chi.angle(static_cast<std::int64_t>(a), num, den)) continue;
        const cplx ca = unit_phase(num, den);
        const double w = static_cast<double>(a) / static_cast<double>(q);
        const auto parts = hurwitz_parts(sv, w, M, want_deriv);
        val.add(ca * (parts.main + parts.G));
        if (want_deriv) dval.add(ca * (parts.main_d + parts.G_d));
        const auto b = em_remainder_bounds(sv, w, M);
        err += b.err;
        derr += b.err_deriv;
        terms += M + kEmJ;
    }
    const cplx qs = rpow(static_cast<double>(q), -sv);
    LEvaluation ev;
    ev.s = s;
    ev.value = qs * val.value();
    ev.abs_error_bound = qfac * err + 1e-14 * (1.0 + std::abs(ev.value));
    ev.method = LMethod::HurwitzEM;
    ev.terms_used = terms;
    if (want_deriv) {
        // L' = -log q * L + q^{-s} sum_a chi(a) zeta'(s, a/q)
        const double lq = std::log(static_cast<double>(q));
        *deriv_out = -lq * ev.value + qs * dval.value();
        *deriv_err_out =
            lq * ev.abs_error_bound + qfac * derr + 1e-14 * (1.0 + std::abs(*deriv_out));
    }
    return ev;
}

// zeta(s) for sigma > 1, with derivative on request. Pole term direct.
inline LEvaluation zeta_evaluate(ComplexPoint s, double target, std::uint64_t term_cap,
                                 bool want_deriv, cplx* deriv_out, double* deriv_err_out) {
    const cplx sv = s.value();
    const std::uint64_t M = choose_em_M(sv, 1.0, target / 2.0, term_cap);
    const auto parts = hurwitz_parts(sv, 1.0, M, want_deriv);
    const cplx u = sv - 1.0;
    LEvaluation ev;
    ev.s = s;
    ev.value = parts.main + parts.G + 1.0 / u;
    const auto b = em_remainder_bounds(sv, 1.0, M);
    ev.abs_error_bound = b.err + 1e-14 * (1.0 + std::abs(ev.value));
    ev.method = LMethod::HurwitzEM;
    ev.terms_used = M + kEmJ;
    if (want_deriv) {
        *deriv_out = parts.main_d + parts.G_d - 1.0 / (u * u);
        *deriv_err_out = b.err_deriv + 1e-14 * (1.0 + std::abs(*deriv_out));
    }
    return ev;
}

// L(s, chi_0 mod q) = zeta(s) prod_{p|q} (1 - p^{-s}), sigma > 1.
inline LEvaluation principal_evaluate(ComplexPoint s, const DirichletCharacter& chi,
                                      double target, std::uint64_t term_cap, bool want_deriv,
                                      cplx* deriv_out, double* deriv_err_out) {
    if (!(s.sigma > 1.0))
        throw std::domain_error("evaluate_L: principal character requires sigma > 1");
    cplx zd{0.0, 0.0};
    double zde = 0.0;
    LEvaluation z = zeta_evaluate(s, target / 2.0, term_cap, want_deriv, &zd, &zde);
    cplx prod{1.0, 0.0};
    cplx logp_sum{0.0, 0.0};  // sum_p log p * p^{-s} / (1 - p^{-s})
    double prod_abs_hi = 1.0;
    for (const auto& f : chi.structure().modulus().factors) {
        const double p = static_cast<double>(f.p);
        const cplx ps = rpow(p, cplx(-s.sigma, -s.t));
        prod *= (1.0 - ps);
        prod_abs_hi *= 1.0 + std::pow(p, -s.sigma);
        if (want_deriv) logp_sum += std::log(p) * ps / (1.0 - ps);
    }
    LEvaluation ev;
    ev.s = s;
    ev.value = z.value * prod;
    ev.abs_error_bound = z.abs_error_bound * prod_abs_hi + 1e-14 * (1.0 + std::abs(ev.value));
    ev.method = LMethod::HurwitzEM;
    ev.terms_used = z.terms_used;
    if (want_deriv) {
        // (zeta * prod)' = zeta' prod + zeta * prod * sum_p log p p^{-s}/(1-p^{-s})
        *deriv_out = zd * prod + ev.value * logp_sum;
        *deriv_err_out = zde * prod_abs_hi +
                         z.abs_error_bound * prod_abs_hi * std::abs(logp_sum) +
                         1e-14 * (1.0 + std::abs(*deriv_out));
    }
    return ev;
}

}  // namespace detail

inline LEvaluation evaluate_L(ComplexPoint s, const DirichletCharacter& chi, double target,
                              LMethod method = LMethod::Auto,
                              std::uint64_t term_cap = kDefaultLTermCap) {
    if (!(target > 0.0)) throw std::domain_error("evaluate_L: target must be positive");
    if (chi.is_principal()) {
        if (method == LMethod::TruncatedAbel)
            throw std::domain_error("evaluate_L: truncated_abel undefined for principal chi");
        return detail::principal_evaluate(s, chi, target, term_cap, false, nullptr, nullptr);
    }
    if (!(s.sigma > 0.1))
        throw std::domain_error("evaluate_L: non-principal evaluation requires sigma > 0.1");
    switch (method) {
        case LMethod::TruncatedAbel:
            return detail::abel_evaluate(s, chi, target, term_cap);
        case LMethod::HurwitzEM:
            return detail::hurwitz_evaluate(s, chi, target, term_cap, false, nullptr, nullptr);
        case LMethod::Auto:
        default: {
            const std::uint64_t need = abel_terms_needed(s, chi, target);
            if (need <= term_cap) return detail::abel_evaluate(s, chi, target, term_cap);
            return detail::hurwitz_evaluate(s, chi, target, term_cap, false, nullptr, nullptr);
        }
    }
}

enum class LogDerivMethod { Auto, DirichletSeries, EMDerivative, FiniteDifference };

struct DerivEvaluation {
    ComplexPoint s;
    std::complex<double> value{0.0, 0.0};
    double abs_error_bound = std::numeric_limits<double>::quiet_NaN();
    LogDerivMethod method = LogDerivMethod::Auto;
    bool rigorous = false;
    std::uint64_t terms_used = 0;
};

namespace detail {

// -L'/L = sum Lambda(n) chi(n) n^{-s} for sigma > 1, Lambda generated by a
// local Eratosthenes pass. Tail bound: integral of log(u) u^{-sigma}.
inline DerivEvaluation logderiv_series(ComplexPoint s, const DirichletCharacter& chi,
                                       double target, std::uint64_t term_cap) {
    if (!(s.sigma > 1.0))
        throw std::domain_error("evaluate_logderiv: Dirichlet series requires sigma > 1");
    const double sig = s.sigma;
    auto tail = [sig](double N) {
        return std::pow(N, 1.0 - sig) * (std::log(N) / (sig - 1.0) + 1.0 / ((sig - 1.0) * (sig - 1.0)));
    };
    std::uint64_t N = 64;
    while (tail(static_cast<double>(N)) > target) {
        if (N >= term_cap)
            throw precision_error("evaluate_logderiv: series needs more than cap terms");
        N *= 2;
    }
    std::vector<bool> composite(N + 1, false);
    KahanComplex acc;
    std::uint64_t terms = 0;
    for (std::uint64_t p = 2; p <= N; ++p) {
        if (composite[p]) continue;
        for (std::uint64_t m = p * p; m <= N; m += p) composite[m] = true;
        const double lp = std::log(static_cast<double>(p));
        for (std::uint64_t pk = p; pk <= N; pk *= p) {
            std::uint64_t num, den;
            if (chi.angle(static_cast<std::int64_t>(pk), num, den)) {
                acc.add(lp * unit_phase(num, den) *
                        rpow(static_cast<double>(pk), cplx(-sig, -s.t)));
                ++terms;
            }
            if (pk > N / p) break;
        }
    }
    DerivEvaluation ev;
    ev.s = s;
    ev.value = -acc.value();  // L'/L = -sum
    ev.abs_error_bound = tail(static_cast<double>(N)) + 1e-14 * (1.0 + std::abs(ev.value));
    ev.method = LogDerivMethod::DirichletSeries;
    ev.rigorous = true;
    ev.terms_used = terms;
    return ev;
}

inline void l_with_deriv(ComplexPoint s, const DirichletCharacter& chi, double target,
                         std::uint64_t term_cap, LEvaluation& L, cplx& Ld, double& Ld_err) {
    if (chi.is_principal()) {
        L = principal_evaluate(s, chi, target, term_cap, true, &Ld, &Ld_err);
    } else {
        L = hurwitz_evaluate(s, chi, target, term_cap, true, &Ld, &Ld_err);
    }
}

inline DerivEvaluation logderiv_em(ComplexPoint s, const DirichletCharacter& chi, double target,
                                   std::uint64_t term_cap) {
    if (!(s.sigma > 1.0))
        throw std::domain_error("evaluate_logderiv: EM-derivative route requires sigma > 1");
    double component_target = std::min(1e-8, target);
    for (int attempt = 0; attempt < 6; ++attempt) {
        LEvaluation L;
        cplx Ld;
        double Ld_err = 0.0;
        l_with_deriv(s, chi, component_target, term_cap, L, Ld, Ld_err);
        const double la = std::abs(L.value);
        if (la <= 2.0 * L.abs_error_bound)
            throw precision_error("evaluate_logderiv: |L| not separated from its error bound");
        const double denom = la - L.abs_error_bound;
        const double err = Ld_err / denom + std::abs(Ld) * L.abs_error_bound / (la * denom);
        if (err <= target || component_target <= 1e-15) {
            DerivEvaluation ev;
            ev.s = s;
            ev.value = Ld / L.value;
            ev.abs_error_bound = err;
            ev.method = LogDerivMethod::EMDerivative;
            ev.rigorous = true;
            ev.terms_used = L.terms_used;
            return ev;
        }
        component_target = std::max(1e-15, component_target * (target / err) * 0.25);
    }
    throw precision_error("evaluate_logderiv: could not reach target");
}

inline DerivEvaluation logderiv_fd(ComplexPoint s, const DirichletCharacter& chi, double h,
                                   std::uint64_t term_cap) {
    if (chi.is_principal())
        throw std::domain_error("evaluate_logderiv: finite differences need non-principal chi");
    const auto lm = LMethod::HurwitzEM;
    const auto Lp = evaluate_L({s.sigma + h, s.t}, chi, 1e-11, lm, term_cap);
    const auto Lm = evaluate_L({s.sigma - h, s.t}, chi, 1e-11, lm, term_cap);
    const auto L0 = evaluate_L(s, chi, 1e-11, lm, term_cap);
    DerivEvaluation ev;
    ev.s = s;
    ev.value = (Lp.value - Lm.value) / (2.0 * h * L0.value);
    ev.method = LogDerivMethod::FiniteDifference;
    ev.rigorous = false;  // truncation of the difference quotient is not bounded here
    ev.terms_used = Lp.terms_used + Lm.terms_used + L0.terms_used;
    return ev;
}

}  // namespace detail

// L'/L. For sigma > 1 both the Lambda-series route and the EM-derivative
// route are rigorous; Auto picks EM (the series needs astronomically many
// terms as sigma approaches 1). Below sigma = 1 only the finite-difference
// route exists and is labeled non-rigorous.
inline DerivEvaluation evaluate_logderiv(ComplexPoint s, const DirichletCharacter& chi,
                                         double target,
                                         LogDerivMethod method = LogDerivMethod::Auto,
                                         std::uint64_t term_cap = kDefaultLTermCap,
                                         double fd_step = 1e-5) {
    switch (method) {
        case LogDerivMethod::DirichletSeries:
            return detail::logderiv_series(s, chi, target, term_cap);
        case LogDerivMethod::EMDerivative:
            return detail::logderiv_em(s, chi, target, term_cap);
        case LogDerivMethod::FiniteDifference:
            return detail::logderiv_fd(s, chi, fd_step, term_cap);
        case LogDerivMethod::Auto:
        default:
            if (s.sigma > 1.0) return detail::logderiv_em(s, chi, target, term_cap);
            return detail::logderiv_fd(s, chi, fd_step, term_cap);
    }
}

struct RecipEvaluation {
    ComplexPoint s;
    std::complex<double> value{0.0, 0.0};
    double abs_error_bound = std::numeric_limits<double>::quiet_NaN();
    bool rigorous = false;
    bool near_zero = false;  // |L| <= 10 * error bound: possible nearby zero
    double l_abs = 0.0;
    std::uint64_t terms_used = 0;
};

inline RecipEvaluation evaluate_recip(ComplexPoint s, const DirichletCharacter& chi,
                                      double target, LMethod method = LMethod::Auto,
                                      std::uint64_t term_cap = kDefaultLTermCap) {
    double component_target = std::min(1e-8, target);
    RecipEvaluation ev;
    ev.s = s;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const LEvaluation L = evaluate_L(s, chi, component_target, method, term_cap);
        const double la = std::abs(L.value);
        ev.l_abs = la;
        ev.terms_used = L.terms_used;
        if (la <= 10.0 * L.abs_error_bound) {
            ev.near_zero = true;
            ev.rigorous = false;
            ev.value = (la > 0.0) ? 1.0 / L.value : std::complex<double>(0.0, 0.0);
            ev.abs_error_bound = std::numeric_limits<double>::infinity();
            return ev;
        }
        const double err = L.abs_error_bound / (la * (la - L.abs_error_bound));
        if (err <= target || component_target <= 1e-15) {
            ev.value = 1.0 / L.value;
            ev.abs_error_bound = err;
            ev.rigorous = true;
            ev.near_zero = false;
            return ev;
        }
        component_target = std::max(1e-15, component_target * (target / err) * 0.25);
    }
    throw precision_error("evaluate_recip: could not reach target");
}

// ---------------------------------------------------------------------------
// Zero scanning

struct Rectangle {
    double sigma_min = 0.0, sigma_max = 0.0;
    double t_min = 0.0, t_max = 0.0;
};

struct GridSpec {
    std::size_t n_sigma = 1, n_t = 1;
};

struct ZeroHit {
    ComplexPoint location;
    double abs_L = 0.0;
    int iterations = 0;
};

struct ZeroScanReport {
    Rectangle rectangle;
    GridSpec grid;
    double min_abs_L = std::numeric_limits<double>::infinity();
    ComplexPoint argmin;
    std::vector<ZeroHit> zeros;
    double vartheta_used = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t evaluations = 0;
    std::size_t failed_points = 0;
};

namespace detail {

inline cplx l_value_or_nan(ComplexPoint s, const DirichletCharacter& chi,
                           std::uint64_t term_cap) {
    try {
        return evaluate_L(s, chi, 1e-10, LMethod::HurwitzEM, term_cap).value;
    } catch (const precision_error&) {
        return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    } catch (const std::domain_error&) {
        // Newton refinement can wander out of the evaluation domain
        return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    }
}

}  // namespace detail

inline ZeroScanReport zero_scan(const DirichletCharacter& chi, Rectangle rect, GridSpec grid,
                                double refine_tol, const EnvelopeConfig& cfg = EnvelopeConfig{},
                                double candidate_threshold = 1e-2,
                                std::uint64_t term_cap = kDefaultLTermCap) {
    if (grid.n_sigma < 1 || grid.n_t < 1) throw std::domain_error("zero_scan: empty grid");
    if (rect.sigma_max < rect.sigma_min || rect.t_max < rect.t_min)
        throw std::domain_error("zero_scan: malformed rectangle");
    if (chi.is_principal()) {
        if (!(rect.sigma_min > 1.0))
            throw std::domain_error("zero_scan: principal chi requires sigma_min > 1");
    } else if (!(rect.sigma_min > 0.1)) {
        throw std::domain_error("zero_scan: requires sigma_min > 0.1");
    }
    ZeroScanReport rep;
    rep.rectangle = rect;
    rep.grid = grid;
    if (chi.q() >= 3)
        rep.vartheta_used = region_select(static_cast<double>(chi.q()), 0.0, cfg).vartheta1;

    auto sigma_at = [&](std::size_t i) {
        if (grid.n_sigma == 1) return 0.5 * (rect.sigma_min + rect.sigma_max);
        return rect.sigma_min + (rect.sigma_max - rect.sigma_min) * static_cast<double>(i) /
                                    static_cast<double>(grid.n_sigma - 1);
    };
    auto t_at = [&](std::size_t j) {
        if (grid.n_t == 1) return 0.5 * (rect.t_min + rect.t_max);
        return rect.t_min + (rect.t_max - rect.t_min) * static_cast<double>(j) /
                                static_cast<double>(grid.n_t - 1);
    };

    std::vector<double> absval(grid.n_sigma * grid.n_t,
                               std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < grid.n_sigma; ++i) {
        for (std::size_t j = 0; j < grid.n_t; ++j) {
            const ComplexPoint p{sigma_at(i), t_at(j)};
            const auto v = detail::l_value_or_nan(p, chi, term_cap);
            ++rep.evaluations;
            if (std::isnan(v.real())) {
                ++rep.failed_points;
                continue;
            }
            const double a = std::abs(v);
            absval[i * grid.n_t + j] = a;
            if (a < rep.min_abs_L) {
                rep.min_abs_L = a;
                rep.argmin = p;
            }
        }
    }

    // Newton refinement from grid local minima below the candidate
    // threshold; derivative from central differences, step 1e-6.
    auto is_local_min = [&](std::size_t i, std::size_t j) {
        const double a = absval[i * grid.n_t + j];
        if (std::isnan(a) || a >= candidate_threshold) return false;
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                const std::int64_t ii = static_cast<std::int64_t>(i) + di;
                const std::int64_t jj = static_cast<std::int64_t>(j) + dj;
                if (ii < 0 || jj < 0 || ii >= static_cast<std::int64_t>(grid.n_sigma) ||
                    jj >= static_cast<std::int64_t>(grid.n_t))
                    continue;
                const double b = absval[static_cast<std::size_t>(ii) * grid.n_t +
                                        static_cast<std::size_t>(jj)];
                if (!std::isnan(b) && b < a) return false;
            }
        }
        return true;
    };

    const double h = 1e-6;
    for (std::size_t i = 0; i < grid.n_sigma; ++i) {
        for (std::size_t j = 0; j < grid.n_t; ++j) {
            if (!is_local_min(i, j)) continue;
            ComplexPoint z{sigma_at(i), t_at(j)};
            double prev = absval[i * grid.n_t + j];
            int it = 0;
            bool converged = false;
            for (; it < 50; ++it) {
                const auto f = detail::l_value_or_nan(z, chi, term_cap);
                const auto fp = detail::l_value_or_nan({z.sigma + h, z.t}, chi, term_cap);
                const auto fm = detail::l_value_or_nan({z.sigma - h, z.t}, chi, term_cap);
                rep.evaluations += 3;
                if (std::isnan(f.real()) || std::isnan(fp.real()) || std::isnan(fm.real())) {
                    ++rep.failed_points;
                    break;
                }
                const std::complex<double> d = (fp - fm) / (2.0 * h);
                if (std::abs(d) == 0.0) break;
                const std::complex<double> step = f / d;
                z.sigma -= step.real();
                z.t -= step.imag();
                const double fa = std::abs(f);
                if (fa > 4.0 * prev + 1.0) break;  // diverging
                prev = std::min(prev, fa);
                if (std::abs(step) < 1e-12) {
                    converged = true;
                    break;
                }
            }
            if (!converged) continue;
            const auto fz = detail::l_value_or_nan(z, chi, term_cap);
            ++rep.evaluations;
            if (std::isnan(fz.real()) || std::abs(fz) >= refine_tol) continue;
            const double margin = 1e-6;
            if (z.sigma < rect.sigma_min - margin || z.sigma > rect.sigma_max + margin ||
                z.t < rect.t_min - margin || z.t > rect.t_max + margin)
                continue;
            bool dup = false;
            for (const auto& hit : rep.zeros) {
                if (std::abs(hit.location.sigma - z.sigma) < 1e-8 &&
                    std::abs(hit.location.t - z.t) < 1e-8) {
                    dup = true;
                    break;
                }
            }
            if (!dup) rep.zeros.push_back({z, std::abs(fz), it});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Perron reconstruction

struct PerronResult {
    std::complex<double> integral_value{0.0, 0.0};
    std::complex<double> direct_value{0.0, 0.0};
    double discrepancy = 0.0;
    double r_bound = 0.0;
    double sigma0 = 0.0;
    std::uint64_t nodes = 0;
};

// psi(x,chi) = -(1/2pi i) int_{sigma0-iT}^{sigma0+iT} (L'/L)(s) x^s/s ds + R,
// M(x,chi) the same with +1/L; sigma0 = 1 + 1/log x. The vertical segment
// is integrated by composite Simpson with the given t-step, the integrand
// from the rigorous sigma > 1 evaluations, and the result compared with
// the direct sum over n <= x. r_bound is the error envelope
// x (log x)^2 / T (psi) or x log x / T (mu) times r_bound_constant.
inline PerronResult perron_reconstruct(SumKind kind, double x, const DirichletCharacter& chi,
                                       double T, double quadrature_step, const SieveTable& sieve,
                                       double r_bound_constant = 10.0,
                                       std::uint64_t term_cap = kDefaultLTermCap) {
    if (!(T >= 2.0)) throw std::domain_error("perron_reconstruct: need T >= 2");
    if (!(x >= 2.0)) throw std::domain_error("perron_reconstruct: need x >= 2");
    if (!(quadrature_step > 0.0))
        throw std::domain_error("perron_reconstruct: step must be positive");
    const double lx = std::log(x);
    const double sigma0 = 1.0 + 1.0 / lx;

    std::uint64_t half = static_cast<std::uint64_t>(std::ceil(T / quadrature_step));
    if (half % 2 != 0) ++half;  // even count per side so t=0 is a Simpson node
    const std::uint64_t n = 2 * half;  // intervals over [-T, T]
    const double hstep = 2.0 * T / static_cast<double>(n);

    const bool mirror = chi.is_real();
    auto integrand = [&](double t) -> std::complex<double> {
        const ComplexPoint s{sigma0, t};
        const std::complex<double> sv = s.value();
        std::complex<double> factor;
        if (kind == SumKind::Psi) {
            factor = -evaluate_logderiv(s, chi, 1e-7, LogDerivMethod::EMDerivative, term_cap).value;
        } else {
            factor = evaluate_recip(s, chi, 1e-9, LMethod::HurwitzEM, term_cap).value;
        }
        return factor * detail::rpow(x, sv) / sv;
    };

    // Simpson weights are symmetric under k -> n-k, and for real chi the
    // integrand at -t is the conjugate of the one at t, so the negative
    // half costs nothing extra.
    KahanComplex acc;
    auto weight = [n](std::uint64_t k) {
        return (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    };
    if (mirror) {
        for (std::uint64_t k = n / 2; k <= n; ++k) {
            const double t = -T + static_cast<double>(k) * hstep;
            const std::complex<double> f = integrand(t);
            acc.add(weight(k) * f);
            if (k > n / 2) acc.add(weight(n - k) * std::conj(f));
        }
    } else {
        for (std::uint64_t k = 0; k <= n; ++k) {
            const double t = -T + static_cast<double>(k) * hstep;
            acc.add(weight(k) * integrand(t));
        }
    }
    PerronResult pr;
    pr.sigma0 = sigma0;
    pr.nodes = n + 1;
    pr.integral_value = acc.value() * (hstep / 3.0) / kTwoPi;
    pr.direct_value = (kind == SumKind::Psi) ? psi_sum(x, chi, sieve).value
                                             : mobius_sum(x, chi, sieve).value;
    pr.discrepancy = std::abs(pr.integral_value - pr.direct_value);
    pr.r_bound = (kind == SumKind::Psi) ? r_bound_constant * x * lx * lx / T
                                        : r_bound_constant * x * lx / T;
    return pr;
}

}  // namespace powmod
