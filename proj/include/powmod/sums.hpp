#pragma once

// The twisted sums: M(x,chi) = sum mu(n)chi(n), psi(x,chi) with Lambda
// weights, their maxima over all characters mod q, the additively twisted
// S_q(x,a), progression sums D_q(x,a), Dirichlet polynomials
// T_chi(M,N;t) = sum_{M<n<=M+N} chi(n) n^{it}, dyadic blocks, and the
// Fourier-Walsh coefficients of mu. Real cutoffs x mean n <= floor(x).

#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "powmod/arith.hpp"
#include "powmod/characters.hpp"
#include "powmod/common.hpp"

namespace powmod {

enum class SumKind { Mobius, Psi };

struct TwistedSumResult {
    std::complex<double> value{0.0, 0.0};
    double x = 0.0;
    std::string character_label;
    double normalized = 0.0;  // |value| / x
};

struct MaxOverCharacters {
    double value = 0.0;
    std::string argmax_label;  // character label, or the residue a as decimal
    std::uint64_t q = 0;
};

inline constexpr std::uint64_t kDefaultPolyCap = 100'000'000;

namespace detail {

inline std::uint64_t cutoff(double x, const SieveTable& t, const char* who) {
    if (!(x >= 0.0)) throw std::domain_error(std::string(who) + ": x must be nonnegative");
    const auto n = static_cast<std::uint64_t>(std::floor(x));
    if (n > t.limit)
        throw std::range_error(std::string(who) + ": x exceeds sieve limit " +
                               std::to_string(t.limit));
    return n;
}

inline TwistedSumResult make_result(std::complex<double> v, double x,
                                    const DirichletCharacter& chi) {
    TwistedSumResult r;
    r.value = v;
    r.x = x;
    r.character_label = chi.label();
    r.normalized = (x > 0.0) ? std::abs(v) / x : 0.0;
    return r;
}

}  // namespace detail

inline TwistedSumResult mobius_sum(double x, const DirichletCharacter& chi, const SieveTable& t) {
    const std::uint64_t nmax = detail::cutoff(x, t, "mobius_sum");
    KahanComplex acc;
    for (std::uint64_t n = 1; n <= nmax; ++n) {
        const int m = t.mu[n];
        if (m == 0) continue;
        std::uint64_t num, den;
        if (!chi.angle(static_cast<std::int64_t>(n), num, den)) continue;
        acc.add(static_cast<double>(m) * unit_phase(num, den));
    }
    return detail::make_result(acc.value(), x, chi);
}

inline TwistedSumResult psi_sum(double x, const DirichletCharacter& chi, const SieveTable& t) {
    const std::uint64_t nmax = detail::cutoff(x, t, "psi_sum");
    KahanComplex acc;
    for (std::uint64_t n = 2; n <= nmax; ++n) {
        const double lam = t.lambda_log[n];
        if (lam == 0.0) continue;
        std::uint64_t num, den;
        if (!chi.angle(static_cast<std::int64_t>(n), num, den)) continue;
        acc.add(lam * unit_phase(num, den));
    }
    return detail::make_result(acc.value(), x, chi);
}

// Per-residue accumulation: one pass over n collects
// D[r] = sum of the weights with n = r mod q, after which every character
// sum is sum_r chi(r) D[r]. Exact regrouping of the defining sum.
namespace detail {

inline void residue_sums(std::uint64_t nmax, std::uint64_t q, SumKind kind, const SieveTable& t,
                         std::vector<double>& D) {
    D.assign(q, 0.0);
    std::vector<KahanSum> acc(kind == SumKind::Psi ? q : 0);
    if (kind == SumKind::Mobius) {
        std::vector<std::int64_t> di(q, 0);
        for (std::uint64_t n = 1; n <= nmax; ++n) di[n % q] += t.mu[n];
        for (std::uint64_t r = 0; r < q; ++r) D[r] = static_cast<double>(di[r]);
    } else {
        for (std::uint64_t n = 2; n <= nmax; ++n)
            if (t.lambda_log[n] != 0.0) acc[n % q].add(t.lambda_log[n]);
        for (std::uint64_t r = 0; r < q; ++r) D[r] = acc[r].value();
    }
}

inline MaxOverCharacters max_from_residues(const std::vector<double>& D, const StructurePtr& s) {
    const auto chars = enumerate_characters(s);
    MaxOverCharacters best;
    best.q = s->q();
    best.value = -1.0;
    for (const auto& chi : chars) {
        KahanComplex acc;
        for (std::uint64_t r = 0; r < s->q(); ++r) {
            if (D[r] == 0.0) continue;
            std::uint64_t num, den;
            if (!chi.angle(static_cast<std::int64_t>(r), num, den)) continue;
            acc.add(D[r] * unit_phase(num, den));
        }
        const double v = std::abs(acc.value());
        if (v > best.value) {
            best.value = v;
            best.argmax_label = chi.label();
        }
    }
    return best;
}

}  // namespace detail

inline MaxOverCharacters max_over_characters(double x, const FactoredModulus& m, SumKind kind,
                                             const SieveTable& t,
                                             std::uint64_t cap = kDefaultStructureCap) {
    const std::uint64_t nmax = detail::cutoff(x, t, "max_over_characters");
    const std::uint64_t q = m.q;
    auto s = build_structure(m, cap);
    std::vector<double> D;
    detail::residue_sums(nmax, q, kind, t, D);
    return detail::max_from_residues(D, s);
}

// Checkpointed variant: one pass over n <= max(xs), reporting the max at
// each cutoff. xs must be ascending.
inline std::vector<MaxOverCharacters> max_over_characters_checkpoints(
    const std::vector<std::uint64_t>& xs, const FactoredModulus& m, SumKind kind,
    const SieveTable& t, std::uint64_t cap = kDefaultStructureCap) {
    if (xs.empty()) return {};
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] < xs[i - 1]) throw std::domain_error("checkpoints must be ascending");
    detail::cutoff(static_cast<double>(xs.back()), t, "max_over_characters");
    const std::uint64_t q = m.q;
    auto s = build_structure(m, cap);
    std::vector<std::int64_t> di(q, 0);
    std::vector<KahanSum> dd(kind == SumKind::Psi ? q : 0);
    std::vector<MaxOverCharacters> out;
    std::uint64_t n = 1;
    for (std::uint64_t x : xs) {
        for (; n <= x; ++n) {
            if (kind == SumKind::Mobius) {
                di[n % q] += t.mu[n];
            } else if (t.lambda_log[n] != 0.0) {
                dd[n % q].add(t.lambda_log[n]);
            }
        }
        std::vector<double> D(q);
        for (std::uint64_t r = 0; r < q; ++r)
            D[r] = (kind == SumKind::Mobius) ? static_cast<double>(di[r]) : dd[r].value();
        out.push_back(detail::max_from_residues(D, s));
    }
    return out;
}

// S_q(x,a) = sum_{n<=x} mu(n) e(an/q).
inline std::complex<double> exp_sum(double x, std::uint64_t q, std::int64_t a,
                                    const SieveTable& t) {
    if (q < 1) throw std::domain_error("exp_sum: q must be >= 1");
    const std::uint64_t nmax = detail::cutoff(x, t, "exp_sum");
    const std::uint64_t am = static_cast<std::uint64_t>(((a % static_cast<std::int64_t>(q)) +
                                                         static_cast<std::int64_t>(q)) %
                                                        static_cast<std::int64_t>(q));
    KahanComplex acc;
    for (std::uint64_t n = 1; n <= nmax; ++n) {
        const int m = t.mu[n];
        if (m == 0) continue;
        acc.add(static_cast<double>(m) * unit_phase((am * (n % q)) % q, q));
    }
    return acc.value();
}

// D_q(x,a) = sum_{n<=x, n=a mod q} mu(n), exact.
inline std::int64_t progression_sum(double x, std::uint64_t q, std::int64_t a,
                                    const SieveTable& t) {
    if (q < 1) throw std::domain_error("progression_sum: q must be >= 1");
    const std::uint64_t nmax = detail::cutoff(x, t, "progression_sum");
    const std::uint64_t am = static_cast<std::uint64_t>(((a % static_cast<std::int64_t>(q)) +
                                                         static_cast<std::int64_t>(q)) %
                                                        static_cast<std::int64_t>(q));
    std::int64_t s = 0;
    for (std::uint64_t n = 1; n <= nmax; ++n)
        if (n % q == am) s += t.mu[n];
    return s;
}

// hat S_q(x) = max_a |S_q(x,a)|. One pass collects the progression sums;
// S_q(x,a) = sum_b e(ab/q) D_q(x,b) regroups the defining sum exactly.
inline MaxOverCharacters max_exp_sum(double x, std::uint64_t q, const SieveTable& t) {
    if (q < 1) throw std::domain_error("max_exp_sum: q must be >= 1");
    const std::uint64_t nmax = detail::cutoff(x, t, "max_exp_sum");
    std::vector<std::int64_t> D(q, 0);
    for (std::uint64_t n = 1; n <= nmax; ++n) D[n % q] += t.mu[n];
    MaxOverCharacters best;
    best.q = q;
    best.value = -1.0;
    for (std::uint64_t a = 0; a < q; ++a) {
        KahanComplex acc;
        for (std::uint64_t b = 0; b < q; ++b) {
            if (D[b] == 0) continue;
            acc.add(static_cast<double>(D[b]) * unit_phase((a * b) % q, q));
        }
        const double v = std::abs(acc.value());
        if (v > best.value) {
            best.value = v;
            best.argmax_label = std::to_string(a);
        }
    }
    return best;
}

// hat D_q(x) = max over units a of |D_q(x,a)|.
inline MaxOverCharacters max_progression_sum(double x, std::uint64_t q, const SieveTable& t) {
    if (q < 1) throw std::domain_error("max_progression_sum: q must be >= 1");
    const std::uint64_t nmax = detail::cutoff(x, t, "max_progression_sum");
    std::vector<std::int64_t> D(q, 0);
    for (std::uint64_t n = 1; n <= nmax; ++n) D[n % q] += t.mu[n];
    MaxOverCharacters best;
    best.q = q;
    best.value = -1.0;
    for (std::uint64_t a = 0; a < q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        const double v = std::abs(static_cast<double>(D[a]));
        if (v > best.value) {
            best.value = v;
            best.argmax_label = std::to_string(a);
        }
    }
    if (best.value < 0.0) best.value = 0.0;
    return best;
}

// T_chi(M,N;t) = sum_{M<n<=M+N} chi(n) n^{it}, n^{it} = exp(i t log n)
// evaluated per term.
inline std::complex<double> dirichlet_poly(double M, double N, double t,
                                           const DirichletCharacter& chi,
                                           std::uint64_t cap = kDefaultPolyCap) {
    if (M < 0.0 || N < 1.0) throw std::domain_error("dirichlet_poly: need M >= 0, N >= 1");
    if (M + N > static_cast<double>(cap))
        throw resource_error("dirichlet_poly: M+N exceeds cap " + std::to_string(cap));
    const auto lo = static_cast<std::uint64_t>(std::floor(M));
    const auto hi = static_cast<std::uint64_t>(std::floor(M + N));
    KahanComplex acc;
    for (std::uint64_t n = lo + 1; n <= hi; ++n) {
        std::uint64_t num, den;
        if (!chi.angle(static_cast<std::int64_t>(n), num, den)) continue;
        const double ph = t * std::log(static_cast<double>(n));
        acc.add(unit_phase(num, den) * std::complex<double>(std::cos(ph), std::sin(ph)));
    }
    return acc.value();
}

// sum_{M<n<=2M} chi(n) n^{-s}.
inline std::complex<double> dyadic_block(double M, ComplexPoint s, const DirichletCharacter& chi,
                                         std::uint64_t cap = kDefaultPolyCap) {
    if (M < 0.0) throw std::domain_error("dyadic_block: need M >= 0");
    if (2.0 * M > static_cast<double>(cap))
        throw resource_error("dyadic_block: 2M exceeds cap " + std::to_string(cap));
    const auto lo = static_cast<std::uint64_t>(std::floor(M));
    const auto hi = static_cast<std::uint64_t>(std::floor(2.0 * M));
    KahanComplex acc;
    for (std::uint64_t n = lo + 1; n <= hi; ++n) {
        std::uint64_t num, den;
        if (!chi.angle(static_cast<std::int64_t>(n), num, den)) continue;
        const double ln = std::log(static_cast<double>(n));
        const double mag = std::exp(-s.sigma * ln);
        const double ph = -s.t * ln;
        acc.add(unit_phase(num, den) * std::complex<double>(mag * std::cos(ph), mag * std::sin(ph)));
    }
    return acc.value();
}

// Fourier-Walsh coefficient of mu against the parity of the bits indexed
// by A: mu_hat_n(A) = sum_{m<2^n} mu(m) (-1)^{popcount(m & A)}, using the
// convention mu(0) = 0 for the all-zero bit vector.
inline std::int64_t walsh_coefficient(unsigned n, std::uint64_t a_mask, const SieveTable& t,
                                      int mu_at_zero = 0) {
    if (n < 1 || n > 30) throw resource_error("walsh_coefficient: need 1 <= n <= 30");
    const std::uint64_t top = (1ull << n) - 1;
    if (top > t.limit)
        throw std::range_error("walsh_coefficient: sieve limit below 2^n - 1");
    a_mask &= top;
    std::int64_t s = mu_at_zero;  // m = 0 term carries sign (-1)^popcount(0) = +1
    for (std::uint64_t m = 1; m <= top; ++m) {
        const int mu = t.mu[m];
        if (mu == 0) continue;
        s += (std::popcount(m & a_mask) & 1) ? -mu : mu;
    }
    return s;
}

}  // namespace powmod
