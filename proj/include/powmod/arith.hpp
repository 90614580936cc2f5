#pragma once

// Integer-arithmetic substrate: factorization, p-adic valuations, the
// powerful-modulus admissibility test min_p v_p(q) >= 0.7*gamma, and the
// mu/Lambda/smallest-prime-factor sieve every sum is built on.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "powmod/common.hpp"

namespace powmod {

struct PrimePower {
    std::uint64_t p = 0;
    unsigned e = 0;
};

// A modulus q with its factorization, the extreme valuations
// gamma = max_p v_p(q) and gamma_min = min_p v_p(q), and the squarefree
// core (product of the distinct primes dividing q).
struct FactoredModulus {
    std::uint64_t q = 1;
    std::vector<PrimePower> factors;  // ascending primes
    unsigned gamma = 0;
    unsigned gamma_min = 0;
    std::uint64_t core = 1;

    // The unit modulus q = 1 (empty factorization). factor() itself rejects
    // q < 2, but sums over the trivial character mod 1 need this value.
    static FactoredModulus one() { return FactoredModulus{}; }
};

// Complete factorization by trial division. The moduli of interest are
// smooth by construction, so no fancy factoring is warranted.
inline FactoredModulus factor(std::uint64_t q) {
    if (q < 2) throw std::domain_error("factor: q must be >= 2");
    FactoredModulus m;
    m.q = q;
    std::uint64_t n = q;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
        if (n % p != 0) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        m.factors.push_back({p, e});
    }
    if (n > 1) m.factors.push_back({n, 1});
    m.gamma = 0;
    m.gamma_min = ~0u;
    m.core = 1;
    for (const auto& f : m.factors) {
        if (f.e > m.gamma) m.gamma = f.e;
        if (f.e < m.gamma_min) m.gamma_min = f.e;
        m.core *= f.p;
    }
    if (m.factors.empty()) m.gamma_min = 0;
    return m;
}

// min_p v_p(q) >= 0.7*gamma and gamma >= gamma0. The 0.7 test is done as
// 10*gamma_min >= 7*gamma in integers so exact boundary cases (e.g.
// gamma_min/gamma = 7/10) are unambiguous.
inline bool is_admissible(const FactoredModulus& m, unsigned gamma0) {
    if (m.factors.empty()) return false;
    return 10ull * m.gamma_min >= 7ull * m.gamma && m.gamma >= gamma0;
}

// mu(n), Lambda(n) (stored as log p at prime powers, 0 elsewhere) and the
// smallest prime factor, for all n <= limit. mu[0] = 0 by convention; the
// Fourier-Walsh coefficient sum includes the all-zero bit vector.
struct SieveTable {
    std::uint64_t limit = 0;
    std::vector<std::int8_t> mu;
    std::vector<double> lambda_log;
    std::vector<std::uint32_t> spf;
};

inline constexpr std::uint64_t kDefaultSieveCap = 100'000'001;

// Linear (Euler) sieve. The output arrays dominate memory, so construction
// needs no extra staging; the cap bounds total allocation.
inline SieveTable build_sieve(std::uint64_t limit, std::uint64_t cap_entries = kDefaultSieveCap) {
    if (limit < 1) throw std::domain_error("build_sieve: limit must be >= 1");
    if (limit + 1 > cap_entries)
        throw resource_error("build_sieve: limit " + std::to_string(limit) +
                             " exceeds cap of " + std::to_string(cap_entries) + " entries");
    SieveTable t;
    t.limit = limit;
    t.mu.assign(limit + 1, 0);
    t.lambda_log.assign(limit + 1, 0.0);
    t.spf.assign(limit + 1, 0);
    t.mu[0] = 0;
    if (limit >= 1) {
        t.mu[1] = 1;
        t.spf[1] = 1;
    }
    std::vector<std::uint32_t> primes;
    for (std::uint64_t n = 2; n <= limit; ++n) {
        if (t.spf[n] == 0) {
            t.spf[n] = static_cast<std::uint32_t>(n);
            t.mu[n] = -1;
            primes.push_back(static_cast<std::uint32_t>(n));
        }
        for (std::uint32_t p : primes) {
            if (p > t.spf[n] || n * p > limit) break;
            t.spf[n * p] = p;
            t.mu[n * p] = (p == t.spf[n]) ? std::int8_t{0} : std::int8_t(-t.mu[n]);
        }
    }
    for (std::uint32_t p : primes) {
        const double lp = std::log(static_cast<double>(p));
        for (std::uint64_t pk = p; pk <= limit; pk *= p) {
            t.lambda_log[pk] = lp;
            if (pk > limit / p) break;
        }
    }
    return t;
}

// M(x) = sum_{n <= x} mu(n), the untwisted baseline.
inline std::int64_t mertens(std::uint64_t x, const SieveTable& t) {
    if (x > t.limit)
        throw std::range_error("mertens: x exceeds sieve limit " + std::to_string(t.limit));
    std::int64_t s = 0;
    for (std::uint64_t n = 1; n <= x; ++n) s += t.mu[n];
    return s;
}

}  // namespace powmod
