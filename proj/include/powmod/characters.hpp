#pragma once

// Dirichlet characters mod q realized against fixed generators of (Z/q)^*:
// smallest primitive root for each odd p^e, the pair {-1, 5} for 2^e with
// e >= 3. Characters are exponent tuples; evaluation goes through discrete
// log tables and exact rational phases, so chi(n) is reproducible bit for
// bit across runs and no phase drift accumulates in long sums.

#include <complex>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "powmod/arith.hpp"
#include "powmod/common.hpp"

namespace powmod {

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

// x with x = a mod m1, x = 1 mod m2 (m1, m2 coprime).
inline std::uint64_t crt_lift(std::uint64_t a, std::uint64_t m1, std::uint64_t m2) {
    if (m2 == 1) return a % m1;
    // inverse of m1 mod m2 by extended Euclid
    std::int64_t t0 = 0, t1 = 1;
    std::int64_t r0 = static_cast<std::int64_t>(m2), r1 = static_cast<std::int64_t>(m1 % m2);
    while (r1 != 0) {
        const std::int64_t qd = r0 / r1;
        std::int64_t tmp = r0 - qd * r1;
        r0 = r1;
        r1 = tmp;
        tmp = t0 - qd * t1;
        t0 = t1;
        t1 = tmp;
    }
    std::uint64_t inv = static_cast<std::uint64_t>(((t0 % static_cast<std::int64_t>(m2)) +
                                                    static_cast<std::int64_t>(m2)) %
                                                   static_cast<std::int64_t>(m2));
    const std::uint64_t m = m1 * m2;
    // k = (1 - a) * inv mod m2
    const std::uint64_t a_mod = a % m2;
    const std::uint64_t diff = (1 + m2 - a_mod) % m2;
    const std::uint64_t k = mulmod(diff, inv, m2);
    return (a % m + mulmod(m1 % m, k, m)) % m;
}

inline std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
    std::vector<std::uint64_t> ps;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
        if (n % p == 0) {
            ps.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) ps.push_back(n);
    return ps;
}

// Smallest primitive root mod p^e, p odd. A primitive root g mod p with
// g^{p-1} != 1 mod p^2 generates (Z/p^e)^* for every e.
inline std::uint64_t smallest_primitive_root(std::uint64_t p, unsigned e, std::uint64_t pp) {
    const std::uint64_t phi_p = p - 1;
    const auto qs = prime_divisors(phi_p);
    std::uint64_t g = 0;
    for (std::uint64_t c = 2; c < p; ++c) {
        bool ok = true;
        for (std::uint64_t q : qs) {
            if (powmod_u64(c, phi_p / q, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) {
            g = c;
            break;
        }
    }
    if (e == 1) return g;
    if (powmod_u64(g, phi_p, p * p) == 1) g += p;  // rare; g+p is then primitive mod p^e
    return g % pp;
}

}  // namespace detail

// One cyclic component of (Z/q)^*. For the factor 2^e with e >= 3 there are
// two slots, (-1 of order 2) then (5 of order 2^{e-2}).
struct GeneratorSlot {
    std::uint64_t prime = 0;
    std::uint64_t prime_power = 0;    // p^e this slot belongs to
    std::uint64_t local_generator = 0;
    std::uint64_t lifted_generator = 0;  // = local gen mod p^e, = 1 mod q/p^e
    std::uint64_t order = 0;
};

inline constexpr std::uint64_t kDefaultStructureCap = 1ull << 24;

class UnitGroupStructure {
  public:
    explicit UnitGroupStructure(FactoredModulus m, std::uint64_t cap = kDefaultStructureCap)
        : modulus_(std::move(m)) {
        if (modulus_.q > cap)
            throw resource_error("build_structure: q = " + std::to_string(modulus_.q) +
                                 " exceeds table cap " + std::to_string(cap));
        phi_ = 1;
        for (const auto& f : modulus_.factors) {
            FactorTables ft;
            ft.prime = f.p;
            ft.prime_power = 1;
            for (unsigned i = 0; i < f.e; ++i) ft.prime_power *= f.p;
            std::uint64_t phi_f = ft.prime_power / f.p * (f.p - 1);
            phi_ *= phi_f;
            build_factor(ft, f);
            factors_.push_back(std::move(ft));
        }
        exponent_ = 1;
        for (const auto& s : slots_) exponent_ = std::lcm(exponent_, s.order);
    }

    const FactoredModulus& modulus() const { return modulus_; }
    std::uint64_t q() const { return modulus_.q; }
    std::uint64_t phi() const { return phi_; }
    std::uint64_t group_exponent() const { return exponent_; }
    const std::vector<GeneratorSlot>& slots() const { return slots_; }

    // Per-slot discrete logs of n into out (slot_count entries), or false
    // when gcd(n, q) > 1. out must have room for slots().size() entries.
    bool dlog(std::int64_t n, std::uint32_t* out) const {
        const std::uint64_t r = reduce(n);
        std::size_t slot = 0;
        for (const auto& ft : factors_) {
            const std::uint64_t lr = r % ft.prime_power;
            if (ft.slot_count == 0) {
                if (lr % ft.prime == 0) return false;
                continue;
            }
            const std::uint32_t packed = ft.table[lr];
            if (packed == kNonUnit) return false;
            if (ft.slot_count == 1) {
                out[slot++] = packed;
            } else {
                out[slot++] = packed / static_cast<std::uint32_t>(ft.second_order);
                out[slot++] = packed % static_cast<std::uint32_t>(ft.second_order);
            }
        }
        return true;
    }

    std::uint64_t reduce(std::int64_t n) const {
        const std::int64_t q = static_cast<std::int64_t>(modulus_.q);
        std::int64_t r = n % q;
        if (r < 0) r += q;
        return static_cast<std::uint64_t>(r);
    }

  private:
    static constexpr std::uint32_t kNonUnit = 0xffffffffu;

    struct FactorTables {
        std::uint64_t prime = 0;
        std::uint64_t prime_power = 0;
        unsigned slot_count = 0;
        std::uint64_t second_order = 1;  // order of the 5-slot when slot_count == 2
        std::vector<std::uint32_t> table;
    };

    void build_factor(FactorTables& ft, const PrimePower& f) {
        const std::uint64_t pp = ft.prime_power;
        const std::uint64_t rest = modulus_.q / pp;
        ft.table.assign(pp, kNonUnit);
        if (f.p == 2) {
            if (f.e == 1) {
                ft.slot_count = 0;  // trivial group
                ft.table[1 % pp] = 0;
                return;
            }
            if (f.e == 2) {
                ft.slot_count = 1;
                ft.table[1] = 0;
                ft.table[3] = 1;
                slots_.push_back({2, pp, 3, detail::crt_lift(3, pp, rest), 2});
                return;
            }
            // e >= 3: (Z/2^e)^* = <-1> x <5>
            ft.slot_count = 2;
            const std::uint64_t ord5 = pp / 4;
            ft.second_order = ord5;
            std::uint64_t pow5 = 1;
            for (std::uint64_t b = 0; b < ord5; ++b) {
                ft.table[pow5] = static_cast<std::uint32_t>(b);
                ft.table[pp - pow5] = static_cast<std::uint32_t>(ord5 + b);
                pow5 = detail::mulmod(pow5, 5, pp);
            }
            slots_.push_back({2, pp, pp - 1, detail::crt_lift(pp - 1, pp, rest), 2});
            slots_.push_back({2, pp, 5, detail::crt_lift(5, pp, rest), ord5});
            return;
        }
        ft.slot_count = 1;
        const std::uint64_t phi_f = pp / f.p * (f.p - 1);
        const std::uint64_t g = detail::smallest_primitive_root(f.p, f.e, pp);
        std::uint64_t pw = 1;
        for (std::uint64_t k = 0; k < phi_f; ++k) {
            ft.table[pw] = static_cast<std::uint32_t>(k);
            pw = detail::mulmod(pw, g, pp);
        }
        slots_.push_back({f.p, pp, g, detail::crt_lift(g, pp, rest), phi_f});
    }

    FactoredModulus modulus_;
    std::vector<FactorTables> factors_;
    std::vector<GeneratorSlot> slots_;
    std::uint64_t phi_ = 1;
    std::uint64_t exponent_ = 1;
};

using StructurePtr = std::shared_ptr<const UnitGroupStructure>;

inline StructurePtr build_structure(FactoredModulus m, std::uint64_t cap = kDefaultStructureCap) {
    return std::make_shared<const UnitGroupStructure>(std::move(m), cap);
}

class DirichletCharacter {
  public:
    DirichletCharacter(StructurePtr s, std::vector<std::uint32_t> exponents)
        : structure_(std::move(s)), exponents_(std::move(exponents)) {
        const auto& slots = structure_->slots();
        if (exponents_.size() != slots.size())
            throw std::domain_error("DirichletCharacter: exponent tuple has wrong arity");
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (exponents_[i] >= slots[i].order)
                throw std::domain_error("DirichletCharacter: exponent out of range");
        conductor_ = compute_conductor();
    }

    const UnitGroupStructure& structure() const { return *structure_; }
    const StructurePtr& structure_ptr() const { return structure_; }
    std::uint64_t q() const { return structure_->q(); }
    const std::vector<std::uint32_t>& exponents() const { return exponents_; }
    std::uint64_t conductor() const { return conductor_; }
    bool is_primitive() const { return conductor_ == q(); }

    bool is_principal() const {
        for (auto e : exponents_)
            if (e != 0) return false;
        return true;
    }

    bool is_real() const {
        const auto& slots = structure_->slots();
        for (std::size_t i = 0; i < slots.size(); ++i)
            if ((2ull * exponents_[i]) % slots[i].order != 0) return false;
        return true;
    }

    // Largest possible slot count at the structure cap: at most 9 distinct
    // primes fit below 2^24, plus the extra slot the factor 2^e carries.
    static constexpr std::size_t kMaxSlots = 16;

    // chi(n) = e(angle) with angle an exact rational; false when chi(n) = 0.
    bool angle(std::int64_t n, std::uint64_t& num, std::uint64_t& den) const {
        std::uint32_t dl[kMaxSlots];
        if (!structure_->dlog(n, dl)) return false;
        const auto& slots = structure_->slots();
        const std::uint64_t lambda = structure_->group_exponent();
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const std::uint64_t d = slots[i].order;
            const std::uint64_t part = (static_cast<std::uint64_t>(exponents_[i]) * dl[i]) % d;
            acc = (acc + part * (lambda / d)) % lambda;
        }
        const std::uint64_t g = std::gcd(acc, lambda);
        num = acc / (g == 0 ? 1 : g);
        den = lambda / (g == 0 ? 1 : g);
        if (acc == 0) {
            num = 0;
            den = 1;
        }
        return true;
    }

    std::complex<double> evaluate(std::int64_t n) const {
        std::uint64_t num, den;
        if (!angle(n, num, den)) return {0.0, 0.0};
        return unit_phase(num, den);
    }

    std::complex<double> operator()(std::int64_t n) const { return evaluate(n); }

    DirichletCharacter conjugate() const {
        const auto& slots = structure_->slots();
        std::vector<std::uint32_t> e(exponents_);
        for (std::size_t i = 0; i < slots.size(); ++i)
            e[i] = static_cast<std::uint32_t>((slots[i].order - e[i]) % slots[i].order);
        return DirichletCharacter(structure_, std::move(e));
    }

    // Serialized as "q:e1,e2,...,ek"; stable across runs by the fixed
    // generator choice and slot ordering.
    std::string label() const {
        std::string s = std::to_string(q());
        s += ':';
        for (std::size_t i = 0; i < exponents_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(exponents_[i]);
        }
        return s;
    }

  private:
    static unsigned v2(std::uint64_t n) {
        unsigned v = 0;
        while (n % 2 == 0) {
            n /= 2;
            ++v;
        }
        return v;
    }

    // Conductor is multiplicative over the prime-power factors. For an odd
    // p^e and slot exponent a != 0 the local conductor is p^{e - v_p(a)};
    // for 2^e (e >= 3) with exponents (a, b): 2^{e - v_2(b)} when b != 0,
    // else 4 when a != 0, else 1.
    std::uint64_t compute_conductor() const {
        const auto& slots = structure_->slots();
        std::uint64_t cond = 1;
        std::size_t i = 0;
        while (i < slots.size()) {
            const auto& s = slots[i];
            if (s.prime == 2 && i + 1 < slots.size() && slots[i + 1].prime_power == s.prime_power) {
                const std::uint64_t a = exponents_[i];
                const std::uint64_t b = exponents_[i + 1];
                if (b != 0) {
                    std::uint64_t f = s.prime_power;
                    for (unsigned k = 0; k < v2(b); ++k) f /= 2;
                    cond *= f;
                } else if (a != 0) {
                    cond *= 4;
                }
                i += 2;
                continue;
            }
            const std::uint64_t a = exponents_[i];
            if (a != 0) {
                std::uint64_t f = s.prime_power;
                std::uint64_t av = a;
                while (av % s.prime == 0) {
                    f /= s.prime;
                    av /= s.prime;
                }
                cond *= f;
            }
            ++i;
        }
        return cond;
    }

    StructurePtr structure_;
    std::vector<std::uint32_t> exponents_;
    std::uint64_t conductor_ = 1;
};

inline DirichletCharacter principal_character(const StructurePtr& s) {
    return DirichletCharacter(s, std::vector<std::uint32_t>(s->slots().size(), 0));
}

// All phi(q) characters, lexicographic on exponent tuples (last slot
// fastest), principal character first.
inline std::vector<DirichletCharacter> enumerate_characters(const StructurePtr& s) {
    const auto& slots = s->slots();
    std::vector<DirichletCharacter> out;
    out.reserve(s->phi());
    std::vector<std::uint32_t> e(slots.size(), 0);
    while (true) {
        out.emplace_back(s, e);
        std::size_t i = slots.size();
        while (i > 0) {
            --i;
            if (++e[i] < slots[i].order) break;
            e[i] = 0;
            if (i == 0) return out;
        }
        if (slots.empty()) return out;
    }
}

// Character mod q agreeing with chi0 on units of q, zero elsewhere.
inline DirichletCharacter induce(const DirichletCharacter& chi0, const StructurePtr& target) {
    const std::uint64_t q0 = chi0.q();
    const std::uint64_t q = target->q();
    if (q % q0 != 0) throw std::domain_error("induce: q0 does not divide q");
    const auto& slots = target->slots();
    std::vector<std::uint32_t> e(slots.size(), 0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        std::uint64_t num, den;
        const bool unit = chi0.angle(static_cast<std::int64_t>(slots[i].lifted_generator), num, den);
        if (!unit) throw std::logic_error("induce: generator not a unit mod q0");
        if (slots[i].order % den != 0) throw std::logic_error("induce: incompatible value order");
        e[i] = static_cast<std::uint32_t>((num * (slots[i].order / den)) % slots[i].order);
    }
    return DirichletCharacter(target, std::move(e));
}

inline DirichletCharacter induce(const DirichletCharacter& chi0, const FactoredModulus& m,
                                 std::uint64_t cap = kDefaultStructureCap) {
    return induce(chi0, build_structure(m, cap));
}

}  // namespace powmod
