#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "powmod/characters.hpp"

using namespace powmod;
using Catch::Approx;

namespace {

StructurePtr structure_of(std::uint64_t q) {
    return build_structure(q == 1 ? FactoredModulus::one() : factor(q));
}

std::uint64_t phi_brute(std::uint64_t q) {
    std::uint64_t c = 0;
    for (std::uint64_t n = 1; n <= q; ++n)
        if (std::gcd(n, q) == 1) ++c;
    return c;
}

}  // namespace

TEST_CASE("build_structure: generators for 9, 8, 2") {
    const auto s9 = structure_of(9);
    REQUIRE(s9->slots().size() == 1);
    CHECK(s9->slots()[0].order == 6);
    CHECK(oracles::order_mod(s9->slots()[0].local_generator, 9) == 6);

    const auto s8 = structure_of(8);
    REQUIRE(s8->slots().size() == 2);
    CHECK(s8->slots()[0].local_generator == 7);  // -1 mod 8
    CHECK(s8->slots()[0].order == 2);
    CHECK(s8->slots()[1].local_generator == 5);
    CHECK(s8->slots()[1].order == 2);

    const auto s2 = structure_of(2);
    CHECK(s2->slots().empty());
    CHECK(s2->phi() == 1);
}

TEST_CASE("build_structure: slot orders multiply to phi(q)") {
    for (std::uint64_t q = 1; q <= 150; ++q) {
        const auto s = structure_of(q);
        std::uint64_t prod = 1;
        for (const auto& slot : s->slots()) prod *= slot.order;
        CHECK(prod == phi_brute(q));
        CHECK(s->phi() == phi_brute(q));
    }
}

TEST_CASE("build_structure: re-exponentiating the dlog tuple reproduces the unit") {
    for (std::uint64_t q : {7ull, 8ull, 9ull, 12ull, 24ull, 45ull, 56ull, 105ull, 128ull}) {
        const auto s = structure_of(q);
        std::uint32_t dl[16];
        for (std::uint64_t u = 1; u <= q; ++u) {
            if (std::gcd(u, q) != 1) {
                CHECK_FALSE(s->dlog(static_cast<std::int64_t>(u), dl));
                continue;
            }
            REQUIRE(s->dlog(static_cast<std::int64_t>(u), dl));
            std::uint64_t prod = 1 % q;
            for (std::size_t i = 0; i < s->slots().size(); ++i) {
                const auto& slot = s->slots()[i];
                prod = (static_cast<unsigned __int128>(prod) *
                        oracles::powmod(slot.lifted_generator, dl[i], q)) %
                       q;
            }
            CHECK(prod == u % q);
        }
    }
}

TEST_CASE("build_structure: table cap enforced") {
    CHECK_THROWS_AS(build_structure(factor(1 << 20), 1000), resource_error);
}

TEST_CASE("enumerate_characters: counts, order, distinctness") {
    CHECK(enumerate_characters(structure_of(5)).size() == 4);
    CHECK(enumerate_characters(structure_of(2)).size() == 1);

    const auto chars8 = enumerate_characters(structure_of(8));
    REQUIRE(chars8.size() == 4);
    int primitive = 0;
    for (const auto& c : chars8) primitive += c.is_primitive() ? 1 : 0;
    CHECK(primitive == 2);
    CHECK(chars8[0].is_principal());

    for (std::uint64_t q = 1; q <= 60; ++q) {
        const auto chars = enumerate_characters(structure_of(q));
        CHECK(chars.size() == phi_brute(q));
        CHECK(chars[0].is_principal());
        // pairwise distinct as value vectors
        std::set<std::string> seen;
        for (const auto& chi : chars) {
            std::string key;
            for (std::uint64_t n = 1; n <= q; ++n) {
                const auto v = chi.evaluate(static_cast<std::int64_t>(n));
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.6f %.6f;", v.real(), v.imag());
                key += buf;
            }
            CHECK(seen.insert(key).second);
        }
    }
}

TEST_CASE("enumerate_characters: deterministic labels across runs") {
    const auto a = enumerate_characters(structure_of(40));
    const auto b = enumerate_characters(structure_of(40));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].label() == b[i].label());
    CHECK(a[1].label() == "40:0,0,1");
}

TEST_CASE("evaluate: spec values") {
    const auto s5 = structure_of(5);
    CHECK(principal_character(s5).evaluate(3) == std::complex<double>(1.0, 0.0));

    for (const auto& chi : enumerate_characters(structure_of(8)))
        CHECK(chi.evaluate(6) == std::complex<double>(0.0, 0.0));

    const auto s9 = structure_of(9);
    const DirichletCharacter chi9(s9, {1});
    const auto g = s9->slots()[0].local_generator;
    const auto v = chi9.evaluate(static_cast<std::int64_t>(g));
    CHECK(v.real() == Approx(std::cos(kTwoPi / 6.0)).margin(1e-15));
    CHECK(v.imag() == Approx(std::sin(kTwoPi / 6.0)).margin(1e-15));
}

TEST_CASE("evaluate: q-periodic, multiplicative, conjugate") {
    std::mt19937_64 rng(99);
    for (std::uint64_t q : {5ull, 8ull, 9ull, 36ull, 35ull, 101ull}) {
        const auto chars = enumerate_characters(structure_of(q));
        for (const auto& chi : chars) {
            const auto conj_chi = chi.conjugate();
            for (int k = 0; k < 200; ++k) {
                const std::int64_t n = static_cast<std::int64_t>(rng() % (10 * q)) - 5 * q;
                const auto v = chi.evaluate(n);
                CHECK(std::abs(chi.evaluate(n + static_cast<std::int64_t>(q)) - v) < 1e-14);
                CHECK(std::abs(conj_chi.evaluate(n) - std::conj(v)) < 1e-14);
            }
            for (int k = 0; k < 200; ++k) {
                const std::int64_t m = 1 + static_cast<std::int64_t>(rng() % q);
                const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % q);
                CHECK(std::abs(chi.evaluate(m * n) - chi.evaluate(m) * chi.evaluate(n)) < 1e-13);
            }
        }
    }
}

TEST_CASE("evaluate: nonzero values lie on the unit circle") {
    for (const auto& chi : enumerate_characters(structure_of(63))) {
        for (std::uint64_t n = 1; n <= 63; ++n) {
            const auto v = chi.evaluate(static_cast<std::int64_t>(n));
            if (std::gcd(n, 63ull) == 1)
                CHECK(std::abs(v) == Approx(1.0).margin(1e-14));
            else
                CHECK(v == std::complex<double>(0.0, 0.0));
        }
    }
}

TEST_CASE("conductor: spec values and brute force") {
    const auto chars8 = enumerate_characters(structure_of(8));
    CHECK(chars8[0].conductor() == 1);  // principal
    // trivial on 5, nontrivial on -1: exponents (1, 0)
    const DirichletCharacter chi84(structure_of(8), {1, 0});
    CHECK(chi84.conductor() == 4);

    const DirichletCharacter chi9(structure_of(9), {1});
    CHECK(chi9.conductor() == 9);
    CHECK(chi9.is_primitive());

    // brute force: conductor is the least divisor d of q such that chi is
    // constant on units congruent mod d
    for (std::uint64_t q = 1; q <= 60; ++q) {
        for (const auto& chi : enumerate_characters(structure_of(q))) {
            std::uint64_t best = q;
            for (std::uint64_t d = 1; d <= q; ++d) {
                if (q % d != 0) continue;
                bool constant = true;
                for (std::uint64_t m = 1; m <= q && constant; ++m) {
                    if (std::gcd(m, q) != 1) continue;
                    for (std::uint64_t n = m; n <= q; n += d) {
                        if (std::gcd(n, q) != 1) continue;
                        if (std::abs(chi.evaluate(static_cast<std::int64_t>(m)) -
                                     chi.evaluate(static_cast<std::int64_t>(n))) > 1e-9) {
                            constant = false;
                            break;
                        }
                    }
                }
                if (constant) {
                    best = d;
                    break;
                }
            }
            CHECK(chi.conductor() == best);
            CHECK(q % chi.conductor() == 0);
            CHECK(chi.is_primitive() == (chi.conductor() == q));
        }
    }
}

TEST_CASE("induce: round trips and vanish pattern") {
    const auto s1 = structure_of(1);
    const auto s8 = structure_of(8);
    const auto ind = induce(principal_character(s1), s8);
    CHECK(ind.is_principal());

    const auto s4 = structure_of(4);
    const DirichletCharacter chi4(s4, {1});
    const auto up = induce(chi4, s8);
    CHECK(up.conductor() == 4);
    for (std::int64_t n = 1; n <= 16; ++n) {
        if (std::gcd<std::int64_t>(n, 8) == 1)
            CHECK(std::abs(up.evaluate(n) - chi4.evaluate(n)) < 1e-14);
        else
            CHECK(up.evaluate(n) == std::complex<double>(0.0, 0.0));
    }

    // gcd(n, q) > 1 but gcd(n, q0) = 1: induced value vanishes
    const auto s3 = structure_of(3);
    const auto s6 = structure_of(6);
    const DirichletCharacter chi3(s3, {1});
    const auto chi6 = induce(chi3, s6);
    CHECK(chi6.evaluate(2) == std::complex<double>(0.0, 0.0));
    CHECK(std::abs(chi3.evaluate(2)) == Approx(1.0));

    CHECK_THROWS_AS(induce(DirichletCharacter(structure_of(5), {1}), s8), std::domain_error);

    // every character mod q0 | q lifts and keeps its conductor
    for (std::uint64_t q0 : {3ull, 4ull, 8ull, 12ull}) {
        const auto sq = structure_of(24);
        for (const auto& chi : enumerate_characters(structure_of(q0))) {
            const auto lifted = induce(chi, sq);
            CHECK(lifted.conductor() == chi.conductor());
        }
    }
}

TEST_CASE("labels: stable serialization format") {
    CHECK(principal_character(structure_of(1)).label() == "1:");
    CHECK(principal_character(structure_of(8)).label() == "8:0,0");
    CHECK(DirichletCharacter(structure_of(9), {4}).label() == "9:4");
}

TEST_CASE("character: exponent validation") {
    CHECK_THROWS_AS(DirichletCharacter(structure_of(9), {6}), std::domain_error);
    CHECK_THROWS_AS(DirichletCharacter(structure_of(9), {1, 0}), std::domain_error);
}
