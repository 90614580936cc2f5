#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "powmod/run_config.hpp"
#include "powmod/sieve_cache.hpp"

using namespace powmod;

TEST_CASE("canonical serialization: stable form and frozen default hash") {
    const RunConfig def;
    const std::string s1 = canonical_serialize(def);
    const std::string s2 = canonical_serialize(RunConfig{});
    CHECK(s1 == s2);
    // frozen: changing the canonical form or any default is a breaking
    // change for recorded outputs
    CHECK(config_hash_hex(def) == "10c401544a652c71");
    CHECK(output_disclaimer(def).find("10c401544a652c71") != std::string::npos);
    CHECK(output_disclaimer(def).find("NON-PAPER") != std::string::npos);
}

TEST_CASE("config parsing: round trip, overrides, derived c0") {
    const std::string text =
        "# comment line\n"
        "envelope.c = 2.5\n"
        "sieve_limit = 1000\n"
        "seed=42   # trailing comment\n"
        "\n"
        "output_format=json\n";
    const RunConfig c = parse_config_text(text);
    CHECK(c.envelope.c == 2.5);
    CHECK(c.sieve_limit == 1000);
    CHECK(c.seed == 42);
    CHECK(c.output_format == "json");

    // round trip through the canonical form
    const RunConfig back = parse_config_text(canonical_serialize(c));
    CHECK(canonical_serialize(back) == canonical_serialize(c));
    CHECK(config_hash_hex(back) == config_hash_hex(c));

    // c0 tracks xi0 unless pinned explicitly
    const RunConfig cx = parse_config_text("envelope.xi0 = 1e-6\n");
    CHECK(cx.envelope.c0 == EnvelopeConfig::derived_c0(1001.0, 1e-6));
    const RunConfig cp = parse_config_text("envelope.xi0 = 1e-6\nenvelope.c0 = 7.0\n");
    CHECK(cp.envelope.c0 == 7.0);

    CHECK_THROWS_AS(parse_config_text("nonsense_key = 3\n"), std::domain_error);
    CHECK_THROWS_AS(parse_config_text("envelope.c\n"), std::domain_error);
    CHECK_THROWS_AS(parse_config_text("output_format = xml\n"), std::domain_error);
    CHECK_THROWS_AS(parse_config_text("envelope.c_perron = 0.7\n"), std::domain_error);
}

TEST_CASE("17-digit doubles round-trip through the CSV format") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1'000; ++k) {
        const double v = u(rng) * std::pow(10.0, int(rng() % 20) - 10);
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        CHECK(std::strtod(buf, nullptr) == v);
    }
}

TEST_CASE("sieve cache: round trip and header validation") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "powmod_cache_test";
    fs::create_directories(dir);

    const auto t = build_sieve(5'000);
    const std::string path = sieve_cache_path(dir.string(), t.limit);
    REQUIRE(write_sieve_cache(path, t));

    // header layout: magic, version, limit
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "PMSV");
    std::uint32_t ver;
    std::uint64_t lim;
    in.read(reinterpret_cast<char*>(&ver), 4);
    in.read(reinterpret_cast<char*>(&lim), 8);
    CHECK(ver == 1);
    CHECK(lim == 5'000);
    in.close();

    const auto back = read_sieve_cache(path);
    REQUIRE(back.has_value());
    CHECK(back->limit == t.limit);
    CHECK(back->mu == t.mu);
    CHECK(back->spf == t.spf);
    CHECK(back->lambda_log == t.lambda_log);

    // cached_sieve: build+save then load
    fs::remove(path);
    const auto first = cached_sieve(5'000, dir.string());
    CHECK(fs::exists(path));
    const auto second = cached_sieve(5'000, dir.string());
    CHECK(second.mu == first.mu);

    // corrupted magic is rejected
    {
        std::ofstream out(path, std::ios::binary | std::ios::in);
        out.seekp(0);
        out.write("XXXX", 4);
    }
    CHECK_FALSE(read_sieve_cache(path).has_value());

    fs::remove_all(dir);
}

TEST_CASE("RunConfig validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.sieve_limit = c.sieve_cap + 5;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
    c = RunConfig{};
    c.output_format = "yaml";
    CHECK_THROWS_AS(c.validate(), std::domain_error);
}
