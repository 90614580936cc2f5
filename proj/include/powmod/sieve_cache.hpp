#pragma once

// Sieve cache files: 16-byte header (magic "PMSV", version u32, limit u64,
// all little-endian), then the raw arrays in order mu (int8, limit+1
// entries), spf (u32), lambda_log (IEEE f64). The POWMOD_SIEVE_CACHE
// environment variable points the CLI at a cache directory.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>

#include "powmod/arith.hpp"

namespace powmod {

static_assert(std::endian::native == std::endian::little,
              "sieve cache files are little-endian raw dumps");

inline constexpr char kSieveMagic[4] = {'P', 'M', 'S', 'V'};
inline constexpr std::uint32_t kSieveVersion = 1;

inline std::string sieve_cache_path(const std::string& dir, std::uint64_t limit) {
    return dir + "/sieve_" + std::to_string(limit) + ".pmsv";
}

inline bool write_sieve_cache(const std::string& path, const SieveTable& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(kSieveMagic, 4);
    const std::uint32_t ver = kSieveVersion;
    out.write(reinterpret_cast<const char*>(&ver), sizeof ver);
    out.write(reinterpret_cast<const char*>(&t.limit), sizeof t.limit);
    const std::streamsize n = static_cast<std::streamsize>(t.limit + 1);
    out.write(reinterpret_cast<const char*>(t.mu.data()), n);
    out.write(reinterpret_cast<const char*>(t.spf.data()), n * 4);
    out.write(reinterpret_cast<const char*>(t.lambda_log.data()), n * 8);
    return static_cast<bool>(out);
}

inline std::optional<SieveTable> read_sieve_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    std::uint32_t ver = 0;
    std::uint64_t limit = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&ver), sizeof ver);
    in.read(reinterpret_cast<char*>(&limit), sizeof limit);
    if (!in || std::memcmp(magic, kSieveMagic, 4) != 0 || ver != kSieveVersion)
        return std::nullopt;
    SieveTable t;
    t.limit = limit;
    t.mu.resize(limit + 1);
    t.spf.resize(limit + 1);
    t.lambda_log.resize(limit + 1);
    const std::streamsize n = static_cast<std::streamsize>(limit + 1);
    in.read(reinterpret_cast<char*>(t.mu.data()), n);
    in.read(reinterpret_cast<char*>(t.spf.data()), n * 4);
    in.read(reinterpret_cast<char*>(t.lambda_log.data()), n * 8);
    if (!in) return std::nullopt;
    return t;
}

// Build the table, going through the cache directory when one is given.
inline SieveTable cached_sieve(std::uint64_t limit, const std::string& cache_dir,
                               std::uint64_t cap_entries = kDefaultSieveCap) {
    if (!cache_dir.empty()) {
        const std::string path = sieve_cache_path(cache_dir, limit);
        if (auto t = read_sieve_cache(path); t && t->limit == limit) return std::move(*t);
        SieveTable t = build_sieve(limit, cap_entries);
        write_sieve_cache(path, t);  // best effort; failure to cache is not an error
        return t;
    }
    return build_sieve(limit, cap_entries);
}

}  // namespace powmod
