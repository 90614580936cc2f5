// Acceptance gate: runs every criterion and prints one pass/fail line per
// criterion. Nonzero exit iff any criterion fails.

#include <iostream>

#include "powmod/run_config.hpp"
#include "powmod/verify.hpp"

int main() {
    powmod::RunConfig cfg;
    std::cout << "acceptance suite, config " << powmod::config_hash_hex(cfg) << "\n";
    const auto results = powmod::run_acceptance(cfg, &std::cout);
    int passed = 0;
    for (const auto& r : results) passed += r.pass ? 1 : 0;
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return powmod::all_passed(results) ? 0 : 1;
}
