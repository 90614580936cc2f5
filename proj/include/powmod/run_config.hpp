#pragma once

// Run configuration: every constant the formulas leave unspecified, the
// resource caps, precision targets, output format and RNG seed. The
// canonical serialization is a sorted key=value listing with doubles at 17
// significant digits; its FNV-1a hash is embedded in every output so runs
// are attributable to an exact configuration.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "powmod/arith.hpp"
#include "powmod/bounds.hpp"
#include "powmod/characters.hpp"
#include "powmod/common.hpp"
#include "powmod/lfunc.hpp"

namespace powmod {

struct RunConfig {
    EnvelopeConfig envelope;
    std::uint64_t sieve_limit = 10'000'000;
    std::uint64_t sieve_cap = kDefaultSieveCap;
    std::uint64_t structure_cap = kDefaultStructureCap;
    std::uint64_t l_term_cap = kDefaultLTermCap;
    double target_l = 1e-8;
    double perron_step = 1e-2;
    double perron_constant = 10.0;
    std::string output_format = "csv";
    std::uint64_t seed = 20260809;

    void validate() const {
        envelope.validate();
        if (output_format != "csv" && output_format != "json")
            throw std::domain_error("RunConfig: output_format must be csv or json");
        if (sieve_limit + 1 > sieve_cap)
            throw std::domain_error("RunConfig: sieve_limit exceeds sieve_cap");
        if (!(target_l > 0.0 && perron_step > 0.0 && perron_constant > 0.0))
            throw std::domain_error("RunConfig: targets must be positive");
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string canonical_serialize(const RunConfig& c) {
    std::map<std::string, std::string> kv;
    kv["envelope.A"] = detail::fmt_double(c.envelope.A);
    kv["envelope.B"] = detail::fmt_double(c.envelope.B);
    kv["envelope.B1"] = detail::fmt_double(c.envelope.B1);
    kv["envelope.B2"] = detail::fmt_double(c.envelope.B2);
    kv["envelope.C_dyadic"] = detail::fmt_double(c.envelope.C_dyadic);
    kv["envelope.c"] = detail::fmt_double(c.envelope.c);
    kv["envelope.c0"] = detail::fmt_double(c.envelope.c0);
    kv["envelope.c1"] = detail::fmt_double(c.envelope.c1);
    kv["envelope.c2"] = detail::fmt_double(c.envelope.c2);
    kv["envelope.c_perron"] = detail::fmt_double(c.envelope.c_perron);
    kv["envelope.gamma0"] = std::to_string(c.envelope.gamma0);
    kv["envelope.xi0"] = detail::fmt_double(c.envelope.xi0);
    kv["l_term_cap"] = std::to_string(c.l_term_cap);
    kv["output_format"] = c.output_format;
    kv["perron_constant"] = detail::fmt_double(c.perron_constant);
    kv["perron_step"] = detail::fmt_double(c.perron_step);
    kv["seed"] = std::to_string(c.seed);
    kv["sieve_cap"] = std::to_string(c.sieve_cap);
    kv["sieve_limit"] = std::to_string(c.sieve_limit);
    kv["structure_cap"] = std::to_string(c.structure_cap);
    kv["target_l"] = detail::fmt_double(c.target_l);
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

inline std::string config_hash_hex(const RunConfig& c) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_serialize(c))));
    return buf;
}

// Flat key=value text, '#' comments, blank lines ignored. Unknown keys are
// rejected. c0 tracks C(C-1)^2 xi0 unless set explicitly.
inline RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    bool c0_explicit = false;
    bool xi0_or_C_changed = false;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        const auto eq = line.find('=', start);
        if (eq == std::string::npos)
            throw std::domain_error("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(start, eq - start);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string val = line.substr(eq + 1);
        const auto vstart = val.find_first_not_of(" \t");
        val = (vstart == std::string::npos) ? std::string{} : val.substr(vstart);

        auto as_d = [&] { return std::stod(val); };
        auto as_u = [&] { return static_cast<std::uint64_t>(std::stoull(val)); };
        if (key == "envelope.c") c.envelope.c = as_d();
        else if (key == "envelope.c1") c.envelope.c1 = as_d();
        else if (key == "envelope.c2") c.envelope.c2 = as_d();
        else if (key == "envelope.A") c.envelope.A = as_d();
        else if (key == "envelope.B") c.envelope.B = as_d();
        else if (key == "envelope.B1") c.envelope.B1 = as_d();
        else if (key == "envelope.B2") c.envelope.B2 = as_d();
        else if (key == "envelope.gamma0") {
            c.envelope.gamma0 = static_cast<unsigned>(as_u());
        } else if (key == "envelope.xi0") {
            c.envelope.xi0 = as_d();
            xi0_or_C_changed = true;
        } else if (key == "envelope.C_dyadic") {
            c.envelope.C_dyadic = as_d();
            xi0_or_C_changed = true;
        } else if (key == "envelope.c0") {
            c.envelope.c0 = as_d();
            c0_explicit = true;
        } else if (key == "envelope.c_perron") c.envelope.c_perron = as_d();
        else if (key == "sieve_limit") c.sieve_limit = as_u();
        else if (key == "sieve_cap") c.sieve_cap = as_u();
        else if (key == "structure_cap") c.structure_cap = as_u();
        else if (key == "l_term_cap") c.l_term_cap = as_u();
        else if (key == "target_l") c.target_l = as_d();
        else if (key == "perron_step") c.perron_step = as_d();
        else if (key == "perron_constant") c.perron_constant = as_d();
        else if (key == "output_format") c.output_format = val;
        else if (key == "seed") c.seed = as_u();
        else throw std::domain_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!c0_explicit && xi0_or_C_changed)
        c.envelope.c0 = EnvelopeConfig::derived_c0(c.envelope.C_dyadic, c.envelope.xi0);
    c.validate();
    return c;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Header stamped on every CSV/JSON output.
inline std::string output_disclaimer(const RunConfig& c) {
    return "config_hash=" + config_hash_hex(c) +
           " constants=NON-PAPER-DEFAULTS (existence constants are not quantified by the "
           "theory; values come from this configuration)";
}

}  // namespace powmod
