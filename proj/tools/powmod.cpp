// powmod: command-line harness over the library. Subcommands:
//
//   sums        twisted sums M(x,chi), psi(x,chi), S_q(x,a), D_q(x,a),
//               Fourier-Walsh coefficients and Dirichlet polynomials,
//               emitted as CSV rows kind,q,character_label_or_a,x,re,im,abs,normalized
//   envelopes   beta(alpha) tables or E1/E2 envelope sweeps with the
//               Perron case/T selector
//   scan-zeros  |L| grid scan with Newton refinement, JSON report
//   perron      Perron reconstruction of psi(x,chi) or M(x,chi), JSON
//   verify      the acceptance suite; exit 0 iff every criterion passes
//
// Every output embeds the config hash and a reminder that the formula
// constants are non-paper defaults. POWMOD_SIEVE_CACHE names a directory
// for cached sieve tables.
//
// Exit codes: 0 ok, 2 argument/domain errors, 3 resource errors, 1 other.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "powmod/arith.hpp"
#include "powmod/bounds.hpp"
#include "powmod/characters.hpp"
#include "powmod/common.hpp"
#include "powmod/lfunc.hpp"
#include "powmod/run_config.hpp"
#include "powmod/sieve_cache.hpp"
#include "powmod/sums.hpp"
#include "powmod/verify.hpp"

namespace {

using nlohmann::json;
using namespace powmod;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::uint32_t> parse_exponents(const std::string& s) {
    std::vector<std::uint32_t> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

DirichletCharacter select_character(const StructurePtr& s, const std::string& exps) {
    if (exps.empty()) return principal_character(s);
    return DirichletCharacter(s, parse_exponents(exps));
}

std::string cache_dir_from_env() {
    const char* dir = std::getenv("POWMOD_SIEVE_CACHE");
    return dir ? std::string(dir) : std::string();
}

struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file = std::make_unique<std::ofstream>(path);
            if (!*file) throw std::domain_error("cannot open output file: " + path);
            os = file.get();
        }
    }
    std::ostream& stream() { return *os; }
};

void csv_header(std::ostream& os, const RunConfig& cfg, const std::string& what,
                const std::string& columns) {
    os << "# powmod " << what << "\n";
    os << "# " << output_disclaimer(cfg) << "\n";
    os << columns << "\n";
}

json json_envelope(const RunConfig& cfg) {
    json j;
    j["config_hash"] = config_hash_hex(cfg);
    j["constants"] = "NON-PAPER-DEFAULTS";
    return j;
}

// ---------------------------------------------------------------------------

struct SumsArgs {
    std::string kind = "mobius";
    std::uint64_t q = 1;
    double x = 0.0;
    std::string x_grid;
    std::string character;
    std::int64_t a = 0;
    std::string a_mask = "0x0";
    unsigned walsh_n = 3;
    bool want_max = false;
    double poly_M = 0.0, poly_N = 1.0, poly_t = 0.0;
    std::uint64_t sieve_limit_override = 0;
};

int run_sums(const RunConfig& cfg, const SumsArgs& a, Output& out) {
    std::vector<double> xs;
    if (!a.x_grid.empty())
        xs = parse_grid(a.x_grid);
    else if (a.x > 0.0)
        xs.push_back(a.x);

    auto& os = out.stream();
    csv_header(os, cfg, "sums --kind " + a.kind, "kind,q,character_label_or_a,x,re,im,abs,normalized");
    auto row = [&](const std::string& kind, std::uint64_t q, const std::string& label, double x,
                   std::complex<double> v) {
        const double av = std::abs(v);
        os << kind << ',' << q << ',' << label << ',' << fmt(x) << ',' << fmt(v.real()) << ','
           << fmt(v.imag()) << ',' << fmt(av) << ',' << fmt(x > 0 ? av / x : 0.0) << "\n";
    };

    if (a.kind == "walsh") {
        const std::uint64_t mask = std::stoull(a.a_mask, nullptr, 0);
        const std::uint64_t need = (1ull << a.walsh_n) - 1;
        const SieveTable t = cached_sieve(need, cache_dir_from_env(), cfg.sieve_cap);
        const auto v = walsh_coefficient(a.walsh_n, mask, t);
        char hexbuf[24];
        std::snprintf(hexbuf, sizeof hexbuf, "0x%llx", static_cast<unsigned long long>(mask));
        row("walsh", a.walsh_n, hexbuf, static_cast<double>(need),
            {static_cast<double>(v), 0.0});
        return 0;
    }
    if (a.kind == "dirichlet-poly") {
        const auto s = build_structure(factored(a.q), cfg.structure_cap);
        const auto chi = select_character(s, a.character);
        const auto v = dirichlet_poly(a.poly_M, a.poly_N, a.poly_t, chi);
        const double av = std::abs(v);
        os << "dirichlet-poly," << a.q << ',' << chi.label() << ',' << fmt(a.poly_N) << ','
           << fmt(v.real()) << ',' << fmt(v.imag()) << ',' << fmt(av) << ','
           << fmt(av / a.poly_N) << "\n";
        return 0;
    }

    if (xs.empty()) throw std::domain_error("sums: need --x or --x-grid");
    double xmax = 0.0;
    for (double x : xs) xmax = std::max(xmax, x);
    const auto limit = a.sieve_limit_override
                           ? a.sieve_limit_override
                           : static_cast<std::uint64_t>(std::floor(xmax));
    const SieveTable t = cached_sieve(std::max<std::uint64_t>(limit, 1), cache_dir_from_env(),
                                      cfg.sieve_cap);

    for (double x : xs) {
        if (a.kind == "mobius" || a.kind == "psi") {
            const SumKind k = (a.kind == "psi") ? SumKind::Psi : SumKind::Mobius;
            if (a.want_max) {
                const auto mx = max_over_characters(x, factored(a.q), k, t, cfg.structure_cap);
                row(a.kind + "-max", a.q, mx.argmax_label, x, {mx.value, 0.0});
            } else {
                const auto s = build_structure(factored(a.q), cfg.structure_cap);
                const auto chi = select_character(s, a.character);
                const auto r = (k == SumKind::Psi) ? psi_sum(x, chi, t) : mobius_sum(x, chi, t);
                row(a.kind, a.q, r.character_label, x, r.value);
            }
        } else if (a.kind == "exp") {
            if (a.want_max) {
                const auto mx = max_exp_sum(x, a.q, t);
                row("exp-max", a.q, mx.argmax_label, x, {mx.value, 0.0});
            } else {
                row("exp", a.q, std::to_string(a.a), x, exp_sum(x, a.q, a.a, t));
            }
        } else if (a.kind == "progression") {
            if (a.want_max) {
                const auto mx = max_progression_sum(x, a.q, t);
                row("progression-max", a.q, mx.argmax_label, x, {mx.value, 0.0});
            } else {
                row("progression", a.q, std::to_string(a.a), x,
                    {static_cast<double>(progression_sum(x, a.q, a.a, t)), 0.0});
            }
        } else {
            throw std::domain_error("sums: unknown kind '" + a.kind + "'");
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct EnvelopesArgs {
    bool beta_table = false;
    std::size_t grid = 1000;
    double alpha_max = 2.0;
    double q = 0.0;
    std::string x_grid;
};

int run_envelopes(const RunConfig& cfg, const EnvelopesArgs& a, Output& out) {
    auto& os = out.stream();
    if (a.beta_table) {
        csv_header(os, cfg, "envelopes --beta", "alpha,beta");
        // grid rows plus the breakpoints and named roots, in sorted order
        std::vector<double> alphas;
        alphas.reserve(a.grid + 5);
        for (std::size_t k = 1; k <= a.grid; ++k)
            alphas.push_back(a.alpha_max * static_cast<double>(k) / static_cast<double>(a.grid));
        for (double sp : {1.0 / 7.0, 3.0 / 7.0, 3.0 / 5.0, 9.0 / 14.0, 3.0 / 4.0})
            alphas.push_back(sp);
        std::sort(alphas.begin(), alphas.end());
        alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
        for (double alpha : alphas) os << fmt(alpha) << ',' << fmt(beta(alpha)) << "\n";
        return 0;
    }
    if (!(a.q >= 3.0) || a.x_grid.empty())
        throw std::domain_error("envelopes: need --beta, or --q >= 3 with --x-grid");
    csv_header(os, cfg, "envelopes --q " + fmt(a.q), "x,q,E1,E2,case,T");
    // full configuration in the header, per the interface contract
    {
        std::istringstream conf(canonical_serialize(cfg));
        std::string line;
        while (std::getline(conf, line)) os << "# " << line << "\n";
    }
    for (double x : parse_grid(a.x_grid)) {
        const double e1 = envelope_E(1, x, a.q, cfg.envelope);
        const double e2 = envelope_E(2, x, a.q, cfg.envelope);
        const auto pc = perron_T_select(x, a.q, cfg.envelope);
        os << fmt(x) << ',' << fmt(a.q) << ',' << fmt(e1) << ',' << fmt(e2) << ','
           << pc.case_index << ',' << fmt(pc.T) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct ScanArgs {
    std::uint64_t q = 3;
    std::string character = "1";
    double sigma_min = 0.9, sigma_max = 1.1, t_min = -5.0, t_max = 5.0;
    std::size_t grid_sigma = 50, grid_t = 200;
    double refine_tol = 1e-8;
};

int run_scan(const RunConfig& cfg, const ScanArgs& a, Output& out) {
    const auto s = build_structure(factored(a.q), cfg.structure_cap);
    const auto chi = select_character(s, a.character);
    const auto rep = zero_scan(chi, {a.sigma_min, a.sigma_max, a.t_min, a.t_max},
                               {a.grid_sigma, a.grid_t}, a.refine_tol, cfg.envelope);
    json j = json_envelope(cfg);
    j["character"] = chi.label();
    j["rectangle"] = {{"sigma_min", rep.rectangle.sigma_min},
                      {"sigma_max", rep.rectangle.sigma_max},
                      {"t_min", rep.rectangle.t_min},
                      {"t_max", rep.rectangle.t_max}};
    j["grid"] = {rep.grid.n_sigma, rep.grid.n_t};
    j["min_abs_L"] = rep.min_abs_L;
    j["argmin"] = {{"sigma", rep.argmin.sigma}, {"t", rep.argmin.t}};
    j["zeros"] = json::array();
    for (const auto& z : rep.zeros)
        j["zeros"].push_back(
            {{"sigma", z.location.sigma}, {"t", z.location.t}, {"abs_L", z.abs_L}});
    j["vartheta_used"] = rep.vartheta_used;
    j["evaluations"] = rep.evaluations;
    j["failed_points"] = rep.failed_points;
    out.stream() << j.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct PerronArgs {
    std::string kind = "psi";
    double x = 50.0;
    std::uint64_t q = 1;
    std::string character;
    double T = 500.0;
    double step = 0.0;
};

int run_perron(const RunConfig& cfg, const PerronArgs& a, Output& out) {
    const auto s = build_structure(factored(a.q), cfg.structure_cap);
    const auto chi = select_character(s, a.character);
    const SieveTable t = cached_sieve(static_cast<std::uint64_t>(std::floor(a.x)),
                                      cache_dir_from_env(), cfg.sieve_cap);
    const SumKind kind = (a.kind == "psi") ? SumKind::Psi : SumKind::Mobius;
    if (a.kind != "psi" && a.kind != "mobius")
        throw std::domain_error("perron: kind must be psi or mobius");
    const double step = (a.step > 0.0) ? a.step : cfg.perron_step;
    const auto p = perron_reconstruct(kind, a.x, chi, a.T, step, t, cfg.perron_constant,
                                      cfg.l_term_cap);
    json j = json_envelope(cfg);
    j["kind"] = a.kind;
    j["x"] = a.x;
    j["q"] = a.q;
    j["character"] = chi.label();
    j["T"] = a.T;
    j["step"] = step;
    j["sigma0"] = p.sigma0;
    j["nodes"] = p.nodes;
    j["integral"] = {{"re", p.integral_value.real()}, {"im", p.integral_value.imag()}};
    j["direct"] = {{"re", p.direct_value.real()}, {"im", p.direct_value.imag()}};
    j["discrepancy"] = p.discrepancy;
    j["r_bound"] = p.r_bound;
    j["within_bound"] = p.discrepancy < p.r_bound;
    out.stream() << j.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int run_verify(const RunConfig& cfg, Output& out) {
    auto& os = out.stream();
    os << "# powmod verify\n# " << output_disclaimer(cfg) << "\n";
    const auto results = run_acceptance(cfg, &os);
    int passed = 0;
    for (const auto& r : results) passed += r.pass ? 1 : 0;
    os << passed << "/" << results.size() << " criteria passed\n";
    return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"computational laboratory for Mobius sums twisted by characters of powerful "
                 "moduli, their L-functions and bound envelopes"};
    app.require_subcommand(1);

    std::string config_path, out_path, format_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "flat key=value configuration file");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--format", format_override, "csv or json (where applicable)");
    app.add_option("--seed", seed_override, "seed for randomized checks")
        ->each([&](const std::string&) { seed_set = true; });

    SumsArgs sums;
    auto* cmd_sums = app.add_subcommand("sums", "twisted sums");
    cmd_sums->add_option("--kind", sums.kind,
                         "mobius|psi|exp|progression|walsh|dirichlet-poly");
    cmd_sums->add_option("--q", sums.q, "modulus");
    cmd_sums->add_option("--x", sums.x, "cutoff");
    cmd_sums->add_option("--x-grid", sums.x_grid, "comma-separated cutoffs");
    cmd_sums->add_option("--character", sums.character, "exponent tuple e1,e2,...");
    cmd_sums->add_option("--a", sums.a, "residue/frequency for exp and progression");
    cmd_sums->add_option("--A", sums.a_mask, "Walsh subset mask (hex or decimal)");
    cmd_sums->add_option("--n", sums.walsh_n, "Walsh bit count");
    cmd_sums->add_flag("--max", sums.want_max, "maximum over characters/residues");
    cmd_sums->add_option("--M", sums.poly_M, "Dirichlet polynomial M");
    cmd_sums->add_option("--N", sums.poly_N, "Dirichlet polynomial N");
    cmd_sums->add_option("--t", sums.poly_t, "Dirichlet polynomial t");
    cmd_sums->add_option("--sieve-limit", sums.sieve_limit_override, "sieve size override");

    EnvelopesArgs env;
    auto* cmd_env = app.add_subcommand("envelopes", "beta table / envelope sweep");
    cmd_env->add_flag("--beta", env.beta_table, "emit alpha,beta table");
    cmd_env->add_option("--grid", env.grid, "grid size");
    cmd_env->add_option("--alpha-max", env.alpha_max, "right end of the alpha grid");
    cmd_env->add_option("--q", env.q, "modulus (real) for the envelope sweep");
    cmd_env->add_option("--x-grid", env.x_grid, "comma-separated x values");

    ScanArgs scan;
    auto* cmd_scan = app.add_subcommand("scan-zeros", "|L| grid scan with refinement");
    cmd_scan->add_option("--q", scan.q, "modulus");
    cmd_scan->add_option("--character", scan.character, "exponent tuple");
    cmd_scan->add_option("--sigma-min", scan.sigma_min);
    cmd_scan->add_option("--sigma-max", scan.sigma_max);
    cmd_scan->add_option("--t-min", scan.t_min);
    cmd_scan->add_option("--t-max", scan.t_max);
    cmd_scan->add_option("--grid-sigma", scan.grid_sigma);
    cmd_scan->add_option("--grid-t", scan.grid_t);
    cmd_scan->add_option("--refine-tol", scan.refine_tol);

    PerronArgs per;
    auto* cmd_per = app.add_subcommand("perron", "Perron reconstruction");
    cmd_per->add_option("--kind", per.kind, "psi|mobius");
    cmd_per->add_option("--x", per.x, "cutoff");
    cmd_per->add_option("--q", per.q, "modulus");
    cmd_per->add_option("--character", per.character, "exponent tuple");
    cmd_per->add_option("--T", per.T, "integration height");
    cmd_per->add_option("--step", per.step, "quadrature step");

    auto* cmd_verify = app.add_subcommand("verify", "run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
        if (!format_override.empty()) cfg.output_format = format_override;
        if (seed_set) cfg.seed = seed_override;
        cfg.validate();
        Output out(out_path);
        if (cmd_sums->parsed()) return run_sums(cfg, sums, out);
        if (cmd_env->parsed()) return run_envelopes(cfg, env, out);
        if (cmd_scan->parsed()) return run_scan(cfg, scan, out);
        if (cmd_per->parsed()) return run_perron(cfg, per, out);
        if (cmd_verify->parsed()) return run_verify(cfg, out);
        return 2;
    } catch (const powmod::resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::range_error& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
