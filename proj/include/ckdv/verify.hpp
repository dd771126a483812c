#pragma once

// Identity suites behind the verify subcommand: one record per identity,
// aggregated over seeds and parameter sweeps, with per-identity tolerances.

#include <ckdv/dynamics.hpp>

#include <map>
#include <string>
#include <vector>

namespace ckdv {

struct VerifyRecord {
    std::string id;
    std::string anchor; // the mathematical statement being checked
    double defect = 0.0;
    double tolerance = 0.0;
    bool informational = false; // reported, never failing
    bool pass = true;
    std::string details;
};

struct VerifyOptions {
    double lambda = -1.0;
    double k = 0.5;
    GridSpec grid = make_grid(256, 40.0);
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::map<std::string, double> tolerances; // overrides keyed by record id
};

namespace detail {

inline std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

struct RecordBuilder {
    const VerifyOptions& opt;
    std::vector<VerifyRecord> out;

    void add(std::string id, std::string anchor, double defect, double default_tol,
             std::string details = "", bool informational = false) {
        double tol = default_tol;
        auto it = opt.tolerances.find(id);
        if (it != opt.tolerances.end()) tol = it->second;
        bool pass = informational || defect <= tol;
        out.push_back({std::move(id), std::move(anchor), defect, tol, informational, pass,
                       std::move(details)});
    }

    void add_skip(std::string id, std::string anchor, std::string why) {
        out.push_back({std::move(id), std::move(anchor), 0.0, 0.0, true, true, std::move(why)});
    }
};

// worst relative residual of the generating pair over the seed list; every
// pair, modified family included, must reproduce the coupled evolution
inline double bank_defect(StructureId sid, FunctionalId hid, double lambda, double k,
                          const VerifyOptions& opt) {
    StructureSpec s{sid, lambda, k};
    FunctionalSpec h{hid, lambda, k};
    SystemParams p{lambda};
    double worst = 0.0;
    for (uint64_t seed : opt.seeds) {
        FieldPair f = random_pair(opt.grid, seed);
        FieldPair flow = hamiltonian_flow(s, h, f);
        FieldPair rhs = coupled_kdv_rhs(p, f);
        worst = std::max(worst, max_norm(flow - rhs) / std::max(1.0, max_norm(rhs)));
    }
    return worst;
}

inline std::vector<double> valid_pencil_ks(double lambda, double extra) {
    std::vector<double> ks = {-1.0, 0.25, 0.4, 0.7, 2.0};
    bool seen = false;
    for (double k : ks) seen = seen || k == extra;
    if (!seen) ks.push_back(extra);
    std::vector<double> out;
    for (double k : ks)
        if (!pencil_k_excluded({lambda, k})) out.push_back(k);
    return out;
}

} // namespace detail

inline std::vector<VerifyRecord> run_identity_suite(const VerifyOptions& opt) {
    detail::RecordBuilder rb{opt, {}};
    const double lambda = opt.lambda;
    const bool has_lambda = lambda != 0.0;
    const GridSpec& g = opt.grid;
    SystemParams params{lambda};
    require_valid_pencil({lambda, opt.k}, "verify configuration");

    // ---- generating pairs -------------------------------------------------
    struct Pair {
        const char* id;
        StructureId s;
        FunctionalId h;
        bool needs_lambda;
    };
    const Pair basic_pairs[] = {
        {"hamilton-J1-H1", StructureId::J1, FunctionalId::H1, true},
        {"hamilton-J0-H2", StructureId::J0, FunctionalId::H2, false},
        {"hamilton-JM1-H1M", StructureId::JM1, FunctionalId::H1M, true},
        {"hamilton-JM0-H2M", StructureId::JM0, FunctionalId::H2M, false},
    };
    for (const Pair& p : basic_pairs) {
        std::string anchor = std::string("flow of ") + name(p.s) + " with gradient of " +
                             name(p.h) + " reproduces the evolution equations";
        if (p.needs_lambda && !has_lambda) {
            rb.add_skip(p.id, anchor, "not defined at lambda = 0");
            continue;
        }
        rb.add(p.id, anchor, detail::bank_defect(p.s, p.h, lambda, opt.k, opt), 1e-8);
    }
    for (bool modified : {false, true}) {
        std::string id = modified ? "hamilton-JkM-HkM" : "hamilton-Jk-Hk";
        double worst = 0.0, worst_k = 0.0;
        for (double k : detail::valid_pencil_ks(lambda, opt.k)) {
            double d = detail::bank_defect(modified ? StructureId::JkM : StructureId::Jk,
                                           modified ? FunctionalId::HkM : FunctionalId::Hk,
                                           lambda, k, opt);
            if (d > worst) { worst = d; worst_k = k; }
        }
        rb.add(id, "pencil flow with the matching interpolated gradient", worst, 1e-8,
               detail::fmt("worst defect at k = %.3g", worst_k));
    }

    // ---- skew-adjointness and the cyclic identity -------------------------
    const StructureId all_structures[] = {StructureId::J1, StructureId::J0, StructureId::Jk,
                                          StructureId::JM1, StructureId::JM0, StructureId::JkM};
    for (StructureId sid : all_structures) {
        bool needs_lambda = sid == StructureId::J1 || sid == StructureId::JM1;
        StructureSpec spec{sid, lambda, opt.k};
        std::string skew_id = std::string("skew-") + name(sid);
        std::string jac_id = std::string("jacobi-") + name(sid);
        if (needs_lambda && !has_lambda) {
            rb.add_skip(skew_id, "pairing antisymmetry of the operator", "not defined at lambda = 0");
            rb.add_skip(jac_id, "cyclic bracket identity of the operator", "not defined at lambda = 0");
            continue;
        }
        double worst_skew = 0.0, worst_jac = 0.0;
        for (uint64_t seed : opt.seeds) {
            FieldPair fields = random_pair(g, seed);
            FieldPair f = random_pair(g, seed + 1000);
            FieldPair h = random_pair(g, seed + 2000);
            worst_skew = std::max(worst_skew, skew_defect(spec, fields, f, h));
            worst_jac = std::max(worst_jac, jacobi_defect(spec, fields, f, h,
                                                          random_pair(g, seed + 3000)));
        }
        rb.add(skew_id, "pairing antisymmetry: <f, Jg> + <Jf, g> = 0", worst_skew, 1e-8);
        rb.add(jac_id, "cyclic sum of <f, J'[Jg] h> vanishes", worst_jac, 1e-7);
    }
    {
        // compatibility: the member sums must satisfy the cyclic identity too
        double worst_first = 0.0, worst_mod = 0.0;
        for (uint64_t seed : opt.seeds) {
            FieldPair fields = random_pair(g, seed);
            FieldPair f = random_pair(g, seed + 1000);
            FieldPair h = random_pair(g, seed + 2000);
            FieldPair w = random_pair(g, seed + 3000);
            if (has_lambda) {
                StructureSchedule sum_first = schedule({StructureId::J1, lambda, opt.k}) +
                                              schedule({StructureId::J0, lambda, opt.k});
                worst_first = std::max(worst_first, jacobi_defect(sum_first, fields, f, h, w));
                StructureSchedule sum_mod = schedule({StructureId::JM1, lambda, opt.k}) +
                                            schedule({StructureId::JM0, lambda, opt.k});
                worst_mod = std::max(worst_mod, jacobi_defect(sum_mod, fields, f, h, w));
            }
        }
        if (has_lambda) {
            rb.add("jacobi-compat-first", "sum of the two first-family members stays a bracket",
                   worst_first, 1e-7);
            rb.add("jacobi-compat-modified", "sum of the two modified members stays a bracket",
                   worst_mod, 1e-7);
        } else {
            rb.add_skip("jacobi-compat-first", "sum of the two first-family members stays a bracket",
                        "first members are not defined at lambda = 0");
            rb.add_skip("jacobi-compat-modified", "sum of the two modified members stays a bracket",
                        "first members are not defined at lambda = 0");
        }
    }

    // ---- pencil decompositions --------------------------------------------
    for (bool modified : {false, true}) {
        std::string id = modified ? "pencil-modified" : "pencil-first";
        StructureFamily fam = modified ? StructureFamily::modified : StructureFamily::first_order;
        std::string anchor = "member(k) = a member(1) + b member(0) with the closed-form weights";
        if (!has_lambda) {
            rb.add_skip(id, anchor, "first members are not defined at lambda = 0; "
                                    "see the lambda-0 basis records");
            continue;
        }
        double worst = 0.0, worst_k = 0.0;
        for (double k : detail::valid_pencil_ks(lambda, opt.k)) {
            for (uint64_t seed : opt.seeds) {
                FieldPair fields = random_pair(g, seed);
                FieldPair cov = random_pair(g, seed + 4000);
                double d = pencil_defect(fam, {lambda, k}, fields, cov);
                if (d > worst) { worst = d; worst_k = k; }
            }
        }
        rb.add(id, anchor, worst, 1e-10, detail::fmt("worst defect at k = %.3g", worst_k));
    }
    for (bool modified : {false, true}) {
        std::string id = modified ? "pencil-lambda0-basis-modified" : "pencil-lambda0-basis-first";
        StructureFamily fam = modified ? StructureFamily::modified : StructureFamily::first_order;
        double worst = 0.0;
        for (double k : detail::valid_pencil_ks(0.0, 0.5)) {
            for (uint64_t seed : opt.seeds) {
                FieldPair fields = random_pair(g, seed);
                FieldPair cov = random_pair(g, seed + 4000);
                worst = std::max(worst, pencil_defect_lambda0(fam, k, fields, cov));
            }
        }
        rb.add(id, "at lambda = 0, member(k) = c1 member(1/2) + c2 member(0)", worst, 1e-10);
    }
    {
        double gap_solved = lambda0_coefficient_gap(lambda0_equal_coefficient_weight());
        double gap_printed = lambda0_coefficient_gap(5.0 / 2.0);
        rb.add("pencil-equal-weight", "equal basis coefficients c1 = c2 solve to k = 2/5",
               gap_solved, 1e-12,
               detail::fmt("k = 2/5 gives coefficient gap %.3g; the transposed reading "
                           "k = 5/2 gives gap %.3g and is inconsistent with the basis weights",
                           gap_solved, gap_printed),
               true);
    }

    // ---- complexification at lambda = -1 ----------------------------------
    {
        double worst_holo = 0.0, worst_anti = 0.0, worst_coeff = 0.0;
        for (double k : {0.0, 0.3, 0.5, 1.0}) {
            double delta = k * k + (1.0 - k) * (1.0 - k);
            for (uint64_t seed : opt.seeds) {
                FieldPair fields = random_pair(g, seed);
                FieldPair f = random_pair(g, seed + 5000);
                ComplexificationDefect d = complexification_defect(k, fields, f);
                worst_holo = std::max(worst_holo, d.holo);
                worst_anti = std::max(worst_anti, d.anti);
                worst_coeff = std::max(worst_coeff,
                                       std::abs(d.part_diag + d.part_cross + 2.0 / delta));
            }
        }
        rb.add("complexification-holomorphic",
               "at lambda = -1 the diagonal recombination (Juu + Jvv) g vanishes", worst_holo,
               1e-10);
        rb.add("complexification-antiholomorphic",
               "(Juu - Jvv) g + 2 Juv g equals (-2/Delta) g_x", worst_anti, 1e-10);
        rb.add("complexification-coefficient",
               "recombination coefficients sum to -2/(k^2 + (1-k)^2)", worst_coeff, 1e-10);
    }

    // ---- the quadratic substitution ----------------------------------------
    {
        // the two sides are independent expression trees whose intermediate
        // products reach four times the probe bandwidth, so the probe cutoff
        // must keep 4 * cutoff below the Nyquist mode
        RandomFieldOptions ropt;
        ropt.cutoff = std::max(1, std::min(10, (g.n / 2 - 1) / 4));
        double worst = 0.0;
        for (uint64_t seed : opt.seeds)
            worst = std::max(worst, intertwining_defect(random_pair(g, seed, ropt), params));
        rb.add("miura-intertwining",
               "the substitution linearization maps the modified flow to the coupled flow",
               worst, 1e-8, detail::fmt("probe cutoff %g", ropt.cutoff));
        double worst_scalar = 0.0;
        for (uint64_t seed : opt.seeds) {
            ModifiedFieldPair m(g);
            m.u = random_band_limited(g, seed, ropt);
            worst_scalar = std::max(worst_scalar, intertwining_defect(m, params));
        }
        rb.add("miura-intertwining-scalar", "nu = 0 sector: the scalar substitution identity",
               worst_scalar, 1e-10);
    }

    // ---- gradients against central differences -----------------------------
    {
        std::vector<FunctionalSpec> specs;
        for (FunctionalId id : {FunctionalId::H2, FunctionalId::H2M, FunctionalId::MassU,
                                FunctionalId::MassV})
            specs.push_back({id, lambda, opt.k});
        if (has_lambda) {
            specs.push_back({FunctionalId::H1, lambda, opt.k});
            specs.push_back({FunctionalId::H1M, lambda, opt.k});
        }
        specs.push_back({FunctionalId::Hk, lambda, opt.k});
        specs.push_back({FunctionalId::HkM, lambda, opt.k});

        // the full finite-difference gradient is O(n) functional evaluations
        // per sample, so the oracle runs on a coarse grid
        GridSpec fg = make_grid(64, 40.0);
        double worst = 0.0;
        double min_order = 1e30;
        for (const FunctionalSpec& spec : specs) {
            for (uint64_t seed : opt.seeds) {
                RandomFieldOptions ropt;
                ropt.amplitude = 0.8;
                FieldPair f = random_pair(fg, seed, ropt);
                FieldPair grad = variational_derivative(spec, f);
                FieldPair fd1 = fd_variational_oracle(spec, f, 1e-4);
                double e1 = max_norm(grad - fd1);
                worst = std::max(worst, e1);
                double e2 = max_norm(grad - fd_variational_oracle(spec, f, 5e-5));
                // quadratic and cubic densities may sit at the rounding floor
                double order = (e2 < 1e-9) ? 2.0 : std::log2(e1 / e2);
                min_order = std::min(min_order, order);
            }
        }
        rb.add("variational-derivative-oracle",
               "closed-form gradients match the central-difference gradient", worst, 1e-6,
               "oracle grid n = 64");
        rb.add("variational-derivative-order",
               "central-difference gradient error scales as eps^2",
               std::max(0.0, 1.9 - min_order), 1e-12,
               detail::fmt("observed order >= %.3g (floor-limited cases count as 2)",
                           min_order));
    }

    // ---- field equations of the six densities -------------------------------
    for (bool modified : {false, true}) {
        std::string id = modified ? "lagrangian-residual-modified" : "lagrangian-residual-first";
        std::string anchor = modified
            ? "field equations of the modified densities vanish on the modified flow"
            : "field equations of the first-family densities vanish on the coupled flow";
        double worst = 0.0;
        std::string note;
        for (uint64_t seed : opt.seeds) {
            FieldPair f = random_pair(g, seed);
            FieldPair ft = modified ? mkdv_rhs(f, params) : coupled_kdv_rhs(params, f);
            auto upd = [&](LagrangianId lid, double k) {
                FieldPair r = euler_lagrange_residual({lid, lambda, k, true}, f, ft);
                worst = std::max(worst, max_norm(r) / std::max(1.0, max_norm(ft)));
            };
            if (has_lambda) upd(modified ? LagrangianId::L1M : LagrangianId::L1, opt.k);
            upd(modified ? LagrangianId::L2M : LagrangianId::L2, opt.k);
            for (double k : detail::valid_pencil_ks(lambda, opt.k))
                upd(modified ? LagrangianId::LkM : LagrangianId::Lk, k);
        }
        if (!has_lambda) note = "first member omitted (needs lambda != 0)";
        rb.add(id, anchor, worst, 1e-8, note);
    }
    {
        // adjudication of the quartic sign in the first modified density
        double lam = 2.0;
        FieldPair f = random_pair(g, opt.seeds.front());
        FieldPair ft = mkdv_rhs(f, SystemParams{lam});
        FieldPair r = euler_lagrange_residual({LagrangianId::L1M, lam, 0.5, false}, f, ft);
        Field predicted = (lam / 3.0) * hadamard(hadamard(f.v, f.v), deriv(f.v));
        double match = std::max(max_norm(r.u), max_norm(r.v - predicted));
        rb.add("lagrangian-printed-quartic-sign",
               "the flipped quartic sign leaves exactly a (lambda/3) nu^2 nu_x residue",
               match, 1e-8,
               detail::fmt("residue norm %.3g at lambda = 2; the sign-fixed density "
                           "(the default) has residual %.3g", max_norm(predicted),
                           max_norm(euler_lagrange_residual({LagrangianId::L1M, lam, 0.5, true},
                                                            f, ft))),
               true);
    }

    // ---- casimirs and the coupling rescale ---------------------------------
    {
        double worst = 0.0;
        for (uint64_t seed : opt.seeds) {
            FieldPair fields = random_pair(g, seed);
            for (FunctionalId mass : {FunctionalId::MassU, FunctionalId::MassV}) {
                worst = std::max(worst, casimir_defect({StructureId::J0, lambda, opt.k}, fields,
                                                       {mass, lambda, opt.k}));
                if (has_lambda)
                    worst = std::max(worst, casimir_defect({StructureId::J1, lambda, opt.k},
                                                           fields, {mass, lambda, opt.k}));
            }
        }
        rb.add("casimir-masses", "both masses annihilate the constant-coefficient structures",
               worst, 1e-8, has_lambda ? "" : "first member omitted (needs lambda != 0)");
    }
    if (has_lambda) {
        double worst = 0.0;
        for (uint64_t seed : opt.seeds) {
            FieldPair z = random_pair(g, seed);
            SystemParams sign{lambda > 0 ? 1.0 : -1.0};
            FieldPair lhs = coupled_kdv_rhs(params, mkdv_like_rescale(z, params));
            FieldPair rhs = mkdv_like_rescale(coupled_kdv_rhs(sign, z), params);
            worst = std::max(worst, max_norm(lhs - rhs) / std::max(1.0, max_norm(rhs)));
        }
        rb.add("coupling-rescale-commutes",
               "(u, v/sqrt|lambda|) intertwines the unit-coupling flow with the lambda flow",
               worst, 1e-10);
    } else {
        rb.add_skip("coupling-rescale-commutes",
                    "(u, v/sqrt|lambda|) intertwines the unit-coupling flow with the lambda flow",
                    "no rescale at lambda = 0");
    }

    return std::move(rb.out);
}

inline bool all_pass(const std::vector<VerifyRecord>& records) {
    for (const VerifyRecord& r : records)
        if (!r.pass) return false;
    return true;
}

} // namespace ckdv
