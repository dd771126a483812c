#pragma once

// Command line front end.  Exit codes: 0 all checks pass, 1 a check failed,
// 2 configuration error, 3 the instability detector fired.

#include <ckdv/dirac.hpp>
#include <ckdv/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace ckdv {
namespace cli {

using ordered_json = nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_config_error = 2;
constexpr int exit_blow_up = 3;

namespace detail {

inline std::string d17(double x) {
    char b[48];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

inline std::string sci(double x) {
    char b[48];
    std::snprintf(b, sizeof b, "%.3e", x);
    return b;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
}

inline void write_json(const std::filesystem::path& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline std::map<std::string, double> parse_tolerances(const std::vector<std::string>& kv) {
    std::map<std::string, double> out;
    for (const std::string& s : kv) {
        size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("tolerance overrides use name=value, got '" + s + "'");
        char* end = nullptr;
        double v = std::strtod(s.c_str() + eq + 1, &end);
        if (end == s.c_str() + eq + 1 || *end != '\0' || !(v >= 0.0))
            throw std::invalid_argument("tolerance value in '" + s + "' is not a number >= 0");
        out[s.substr(0, eq)] = v;
    }
    return out;
}

inline double tol_or(const std::map<std::string, double>& tols, const std::string& key,
                     double fallback) {
    auto it = tols.find(key);
    return it == tols.end() ? fallback : it->second;
}

} // namespace detail

// options shared by every subcommand
struct CommonOpts {
    double lambda = -1.0;
    double k = 0.5;
    int n = 256;
    double length = 40.0;
    std::vector<uint64_t> seeds;
    std::vector<std::string> tol_kv;
    std::string out_dir = ".";
    unsigned jobs = 1;

    std::vector<uint64_t> seeds_or(std::initializer_list<uint64_t> fallback) const {
        return seeds.empty() ? std::vector<uint64_t>(fallback) : seeds;
    }
    std::map<std::string, double> tolerances() const { return detail::parse_tolerances(tol_kv); }
};

inline void add_common_options(CLI::App* cmd, CommonOpts& c) {
    cmd->fallthrough(); // allow parent-level flags like --config after the subcommand
    cmd->add_option("--lambda", c.lambda, "coupling parameter");
    cmd->add_option("--k", c.k, "pencil interpolation weight");
    cmd->add_option("--n", c.n, "grid sample count")->check(CLI::PositiveNumber);
    cmd->add_option("--length", c.length, "periodic box length")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seeds, "random seeds (repeatable)");
    cmd->add_option("--tol", c.tol_kv, "tolerance override name=value (repeatable)");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--jobs", c.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------
// verify

inline ordered_json verify_report_json(const VerifyOptions& opt,
                                       const std::vector<VerifyRecord>& records) {
    ordered_json j;
    j["schema"] = "ckdv-verify/1";
    j["config"] = {{"lambda", opt.lambda},
                   {"k", opt.k},
                   {"n", opt.grid.n},
                   {"length", opt.grid.length},
                   {"seeds", opt.seeds}};
    ordered_json arr = ordered_json::array();
    for (const VerifyRecord& r : records) {
        arr.push_back({{"id", r.id},
                       {"anchor", r.anchor},
                       {"defect", r.defect},
                       {"tolerance", r.tolerance},
                       {"informational", r.informational},
                       {"pass", r.pass},
                       {"details", r.details}});
    }
    j["records"] = std::move(arr);
    j["pass"] = all_pass(records);
    return j;
}

inline void print_verify_records(const std::vector<VerifyRecord>& records) {
    int failures = 0;
    for (const VerifyRecord& r : records) {
        if (!r.pass) ++failures;
        std::printf("%-4s  %-34s defect %s  tol %s%s%s%s\n", r.pass ? "pass" : "FAIL",
                    r.id.c_str(), detail::sci(r.defect).c_str(), detail::sci(r.tolerance).c_str(),
                    r.informational ? "  [informational]" : "", r.details.empty() ? "" : "  ",
                    r.details.c_str());
    }
    if (failures)
        std::printf("verify: FAIL (%d of %zu records)\n", failures, records.size());
    else
        std::printf("verify: PASS (%zu records)\n", records.size());
}

inline int cmd_verify(const CommonOpts& c) {
    VerifyOptions opt;
    opt.lambda = c.lambda;
    opt.k = c.k;
    opt.grid = make_grid(c.n, c.length);
    opt.seeds = c.seeds_or({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    opt.tolerances = c.tolerances();

    std::vector<VerifyRecord> records = run_identity_suite(opt);
    detail::write_json(std::filesystem::path(c.out_dir) / "verify.json",
                       verify_report_json(opt, records));
    print_verify_records(records);
    return all_pass(records) ? exit_ok : exit_check_failed;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
    std::string flow = "kdv";        // kdv | mkdv
    std::string initial = "soliton"; // soliton | random
    std::string scheme = "if-rk4";   // rk4 | if-rk4
    std::string format = "csv";      // csv | binary
    double c = 1.0;
    double x0 = 0.0;
    double amplitude = 0.3;
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshots = 200;
    bool no_dealias = false;
};

inline void add_simulate_options(CLI::App* cmd, SimulateOpts& s) {
    cmd->add_option("--flow", s.flow, "which evolution to run")
        ->check(CLI::IsMember({"kdv", "mkdv"}));
    cmd->add_option("--initial", s.initial, "initial data family")
        ->check(CLI::IsMember({"soliton", "random"}));
    cmd->add_option("--scheme", s.scheme, "time stepper")
        ->check(CLI::IsMember({"rk4", "if-rk4"}));
    cmd->add_option("--c", s.c, "solitary wave speed");
    cmd->add_option("--x0", s.x0, "solitary wave center");
    cmd->add_option("--amplitude", s.amplitude, "random initial data amplitude");
    cmd->add_option("--dt", s.dt, "time step");
    cmd->add_option("--t-end", s.t_end, "final time");
    cmd->add_option("--snapshots", s.snapshots, "max stored snapshots");
    cmd->add_flag("--no-dealias", s.no_dealias, "disable the 2/3-rule mask");
    cmd->add_option("--format", s.format, "trajectory file format")
        ->check(CLI::IsMember({"csv", "binary"}));
}

inline std::vector<FunctionalSpec> simulate_monitors(FlowKind flow, double lambda, double k) {
    std::vector<FunctionalSpec> m;
    bool has_lambda = lambda != 0.0;
    bool k_valid = !pencil_k_excluded({lambda, k});
    if (flow == FlowKind::kdv) {
        if (has_lambda) m.push_back({FunctionalId::H1, lambda, k});
        m.push_back({FunctionalId::H2, lambda, k});
        if (k_valid) m.push_back({FunctionalId::Hk, lambda, k});
    } else {
        if (has_lambda) m.push_back({FunctionalId::H1M, lambda, k});
        m.push_back({FunctionalId::H2M, lambda, k});
        if (k_valid) m.push_back({FunctionalId::HkM, lambda, k});
    }
    m.push_back({FunctionalId::MassU, lambda, k});
    m.push_back({FunctionalId::MassV, lambda, k});
    return m;
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::string body = "t,x,u,v\n";
    const GridSpec& g = traj.snapshots.front().grid();
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        const FieldPair& f = traj.snapshots[s];
        for (int j = 0; j < g.n; ++j) {
            body += detail::d17(traj.times[s]);
            body += ',';
            body += detail::d17(g.node(j));
            body += ',';
            body += detail::d17(f.u[j]);
            body += ',';
            body += detail::d17(f.v[j]);
            body += '\n';
        }
    }
    return body;
}

// one field snapshot file per component per stored time, in the grid module's
// binary layout, plus a csv index mapping snapshot times to file names
inline void write_trajectory_snapshots(const std::filesystem::path& dir, const Trajectory& traj) {
    std::filesystem::create_directories(dir);
    std::string index = "i,t,u_file,v_file\n";
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        char ub[32], vb[32];
        std::snprintf(ub, sizeof ub, "u_%06zu.bin", s);
        std::snprintf(vb, sizeof vb, "v_%06zu.bin", s);
        write_snapshot(traj.snapshots[s].u, (dir / ub).string());
        write_snapshot(traj.snapshots[s].v, (dir / vb).string());
        index += std::to_string(s) + "," + detail::d17(traj.times[s]) + "," + ub + "," + vb + "\n";
    }
    detail::write_text(dir / "index.csv", index);
}

inline std::string conservation_csv(const ConservationReport& rep) {
    std::string body = "t";
    for (const std::string& n : rep.names) body += "," + n;
    body += '\n';
    for (size_t i = 0; i < rep.times.size(); ++i) {
        body += detail::d17(rep.times[i]);
        for (const auto& row : rep.series) body += "," + detail::d17(row[i]);
        body += '\n';
    }
    return body;
}

inline int cmd_simulate(const CommonOpts& c, const SimulateOpts& s) {
    auto t_start = std::chrono::steady_clock::now();
    GridSpec g = make_grid(c.n, c.length);
    SystemParams params{c.lambda};
    FlowKind flow = s.flow == "kdv" ? FlowKind::kdv : FlowKind::mkdv;
    uint64_t seed = c.seeds_or({1}).front();

    FieldPair initial(g);
    if (s.initial == "soliton") {
        initial = soliton_initial(s.c, s.x0, g);
    } else {
        RandomFieldOptions ropt;
        ropt.amplitude = s.amplitude;
        initial = random_pair(g, seed, ropt);
    }

    IntegratorConfig config;
    config.dt = s.dt;
    config.t_end = s.t_end;
    config.scheme = s.scheme == "rk4" ? Scheme::rk4 : Scheme::if_rk4;
    config.dealias = !s.no_dealias;
    config.max_snapshots = s.snapshots;

    std::vector<FunctionalSpec> monitors = simulate_monitors(flow, c.lambda, c.k);

    ordered_json summary;
    summary["schema"] = "ckdv-simulate/1";
    summary["params"] = {{"lambda", c.lambda},     {"k", c.k},
                         {"flow", s.flow},         {"scheme", s.scheme},
                         {"initial", s.initial},   {"c", s.c},
                         {"x0", s.x0},             {"amplitude", s.amplitude},
                         {"seed", seed},           {"dt", s.dt},
                         {"t_end", s.t_end},       {"n", c.n},
                         {"length", c.length},     {"dealias", !s.no_dealias}};
    std::filesystem::path out(c.out_dir);

    try {
        auto [traj, rep] = integrate_with_monitor(config, params, initial, flow, monitors);

        std::string traj_name = s.format == "csv" ? "trajectory.csv" : "trajectory";
        if (s.format == "csv")
            detail::write_text(out / traj_name, trajectory_csv(traj));
        else
            write_trajectory_snapshots(out / traj_name, traj);
        detail::write_text(out / "conservation.csv", conservation_csv(rep));

        ordered_json drifts;
        std::vector<double> dv = rep.drifts();
        for (size_t i = 0; i < rep.names.size(); ++i) drifts[rep.names[i]] = dv[i];
        summary["outputs"] = {{"trajectory", traj_name}, {"conservation", "conservation.csv"}};
        summary["snapshots"] = traj.snapshots.size();
        summary["final_time"] = traj.times.back();
        summary["drifts"] = std::move(drifts);
        summary["max_drift"] = rep.max_drift();
        summary["status"] = "completed";
        summary["pass"] = true;
        // wall time is the one field exempt from byte-for-byte determinism
        summary["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        detail::write_json(out / "summary.json", summary);
        std::printf("simulate: completed, %zu snapshots to t = %s, max drift %s\n",
                    traj.snapshots.size(), detail::sci(traj.times.back()).c_str(),
                    detail::sci(rep.max_drift()).c_str());
        return exit_ok;
    } catch (const BlowUpError& e) {
        // abort cleanly: diagnostic summary only, no partial field files
        char norm_text[48];
        std::snprintf(norm_text, sizeof norm_text, "%.6e", e.max_norm_value);
        summary["status"] = "blow-up";
        summary["pass"] = false;
        summary["blow_up"] = {{"t", e.t}, {"step", e.step_index}, {"max_norm", norm_text}};
        summary["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        detail::write_json(out / "summary.json", summary);
        std::fprintf(stderr, "simulate: %s\n", e.what());
        return exit_blow_up;
    }
}

// ---------------------------------------------------------------------------
// dirac-check

struct DiracOpts {
    std::vector<std::string> variants; // default: all six
    std::vector<int> grid_ns = {64, 128, 256};
    int probes = 5;
};

inline void add_dirac_options(CLI::App* cmd, DiracOpts& d) {
    cmd->add_option("--variant", d.variants, "constraint variants to check (repeatable)")
        ->check(CLI::IsMember({"L1", "L2", "Lk", "L1M", "L2M", "LkM"}));
    cmd->add_option("--grid-n", d.grid_ns, "grid sizes for the kernel comparison");
    cmd->add_option("--probes", d.probes, "probe count for the conserved-constraint check")
        ->check(CLI::NonNegativeNumber);
}

inline LagrangianId lagrangian_from_name(const std::string& s) {
    for (LagrangianId id : {LagrangianId::L1, LagrangianId::L2, LagrangianId::Lk,
                            LagrangianId::L1M, LagrangianId::L2M, LagrangianId::LkM})
        if (s == name(id)) return id;
    throw std::invalid_argument("unknown constraint variant '" + s + "'");
}

inline int cmd_dirac_check(const CommonOpts& c, const DiracOpts& d) {
    std::map<std::string, double> tols = c.tolerances();
    std::vector<std::string> variants = d.variants;
    if (variants.empty()) variants = {"L1", "L2", "Lk", "L1M", "L2M", "LkM"};

    std::vector<GridSpec> grids;
    for (int n : d.grid_ns) grids.push_back(make_grid(n, c.length));
    uint64_t seed = c.seeds_or({2026}).front();

    ordered_json j;
    j["schema"] = "ckdv-dirac/1";
    j["config"] = {{"lambda", c.lambda}, {"k", c.k},      {"length", c.length},
                   {"grid_ns", d.grid_ns}, {"probes", d.probes}, {"seed", seed}};
    ordered_json checks = ordered_json::array();
    bool all_ok = true;

    for (const std::string& vs : variants) {
        ConstraintVariant v{lagrangian_from_name(vs), c.lambda, c.k};
        check_variant(v); // excluded parameters are a configuration error
        bool modified = is_modified_variant(v.id);
        double tol_kernel = detail::tol_or(
            tols, modified ? "dirac-kernel-modified" : "dirac-kernel-first",
            modified ? 1e-8 : 1e-10);
        double tol_antisym = detail::tol_or(
            tols, modified ? "dirac-antisym-modified" : "dirac-antisym-first",
            modified ? 1e-8 : 1e-10);
        double tol_gap = detail::tol_or(tols, "dirac-gap", 1e-9);
        double tol_casimir = detail::tol_or(tols, "dirac-casimir", 1e-9);

        KernelComparison kc = kernel_comparison(v, grids, seed);
        double casimir = casimir_of_constraints_check(v, grids.front(), d.probes, seed + 7);
        double worst_gap = 0.0, worst_antisym = 0.0;
        ordered_json per_grid = ordered_json::array();
        for (const BlockDefects& b : kc.per_grid) {
            worst_gap = std::max(worst_gap, b.convention_gap);
            worst_antisym = std::max(worst_antisym, b.antisym);
            per_grid.push_back({{"n", b.n},
                                {"uu", b.uu},
                                {"uv", b.uv},
                                {"vu", b.vu},
                                {"vv", b.vv},
                                {"convention_gap", b.convention_gap},
                                {"antisym", b.antisym}});
        }
        bool ok = kc.max_defect <= tol_kernel && worst_gap <= tol_gap &&
                  worst_antisym <= tol_antisym && casimir <= tol_casimir;
        all_ok = all_ok && ok;
        checks.push_back({{"variant", vs},
                          {"lambda", v.lambda},
                          {"k", constraint_k(v)},
                          {"per_grid", std::move(per_grid)},
                          {"orders", kc.orders},
                          {"at_rounding", kc.at_rounding},
                          {"max_defect", kc.max_defect},
                          {"kernel_tolerance", tol_kernel},
                          {"convention_gap", worst_gap},
                          {"antisym", worst_antisym},
                          {"casimir_defect", casimir},
                          {"casimir_tolerance", tol_casimir},
                          {"pass", ok}});
        std::printf("%-4s  %-4s kernel %s  gap %s  casimir %s%s\n", ok ? "pass" : "FAIL",
                    vs.c_str(), detail::sci(kc.max_defect).c_str(),
                    detail::sci(worst_gap).c_str(), detail::sci(casimir).c_str(),
                    kc.at_rounding ? "  [at rounding]" : "");
    }
    j["checks"] = std::move(checks);
    j["pass"] = all_ok;
    detail::write_json(std::filesystem::path(c.out_dir) / "dirac.json", j);
    std::printf("dirac-check: %s (%zu variants)\n", all_ok ? "PASS" : "FAIL", variants.size());
    return all_ok ? exit_ok : exit_check_failed;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
    std::string mode = "verify"; // verify | simulate
    std::vector<double> lambdas;
    std::vector<double> ks = {0.5};
    double dt = 1e-3;
    double t_end = 0.5;
    std::string flow = "kdv";
    double amplitude = 0.3;
};

inline void add_sweep_options(CLI::App* cmd, SweepOpts& s) {
    cmd->add_option("--mode", s.mode, "what to run per cell")
        ->check(CLI::IsMember({"verify", "simulate"}));
    cmd->add_option("--lambda-list", s.lambdas, "coupling values (at least one)")->required();
    cmd->add_option("--k-list", s.ks, "pencil weights");
    cmd->add_option("--dt", s.dt, "time step for simulate cells");
    cmd->add_option("--t-end", s.t_end, "final time for simulate cells");
    cmd->add_option("--flow", s.flow, "evolution for simulate cells")
        ->check(CLI::IsMember({"kdv", "mkdv"}));
    cmd->add_option("--amplitude", s.amplitude, "random data amplitude for simulate cells");
}

struct SweepCell {
    double lambda = 0.0;
    double k = 0.0;
    std::string status; // pass | fail | skipped | blow-up
    std::string reason;
    double worst_defect = 0.0;
    std::string worst_id;
};

inline SweepCell run_sweep_cell(const SweepOpts& s, const CommonOpts& c, double lambda, double k,
                                const std::map<std::string, double>& tols) {
    SweepCell cell;
    cell.lambda = lambda;
    cell.k = k;
    if (pencil_k_excluded({lambda, k})) {
        cell.status = "skipped";
        cell.reason = "pencil denominator zero";
        return cell;
    }
    if (s.mode == "verify") {
        VerifyOptions opt;
        opt.lambda = lambda;
        opt.k = k;
        opt.grid = make_grid(c.n, c.length);
        opt.seeds = c.seeds_or({1});
        opt.tolerances = tols;
        std::vector<VerifyRecord> records = run_identity_suite(opt);
        for (const VerifyRecord& r : records) {
            if (!r.informational && r.defect > cell.worst_defect) {
                cell.worst_defect = r.defect;
                cell.worst_id = r.id;
            }
            if (!r.pass) {
                cell.status = "fail";
                cell.reason = r.id + " exceeded tolerance";
            }
        }
        if (cell.status.empty()) cell.status = "pass";
        return cell;
    }

    // simulate cell: random data, conservation drift against tolerance
    IntegratorConfig config;
    config.dt = s.dt;
    config.t_end = s.t_end;
    FlowKind flow = s.flow == "kdv" ? FlowKind::kdv : FlowKind::mkdv;
    double tol = detail::tol_or(tols, "conservation", 1e-6);
    std::vector<FunctionalSpec> monitors = simulate_monitors(flow, lambda, k);
    try {
        for (uint64_t seed : c.seeds_or({1})) {
            RandomFieldOptions ropt;
            ropt.amplitude = s.amplitude;
            FieldPair initial = random_pair(make_grid(c.n, c.length), seed, ropt);
            auto [traj, rep] = integrate_with_monitor(config, SystemParams{lambda}, initial,
                                                      flow, monitors);
            std::vector<double> dv = rep.drifts();
            for (size_t i = 0; i < dv.size(); ++i) {
                if (dv[i] > cell.worst_defect) {
                    cell.worst_defect = dv[i];
                    cell.worst_id = rep.names[i];
                }
            }
        }
    } catch (const BlowUpError& e) {
        cell.status = "blow-up";
        cell.reason = e.what();
        return cell;
    }
    cell.status = cell.worst_defect <= tol ? "pass" : "fail";
    if (cell.status == "fail") cell.reason = cell.worst_id + " drift exceeded tolerance";
    return cell;
}

inline int cmd_sweep(const CommonOpts& c, const SweepOpts& s) {
    if (s.lambdas.empty()) throw std::invalid_argument("sweep needs at least one coupling value");
    std::map<std::string, double> tols = c.tolerances();

    struct Task {
        double lambda, k;
    };
    std::vector<Task> tasks;
    for (double lambda : s.lambdas)
        for (double k : s.ks) tasks.push_back({lambda, k});

    std::vector<SweepCell> cells(tasks.size());
    std::atomic<size_t> next{0};
    std::mutex log_mu;
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            SweepCell cell = run_sweep_cell(s, c, tasks[i].lambda, tasks[i].k, tols);
            std::scoped_lock lock(log_mu);
            std::printf("cell lambda %-8g k %-8g %s%s%s\n", cell.lambda, cell.k,
                        cell.status.c_str(), cell.reason.empty() ? "" : ": ",
                        cell.reason.c_str());
            cells[i] = std::move(cell);
        }
    };
    unsigned jobs = std::min<unsigned>(std::max(1u, c.jobs), tasks.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::string csv = "lambda,k,status,worst_defect,worst_id,reason\n";
    ordered_json jcells = ordered_json::array();
    bool any_fail = false;
    for (const SweepCell& cell : cells) {
        any_fail = any_fail || cell.status == "fail";
        csv += detail::d17(cell.lambda) + "," + detail::d17(cell.k) + "," + cell.status + "," +
               detail::d17(cell.worst_defect) + "," + cell.worst_id + "," + cell.reason + "\n";
        jcells.push_back({{"lambda", cell.lambda},
                          {"k", cell.k},
                          {"status", cell.status},
                          {"worst_defect", cell.worst_defect},
                          {"worst_id", cell.worst_id},
                          {"reason", cell.reason}});
    }
    ordered_json j;
    j["schema"] = "ckdv-sweep/1";
    j["mode"] = s.mode;
    j["config"] = {{"n", c.n},
                   {"length", c.length},
                   {"seeds", c.seeds_or({1})},
                   {"lambda_list", s.lambdas},
                   {"k_list", s.ks}};
    j["cells"] = std::move(jcells);
    j["pass"] = !any_fail;
    std::filesystem::path out(c.out_dir);
    detail::write_text(out / "sweep.csv", csv);
    detail::write_json(out / "sweep.json", j);
    std::printf("sweep: %s (%zu cells)\n", any_fail ? "FAIL" : "PASS", cells.size());
    return any_fail ? exit_check_failed : exit_ok;
}

// ---------------------------------------------------------------------------
// report

inline int cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read report '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("report '" + path + "' is not valid JSON: " + e.what());
    }
    std::string schema = j.value("schema", "");

    if (schema == "ckdv-verify/1") {
        for (const auto& r : j.at("records")) {
            std::printf("%-4s  %-34s defect %s  tol %s%s\n",
                        r.at("pass").get<bool>() ? "pass" : "FAIL",
                        r.at("id").get<std::string>().c_str(),
                        detail::sci(r.at("defect").get<double>()).c_str(),
                        detail::sci(r.at("tolerance").get<double>()).c_str(),
                        r.value("informational", false) ? "  [informational]" : "");
        }
    } else if (schema == "ckdv-sweep/1") {
        for (const auto& cell : j.at("cells")) {
            std::printf("lambda %-8g k %-8g %-8s %s\n", cell.at("lambda").get<double>(),
                        cell.at("k").get<double>(), cell.at("status").get<std::string>().c_str(),
                        cell.value("reason", "").c_str());
        }
    } else if (schema == "ckdv-dirac/1") {
        for (const auto& chk : j.at("checks")) {
            std::printf("%-4s  %-4s kernel %s  casimir %s\n",
                        chk.at("pass").get<bool>() ? "pass" : "FAIL",
                        chk.at("variant").get<std::string>().c_str(),
                        detail::sci(chk.at("max_defect").get<double>()).c_str(),
                        detail::sci(chk.at("casimir_defect").get<double>()).c_str());
        }
    } else if (schema == "ckdv-simulate/1") {
        std::printf("status: %s\n", j.value("status", "?").c_str());
        if (j.contains("drifts"))
            for (auto it = j["drifts"].begin(); it != j["drifts"].end(); ++it)
                std::printf("drift %-8s %s\n", it.key().c_str(),
                            detail::sci(it.value().get<double>()).c_str());
    } else {
        throw std::invalid_argument("report '" + path + "' has unknown schema '" + schema + "'");
    }

    bool pass = j.value("pass", false);
    std::printf("report: %s\n", pass ? "PASS" : "FAIL");
    return pass ? exit_ok : exit_check_failed;
}

} // namespace cli

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"numerical certificates for a parametric pair of coupled dispersive flows"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file with subcommand sections");

    cli::CommonOpts common;
    cli::SimulateOpts sim;
    cli::DiracOpts dirac;
    cli::SweepOpts sweep;
    std::string report_path;

    CLI::App* c_verify = app.add_subcommand("verify", "run the identity suite");
    cli::add_common_options(c_verify, common);

    CLI::App* c_sim = app.add_subcommand("simulate", "integrate one flow and monitor invariants");
    cli::add_common_options(c_sim, common);
    cli::add_simulate_options(c_sim, sim);

    CLI::App* c_dirac = app.add_subcommand("dirac-check", "compare reduced brackets to kernels");
    cli::add_common_options(c_dirac, common);
    cli::add_dirac_options(c_dirac, dirac);

    CLI::App* c_sweep = app.add_subcommand("sweep", "run cells over a parameter grid");
    cli::add_common_options(c_sweep, common);
    cli::add_sweep_options(c_sweep, sweep);

    CLI::App* c_report = app.add_subcommand("report", "summarize a written JSON report");
    c_report->add_option("file", report_path, "path to a report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? cli::exit_ok : cli::exit_config_error;
    }

    try {
        if (c_verify->parsed()) return cli::cmd_verify(common);
        if (c_sim->parsed()) return cli::cmd_simulate(common, sim);
        if (c_dirac->parsed()) return cli::cmd_dirac_check(common, dirac);
        if (c_sweep->parsed()) return cli::cmd_sweep(common, sweep);
        if (c_report->parsed()) return cli::cmd_report(report_path);
    } catch (const BlowUpError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cli::exit_blow_up;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cli::exit_config_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cli::exit_config_error;
    }
    return cli::exit_config_error;
}

} // namespace ckdv
