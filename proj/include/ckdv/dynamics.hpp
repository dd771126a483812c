#pragma once

// Time integration of the coupled flow and its modified counterpart, with
// conservation monitoring, soliton transport checks, and the trajectory-level
// counterpart of the instantaneous intertwining certificate.

#include <ckdv/functionals.hpp>
#include <ckdv/miura.hpp>

#include <cstdio>

namespace ckdv {

enum class FlowKind { kdv, mkdv };
enum class Scheme { rk4, if_rk4 };

inline const char* scheme_name(Scheme s) { return s == Scheme::rk4 ? "rk4" : "if-rk4"; }

struct IntegratorConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::if_rk4;
    bool dealias = true; // 2/3 rule on the nonlinear products
    int max_snapshots = 200;
};

// fired by the instability detector before a bad state is accepted
struct BlowUpError : std::runtime_error {
    double t;
    long step_index;
    double max_norm_value;
    BlowUpError(double t_, long step_, double norm_)
        : std::runtime_error(format(t_, step_, norm_)), t(t_), step_index(step_),
          max_norm_value(norm_) {}

  private:
    static std::string format(double t_, long step_, double norm_) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "solution norm %.3e exceeded the blow-up threshold 1e6 at t = %.6f (step %ld)",
                      norm_, t_, step_);
        return buf;
    }
};

// u = 3c sech^2((sqrt(c)/2)(x - x0)), v = 0; a traveling wave of the coupled
// system for every lambda. The box must hold the wave: edge samples are
// checked against tail_rel_tol * peak.
inline FieldPair soliton_initial(double c, double x0, const GridSpec& g,
                                 double tail_rel_tol = 1e-6) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("wave speed must be positive");
    FieldPair out(g);
    double hw = std::sqrt(c) / 2.0;
    for (int j = 0; j < g.n; ++j) {
        double s = 1.0 / std::cosh(hw * (g.node(j) - x0));
        out.u[j] = 3.0 * c * s * s;
    }
    double edge = std::max(std::abs(out.u[0]), std::abs(out.u[g.n - 1]));
    if (edge > tail_rel_tol * 3.0 * c) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "box too short: soliton tail %.3e at the edge exceeds %.1e of the peak",
                      edge / (3.0 * c), tail_rel_tol);
        throw std::invalid_argument(buf);
    }
    return out;
}

namespace detail {

struct SpectralPair {
    Spectrum u, v;
};

inline SpectralPair to_spectra(const FieldPair& f) { return {rfft(f.u), rfft(f.v)}; }

inline FieldPair to_fields(const GridSpec& g, const SpectralPair& s) {
    return {irfft(g, s.u), irfft(g, s.v)};
}

// zero everything above 2/3 of the resolved band, fold mode included
inline void mask_two_thirds(const GridSpec& g, Spectrum& s) {
    int keep = g.n / 3;
    for (int m = keep + 1; m <= g.n / 2; ++m) s[m] = 0.0;
}

inline void mask_pair(const GridSpec& g, SpectralPair& s, bool dealias) {
    if (!dealias) return;
    mask_two_thirds(g, s.u);
    mask_two_thirds(g, s.v);
}

// nonlinear parts in conservative form:
//   kdv:  N_u = -d((u^2 + lambda v^2)/2),  N_v = -d(uv)
//   mkdv: N_mu = d(mu^3/18 + (lambda/6) mu nu^2),  N_nu = d(lambda nu^3/18 + mu^2 nu / 6)
// Mode zero of a derivative vanishes identically, so both masses are
// conserved to rounding by construction.
inline SpectralPair nonlinear(FlowKind flow, const SystemParams& p, const GridSpec& g,
                              const SpectralPair& s, bool dealias) {
    FieldPair f = to_fields(g, s);
    Field du(g), dv(g);
    if (flow == FlowKind::kdv) {
        for (int j = 0; j < g.n; ++j) {
            du[j] = -0.5 * (f.u[j] * f.u[j] + p.lambda * f.v[j] * f.v[j]);
            dv[j] = -f.u[j] * f.v[j];
        }
    } else {
        for (int j = 0; j < g.n; ++j) {
            double mu = f.u[j], nu = f.v[j];
            du[j] = mu * mu * mu / 18.0 + (p.lambda / 6.0) * mu * nu * nu;
            dv[j] = p.lambda * nu * nu * nu / 18.0 + mu * mu * nu / 6.0;
        }
    }
    SpectralPair out{rfft(du), rfft(dv)};
    for (int m = 0; m <= g.n / 2; ++m) {
        std::complex<double> ik(0.0, wavenumber(g, m));
        out.u[m] *= ik;
        out.v[m] *= ik;
    }
    out.u[g.n / 2] = 0.0;
    out.v[g.n / 2] = 0.0;
    mask_pair(g, out, dealias);
    return out;
}

// both flows share the linear part -d^3, i.e. +ik^3 on each mode
inline std::vector<std::complex<double>> linear_phases(const GridSpec& g, double tau) {
    std::vector<std::complex<double>> e(g.n / 2 + 1);
    for (int m = 0; m <= g.n / 2; ++m) {
        double k = wavenumber(g, m);
        e[m] = std::exp(std::complex<double>(0.0, k * k * k * tau));
    }
    e[g.n / 2] = 1.0; // the fold mode has no odd derivative in this convention
    return e;
}

inline SpectralPair axpy_pair(const SpectralPair& s, double a, const SpectralPair& d) {
    SpectralPair out = s;
    for (size_t m = 0; m < out.u.size(); ++m) {
        out.u[m] += a * d.u[m];
        out.v[m] += a * d.v[m];
    }
    return out;
}

inline void scale_add(SpectralPair& acc, double a, const SpectralPair& d) {
    for (size_t m = 0; m < acc.u.size(); ++m) {
        acc.u[m] += a * d.u[m];
        acc.v[m] += a * d.v[m];
    }
}

inline void mul_phases(SpectralPair& s, const std::vector<std::complex<double>>& e) {
    for (size_t m = 0; m < s.u.size(); ++m) {
        s.u[m] *= e[m];
        s.v[m] *= e[m];
    }
}

struct Stepper {
    GridSpec grid;
    SystemParams params;
    FlowKind flow;
    IntegratorConfig config;
    std::vector<std::complex<double>> e_half, e_full;

    Stepper(const GridSpec& g, const SystemParams& p, FlowKind fl, const IntegratorConfig& c)
        : grid(g), params(p), flow(fl), config(c),
          e_half(linear_phases(g, c.dt / 2.0)), e_full(linear_phases(g, c.dt)) {
        if (!std::isfinite(c.dt) || c.dt == 0.0) throw std::invalid_argument("dt must be finite and nonzero");
        if (c.scheme == Scheme::rk4) {
            // explicit treatment of the third derivative: |dt| k_max^3 <= 2 sqrt(2)
            double kmax = wavenumber(g, g.n / 2);
            if (std::abs(c.dt) * kmax * kmax * kmax > 2.0 * std::sqrt(2.0) + 1e-12)
                throw std::invalid_argument(
                    "dt violates the rk4 stability bound |dt| k_max^3 <= 2*sqrt(2); "
                    "use if-rk4 or a smaller step");
        }
    }

    SpectralPair full_rhs(const SpectralPair& s) const {
        SpectralPair out = nonlinear(flow, params, grid, s, config.dealias);
        for (int m = 0; m <= grid.n / 2; ++m) {
            double k = wavenumber(grid, m);
            std::complex<double> ik3(0.0, k * k * k);
            out.u[m] += ik3 * s.u[m];
            out.v[m] += ik3 * s.v[m];
        }
        out.u[grid.n / 2] = 0.0;
        out.v[grid.n / 2] = 0.0;
        return out;
    }

    SpectralPair advance(const SpectralPair& s) const {
        double dt = config.dt;
        if (config.scheme == Scheme::rk4) {
            SpectralPair k1 = full_rhs(s);
            SpectralPair k2 = full_rhs(axpy_pair(s, dt / 2.0, k1));
            SpectralPair k3 = full_rhs(axpy_pair(s, dt / 2.0, k2));
            SpectralPair k4 = full_rhs(axpy_pair(s, dt, k3));
            SpectralPair out = s;
            scale_add(out, dt / 6.0, k1);
            scale_add(out, dt / 3.0, k2);
            scale_add(out, dt / 3.0, k3);
            scale_add(out, dt / 6.0, k4);
            return out;
        }
        // integrating factor rk4: the linear phase is applied exactly, the
        // classical stages act on the transformed variable
        auto nl = [&](const SpectralPair& z) {
            return nonlinear(flow, params, grid, z, config.dealias);
        };
        SpectralPair n1 = nl(s);
        SpectralPair u2 = axpy_pair(s, dt / 2.0, n1);
        mul_phases(u2, e_half);
        SpectralPair n2 = nl(u2);

        SpectralPair u3 = s;
        mul_phases(u3, e_half);
        scale_add(u3, dt / 2.0, n2);
        SpectralPair n3 = nl(u3);

        SpectralPair u4 = s;
        mul_phases(u4, e_full);
        SpectralPair n3h = n3;
        mul_phases(n3h, e_half);
        scale_add(u4, dt, n3h);
        SpectralPair n4 = nl(u4);

        SpectralPair out = s;
        scale_add(out, dt / 6.0, n1);
        mul_phases(out, e_full); // E2 (s + dt/6 n1)
        SpectralPair n2h = n2, n3h2 = n3;
        mul_phases(n2h, e_half);
        mul_phases(n3h2, e_half);
        scale_add(out, dt / 3.0, n2h);
        scale_add(out, dt / 3.0, n3h2);
        scale_add(out, dt / 6.0, n4);
        return out;
    }
};

inline void check_accepted(const FieldPair& f, double t, long step_index) {
    double norm = std::max(max_norm(f.u), max_norm(f.v));
    if (!all_finite(f.u) || !all_finite(f.v) || norm > 1e6)
        throw BlowUpError(t, step_index, norm);
}

} // namespace detail

// one accepted time step; dt may be negative (used by reversal checks)
inline FieldPair step(const IntegratorConfig& config, const SystemParams& params,
                      const FieldPair& fields, FlowKind flow, double t_now = 0.0,
                      long step_index = 0) {
    detail::Stepper st(fields.grid(), params, flow, config);
    detail::SpectralPair s = detail::to_spectra(fields);
    detail::mask_pair(fields.grid(), s, config.dealias);
    FieldPair out = detail::to_fields(fields.grid(), st.advance(s));
    detail::check_accepted(out, t_now + config.dt, step_index + 1);
    return out;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<FieldPair> snapshots;
    SystemParams params;
};

struct ConservationReport {
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<std::vector<double>> series; // [monitor][sample]
    GridSpec grid{};
    Scheme scheme = Scheme::if_rk4;
    double dt = 0.0;

    // drift = max_t |F(t) - F(0)| / max(1, |F(0)|)
    std::vector<double> drifts() const {
        std::vector<double> out;
        for (const auto& row : series) {
            double d = 0.0;
            for (double x : row) d = std::max(d, std::abs(x - row.front()));
            out.push_back(d / std::max(1.0, std::abs(row.front())));
        }
        return out;
    }
    double max_drift() const {
        double m = 0.0;
        for (double d : drifts()) m = std::max(m, d);
        return m;
    }
};

inline std::pair<Trajectory, ConservationReport>
integrate_with_monitor(const IntegratorConfig& config, const SystemParams& params,
                       const FieldPair& initial, FlowKind flow,
                       const std::vector<FunctionalSpec>& monitors) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("integration needs dt > 0");
    if (!(config.t_end > 0.0)) throw std::invalid_argument("integration needs t_end > 0");
    long steps = std::lround(config.t_end / config.dt);
    if (steps < 1 || std::abs(double(steps) * config.dt - config.t_end) > 1e-9 * std::max(1.0, config.t_end))
        throw std::invalid_argument("t_end must be an integer number of steps");
    if (config.max_snapshots < 2) throw std::invalid_argument("need at least 2 snapshots");
    for (const FunctionalSpec& m : monitors) detail::check_functional_params(m);

    const GridSpec& g = initial.grid();
    detail::Stepper st(g, params, flow, config);
    detail::SpectralPair s = detail::to_spectra(initial);
    detail::mask_pair(g, s, config.dealias);

    long stride = std::max(1l, (steps + config.max_snapshots - 2) / (config.max_snapshots - 1));

    Trajectory traj;
    traj.params = params;
    ConservationReport report;
    for (const FunctionalSpec& m : monitors) report.names.push_back(name(m.id));
    report.series.resize(monitors.size());
    report.grid = g;
    report.scheme = config.scheme;
    report.dt = config.dt;

    auto record = [&](double t, const FieldPair& f) {
        traj.times.push_back(t);
        traj.snapshots.push_back(f);
        report.times.push_back(t);
        for (size_t m = 0; m < monitors.size(); ++m)
            report.series[m].push_back(eval_functional(monitors[m], f));
    };

    record(0.0, detail::to_fields(g, s));
    for (long i = 1; i <= steps; ++i) {
        s = st.advance(s);
        double t = double(i) * config.dt;
        FieldPair f = detail::to_fields(g, s);
        detail::check_accepted(f, t, i);
        if (i % stride == 0 || i == steps) record(t, f);
    }
    return {std::move(traj), std::move(report)};
}

// evolve (mu, nu) under the modified flow and its image under the coupled
// flow, independently; report max_t of the image mismatch
inline double miura_trajectory_defect(const IntegratorConfig& config, const SystemParams& params,
                                      const ModifiedFieldPair& initial_m) {
    auto [mtraj, mrep] = integrate_with_monitor(config, params, initial_m, FlowKind::mkdv, {});
    auto [ztraj, zrep] = integrate_with_monitor(config, params, miura_map(initial_m, params),
                                                FlowKind::kdv, {});
    double defect = 0.0;
    for (size_t i = 0; i < mtraj.snapshots.size(); ++i) {
        FieldPair image = miura_map(mtraj.snapshots[i], params);
        defect = std::max(defect, max_norm(image - ztraj.snapshots[i]));
    }
    return defect;
}

} // namespace ckdv
