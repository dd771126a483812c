#pragma once

// Hamiltonian functionals of the coupled third-order system, their
// closed-form variational derivatives, a finite-difference oracle for those
// derivatives, and Euler-Lagrange residuals of the generating Lagrangians.
//
// All densities are stored in the derivative variables (u, v): the underlying
// potentials only ever enter differentiated, so u = w_x, v = y_x is exact.

#include <ckdv/grid.hpp>

namespace ckdv {

enum class FunctionalId { H1, H2, H1M, H2M, Hk, HkM, MassU, MassV };

struct FunctionalSpec {
    FunctionalId id = FunctionalId::H1;
    double lambda = -1.0;
    double k = 0.5; // pencil weight, read only by Hk / HkM
};

inline const char* name(FunctionalId id) {
    switch (id) {
        case FunctionalId::H1: return "H1";
        case FunctionalId::H2: return "H2";
        case FunctionalId::H1M: return "H1M";
        case FunctionalId::H2M: return "H2M";
        case FunctionalId::Hk: return "Hk";
        case FunctionalId::HkM: return "HkM";
        case FunctionalId::MassU: return "mass_u";
        case FunctionalId::MassV: return "mass_v";
    }
    return "?";
}

namespace detail {

// unguarded density quadratures; the lambda = 0 guard lives in the dispatcher
// so the pencil members can reuse these paths verbatim

inline double eval_h1_raw(double lambda, const FieldPair& f) {
    Field ux = deriv(f.u), vx = deriv(f.v);
    double s = 0;
    for (int j = 0; j < f.u.n(); ++j) {
        double u = f.u[j], v = f.v[j];
        s += u * u * u / 6.0 - 0.5 * ux[j] * ux[j] + 0.5 * lambda * u * v * v -
             0.5 * lambda * vx[j] * vx[j];
    }
    return s * f.grid().spacing();
}

inline double eval_h2_raw(double lambda, const FieldPair& f) {
    Field uxx = deriv(f.u, 2);
    double s = 0;
    for (int j = 0; j < f.u.n(); ++j) {
        double u = f.u[j], v = f.v[j];
        s += 0.5 * u * u * v + v * uxx[j] + lambda * v * v * v / 6.0;
    }
    return s * f.grid().spacing();
}

inline double eval_h1m_raw(double lambda, const FieldPair& f) {
    double s = 0;
    for (int j = 0; j < f.u.n(); ++j)
        s += -0.5 * (f.u[j] * f.u[j] + lambda * f.v[j] * f.v[j]);
    return s * f.grid().spacing();
}

inline double eval_h2m_raw(const FieldPair& f) {
    double s = 0;
    for (int j = 0; j < f.u.n(); ++j) s += -f.u[j] * f.v[j];
    return s * f.grid().spacing();
}

inline void check_functional_params(const FunctionalSpec& spec) {
    switch (spec.id) {
        case FunctionalId::H1:
        case FunctionalId::H1M:
            require_nonzero_lambda(spec.lambda, name(spec.id));
            break;
        case FunctionalId::Hk:
        case FunctionalId::HkM:
            require_valid_pencil({spec.lambda, spec.k}, name(spec.id));
            break;
        default:
            break;
    }
}

} // namespace detail

inline double eval_functional(const FunctionalSpec& spec, const FieldPair& f) {
    detail::check_functional_params(spec);
    switch (spec.id) {
        case FunctionalId::H1: return detail::eval_h1_raw(spec.lambda, f);
        case FunctionalId::H2: return detail::eval_h2_raw(spec.lambda, f);
        case FunctionalId::H1M: return detail::eval_h1m_raw(spec.lambda, f);
        case FunctionalId::H2M: return detail::eval_h2m_raw(f);
        case FunctionalId::Hk:
            return spec.k * detail::eval_h1_raw(spec.lambda, f) +
                   (1.0 - spec.k) * detail::eval_h2_raw(spec.lambda, f);
        case FunctionalId::HkM:
            return spec.k * detail::eval_h1m_raw(spec.lambda, f) +
                   (1.0 - spec.k) * detail::eval_h2m_raw(f);
        case FunctionalId::MassU: return integral(f.u);
        case FunctionalId::MassV: return integral(f.v);
    }
    throw std::logic_error("unreachable");
}

namespace detail {

inline FieldPair vd_h1(double lambda, const FieldPair& f) {
    Field du = deriv(f.u, 2); // u_xx
    Field dv = deriv(f.v, 2); // v_xx
    for (int j = 0; j < f.u.n(); ++j) {
        double u = f.u[j], v = f.v[j];
        du[j] += 0.5 * u * u + 0.5 * lambda * v * v;
        dv[j] = lambda * (u * v + dv[j]);
    }
    return {std::move(du), std::move(dv)};
}

inline FieldPair vd_h2(double lambda, const FieldPair& f) {
    Field du = deriv(f.v, 2); // v_xx
    Field dv = deriv(f.u, 2); // u_xx
    for (int j = 0; j < f.u.n(); ++j) {
        double u = f.u[j], v = f.v[j];
        du[j] += u * v;
        dv[j] += 0.5 * u * u + 0.5 * lambda * v * v;
    }
    return {std::move(du), std::move(dv)};
}

inline FieldPair vd_h1m(double lambda, const FieldPair& f) {
    FieldPair out(f.grid());
    for (int j = 0; j < f.u.n(); ++j) {
        out.u[j] = -f.u[j];
        out.v[j] = -lambda * f.v[j];
    }
    return out;
}

inline FieldPair vd_h2m(const FieldPair& f) {
    FieldPair out(f.grid());
    for (int j = 0; j < f.u.n(); ++j) {
        out.u[j] = -f.v[j];
        out.v[j] = -f.u[j];
    }
    return out;
}

} // namespace detail

inline FieldPair variational_derivative(const FunctionalSpec& spec, const FieldPair& f) {
    detail::check_functional_params(spec);
    switch (spec.id) {
        case FunctionalId::H1: return detail::vd_h1(spec.lambda, f);
        case FunctionalId::H2: return detail::vd_h2(spec.lambda, f);
        case FunctionalId::H1M: return detail::vd_h1m(spec.lambda, f);
        case FunctionalId::H2M: return detail::vd_h2m(f);
        case FunctionalId::Hk: {
            FieldPair a = detail::vd_h1(spec.lambda, f);
            FieldPair b = detail::vd_h2(spec.lambda, f);
            return spec.k * a + (1.0 - spec.k) * b;
        }
        case FunctionalId::HkM: {
            FieldPair a = detail::vd_h1m(spec.lambda, f);
            FieldPair b = detail::vd_h2m(f);
            return spec.k * a + (1.0 - spec.k) * b;
        }
        case FunctionalId::MassU: {
            FieldPair out(f.grid());
            for (double& x : out.u.a) x = 1.0;
            return out;
        }
        case FunctionalId::MassV: {
            FieldPair out(f.grid());
            for (double& x : out.v.a) x = 1.0;
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

// Central-difference functional derivative: bump one sample at a time.
// (F(f + eps e_j) - F(f - eps e_j)) / (2 eps dx) approximates the continuum
// variational derivative at node j.
inline FieldPair fd_variational_oracle(const FunctionalSpec& spec, const FieldPair& f,
                                       double eps = 1e-5) {
    if (!(eps >= 1e-7 && eps <= 1e-4))
        throw std::invalid_argument("fd oracle: eps must lie in [1e-7, 1e-4]");
    detail::check_functional_params(spec);
    FieldPair out(f.grid());
    FieldPair work = f;
    const double scale = 1.0 / (2.0 * eps * f.grid().spacing());
    for (int j = 0; j < f.u.n(); ++j) {
        double keep = work.u[j];
        work.u[j] = keep + eps;
        double fp = eval_functional(spec, work);
        work.u[j] = keep - eps;
        double fm = eval_functional(spec, work);
        work.u[j] = keep;
        out.u[j] = (fp - fm) * scale;
    }
    for (int j = 0; j < f.v.n(); ++j) {
        double keep = work.v[j];
        work.v[j] = keep + eps;
        double fp = eval_functional(spec, work);
        work.v[j] = keep - eps;
        double fm = eval_functional(spec, work);
        work.v[j] = keep;
        out.v[j] = (fp - fm) * scale;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residuals.
//
// Each Lagrangian is first order in time with momenta linear in the spatial
// gradients, so its field equations close in (u, v, u_t, v_t).  The residual
// is assembled term by term from the Euler operator applied to the density
// (time branch, then (-d/dx)^j on each spatial jet partial); no algebraic
// simplification is applied, which keeps this evaluation on a different
// arithmetic path from the flow right-hand sides it is tested against.

enum class LagrangianId { L1, L2, L1M, L2M, Lk, LkM };

struct LagrangianSpec {
    LagrangianId id = LagrangianId::L1;
    double lambda = -1.0;
    double k = 0.5; // read only by Lk / LkM
    // The quartic term of the first modified-family density admits two sign
    // conventions.  true (default) selects the one whose field equations are
    // exactly the modified flow; false selects the other, which leaves a
    // (lambda/3) v^2 v_x residue in the second residual component.
    bool quartic_sign_fixed = true;
};

inline const char* name(LagrangianId id) {
    switch (id) {
        case LagrangianId::L1: return "L1";
        case LagrangianId::L2: return "L2";
        case LagrangianId::L1M: return "L1M";
        case LagrangianId::L2M: return "L2M";
        case LagrangianId::Lk: return "Lk";
        case LagrangianId::LkM: return "LkM";
    }
    return "?";
}

namespace detail {

// raw variations (no normalization), first family, potentials (w, y)
inline FieldPair el_l1_raw(double lambda, const FieldPair& f, const FieldPair& ft) {
    const auto& [u, v] = f;
    const auto& [ut, vt] = ft;
    // dw: time branch (1/2)u_t; -d/dx of (dL/dw_x) gives (1/2)u_t + d/dx(u^2/2 + lambda v^2/2);
    //     +d2/dx2 of (dL/dw_xx = u_x)
    Field dw = 0.5 * ut;
    axpy(dw, 0.5, ut);
    dw = dw + deriv(0.5 * hadamard(u, u) + (0.5 * lambda) * hadamard(v, v));
    dw = dw + deriv(deriv(u), 2);
    // dy: time branch (lambda/2)v_t; -d/dx of (dL/dy_x) gives (lambda/2)v_t + lambda d/dx(uv);
    //     +d2/dx2 of (dL/dy_xx = lambda v_x)
    Field dy = (0.5 * lambda) * vt;
    axpy(dy, 0.5 * lambda, vt);
    dy = dy + lambda * deriv(hadamard(u, v));
    dy = dy + lambda * deriv(deriv(v), 2);
    return {std::move(dw), std::move(dy)};
}

inline FieldPair el_l2_raw(double lambda, const FieldPair& f, const FieldPair& ft) {
    const auto& [u, v] = f;
    const auto& [ut, vt] = ft;
    // dw: time branch (1/2)v_t; -d/dx of (dL/dw_x) gives (1/2)v_t + d/dx(uv);
    //     (-d/dx)^3 of (dL/dw_xxx = -v) gives +v_xxx
    Field dw = 0.5 * vt;
    axpy(dw, 0.5, vt);
    dw = dw + deriv(hadamard(u, v));
    dw = dw + deriv(v, 3);
    // dy: time branch (1/2)u_t; -d/dx of (dL/dy_x) gives
    //     (1/2)u_t + d/dx(u^2/2 + u_xx + lambda v^2/2)
    Field dy = 0.5 * ut;
    axpy(dy, 0.5, ut);
    dy = dy + deriv(0.5 * hadamard(u, u) + deriv(u, 2) + (0.5 * lambda) * hadamard(v, v));
    return {std::move(dw), std::move(dy)};
}

// raw variations, modified family, potentials (sigma, rho); fields are (mu, nu)
inline FieldPair el_l1m_raw(double lambda, bool sign_fixed, const FieldPair& f,
                            const FieldPair& ft) {
    const auto& [mu, nu] = f;
    const auto& [mut, nut] = ft;
    double s = sign_fixed ? 1.0 : -1.0;
    // dsigma: mu_t (two halves) + mu_xxx (two halves, distinct derivative paths)
    //         - d/dx(mu^3/18 + (lambda/6) nu^2 mu)
    Field ds = 0.5 * mut;
    axpy(ds, 0.5, mut);
    ds = ds + 0.5 * deriv(mu, 3);
    ds = ds + 0.5 * deriv(deriv(mu), 2);
    ds = ds - deriv((1.0 / 18.0) * hadamard(mu, hadamard(mu, mu)) +
                    (lambda / 6.0) * hadamard(hadamard(nu, nu), mu));
    // drho: lambda nu_t + lambda nu_xxx - d/dx(s lambda^2/18 nu^3 + (lambda/6) nu mu^2)
    Field dr = (0.5 * lambda) * nut;
    axpy(dr, 0.5 * lambda, nut);
    dr = dr + (0.5 * lambda) * deriv(nu, 3);
    dr = dr + (0.5 * lambda) * deriv(deriv(nu), 2);
    dr = dr - deriv((s * lambda * lambda / 18.0) * hadamard(nu, hadamard(nu, nu)) +
                    (lambda / 6.0) * hadamard(nu, hadamard(mu, mu)));
    return {std::move(ds), std::move(dr)};
}

inline FieldPair el_l2m_raw(double lambda, const FieldPair& f, const FieldPair& ft) {
    const auto& [mu, nu] = f;
    const auto& [mut, nut] = ft;
    // dsigma: nu_t + nu_xxx - d/dx(mu^2 nu / 6 + lambda nu^3 / 18)
    Field ds = 0.5 * nut;
    axpy(ds, 0.5, nut);
    ds = ds + deriv(nu, 3);
    ds = ds - deriv((1.0 / 6.0) * hadamard(hadamard(mu, mu), nu) +
                    (lambda / 18.0) * hadamard(nu, hadamard(nu, nu)));
    // drho: mu_t + mu_xxx - d/dx(mu^3/18 + (lambda/6) nu^2 mu)
    Field dr = 0.5 * mut;
    axpy(dr, 0.5, mut);
    dr = dr + deriv(deriv(mu, 2));
    dr = dr - deriv((1.0 / 18.0) * hadamard(mu, hadamard(mu, mu)) +
                    (lambda / 6.0) * hadamard(hadamard(nu, nu), mu));
    return {std::move(ds), std::move(dr)};
}

// solve [[k, 1-k], [1-k, lambda k]] r = rhs
inline FieldPair coupling_solve(double lambda, double k, const FieldPair& rhs) {
    double det = lambda * k * k - (1.0 - k) * (1.0 - k);
    Field r1 = (lambda * k / det) * rhs.u;
    axpy(r1, -(1.0 - k) / det, rhs.v);
    Field r2 = (-(1.0 - k) / det) * rhs.u;
    axpy(r2, k / det, rhs.v);
    return {std::move(r1), std::move(r2)};
}

} // namespace detail

// Residual of the field equations generated by the chosen Lagrangian,
// normalized so that it equals the flow equations' left-hand side
// (first component: the u (or mu) equation, second: the v (or nu) equation).
// Normalization per variant: L1 scales the second variation by 1/lambda,
// L2 swaps the two variations, Lk applies the inverse coupling matrix
// [[k, 1-k], [1-k, lambda k]]; the modified family mirrors this exactly.
inline FieldPair euler_lagrange_residual(const LagrangianSpec& spec, const FieldPair& f,
                                         const FieldPair& ft) {
    switch (spec.id) {
        case LagrangianId::L1: {
            require_nonzero_lambda(spec.lambda, name(spec.id));
            FieldPair r = detail::el_l1_raw(spec.lambda, f, ft);
            return {std::move(r.u), (1.0 / spec.lambda) * std::move(r.v)};
        }
        case LagrangianId::L2: {
            FieldPair r = detail::el_l2_raw(spec.lambda, f, ft);
            return {std::move(r.v), std::move(r.u)};
        }
        case LagrangianId::Lk: {
            require_valid_pencil({spec.lambda, spec.k}, name(spec.id));
            FieldPair a = detail::el_l1_raw(spec.lambda, f, ft);
            FieldPair b = detail::el_l2_raw(spec.lambda, f, ft);
            return detail::coupling_solve(spec.lambda, spec.k,
                                          spec.k * a + (1.0 - spec.k) * b);
        }
        case LagrangianId::L1M: {
            require_nonzero_lambda(spec.lambda, name(spec.id));
            FieldPair r = detail::el_l1m_raw(spec.lambda, spec.quartic_sign_fixed, f, ft);
            return {std::move(r.u), (1.0 / spec.lambda) * std::move(r.v)};
        }
        case LagrangianId::L2M: {
            FieldPair r = detail::el_l2m_raw(spec.lambda, f, ft);
            return {std::move(r.v), std::move(r.u)};
        }
        case LagrangianId::LkM: {
            require_valid_pencil({spec.lambda, spec.k}, name(spec.id));
            FieldPair a = detail::el_l1m_raw(spec.lambda, spec.quartic_sign_fixed, f, ft);
            FieldPair b = detail::el_l2m_raw(spec.lambda, f, ft);
            return detail::coupling_solve(spec.lambda, spec.k,
                                          spec.k * a + (1.0 - spec.k) * b);
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace ckdv
