#pragma once

// The quadratic substitution linking the modified flow to the coupled
// third-order system, its linearization, the modified flow itself, and the
// instantaneous intertwining certificate.

#include <ckdv/structures.hpp>

namespace ckdv {

// components are (mu, nu)
using ModifiedFieldPair = FieldPair;

// u = mu_x - mu^2/6 - (lambda/6) nu^2,  v = nu_x - (1/3) mu nu
inline FieldPair miura_map(const ModifiedFieldPair& m, const SystemParams& p) {
    const Field& mu = m.u;
    const Field& nu = m.v;
    Field u = deriv(mu);
    Field v = deriv(nu);
    for (int j = 0; j < mu.n(); ++j) {
        u[j] += -mu[j] * mu[j] / 6.0 - p.lambda * nu[j] * nu[j] / 6.0;
        v[j] += -mu[j] * nu[j] / 3.0;
    }
    return {std::move(u), std::move(v)};
}

// directional derivative of miura_map at m along t
inline FieldPair miura_frechet(const ModifiedFieldPair& m, const SystemParams& p,
                               const ModifiedFieldPair& t) {
    const Field& mu = m.u;
    const Field& nu = m.v;
    Field du = deriv(t.u);
    Field dv = deriv(t.v);
    for (int j = 0; j < mu.n(); ++j) {
        du[j] += -(1.0 / 3.0) * mu[j] * t.u[j] - (p.lambda / 3.0) * nu[j] * t.v[j];
        dv[j] += -(1.0 / 3.0) * (mu[j] * t.v[j] + nu[j] * t.u[j]);
    }
    return {std::move(du), std::move(dv)};
}

// modified flow, solved for the time derivatives:
//   mu_t = -mu_xxx + (1/6) mu^2 mu_x + (lambda/6) nu^2 mu_x + (lambda/3) mu nu nu_x
//   nu_t = -nu_xxx + (1/6) mu^2 nu_x + (lambda/6) nu^2 nu_x + (1/3) mu nu mu_x
inline ModifiedFieldPair mkdv_rhs(const ModifiedFieldPair& m, const SystemParams& p) {
    const Field& mu = m.u;
    const Field& nu = m.v;
    Field mux = deriv(mu), nux = deriv(nu);
    Field mut = -1.0 * deriv(mu, 3);
    Field nut = -1.0 * deriv(nu, 3);
    for (int j = 0; j < mu.n(); ++j) {
        double a = mu[j], b = nu[j];
        double c2 = a * a / 6.0 + p.lambda * b * b / 6.0;
        mut[j] += c2 * mux[j] + (p.lambda / 3.0) * a * b * nux[j];
        nut[j] += c2 * nux[j] + (1.0 / 3.0) * a * b * mux[j];
    }
    return {std::move(mut), std::move(nut)};
}

// || frechet(m)[modified rhs(m)] - coupled rhs(miura(m)) ||oo, normalized;
// zero iff the substitution intertwines the two flows at m
inline double intertwining_defect(const ModifiedFieldPair& m, const SystemParams& p) {
    FieldPair lhs = miura_frechet(m, p, mkdv_rhs(m, p));
    FieldPair rhs = coupled_kdv_rhs(p, miura_map(m, p));
    return max_norm(lhs - rhs) / std::max(1.0, max_norm(rhs));
}

} // namespace ckdv
