#pragma once

// Finite-dimensional reconstruction of the constrained-Hamiltonian route to
// the closed-form brackets. The potentials and their conjugate momenta live
// on the grid, the two second-class constraints are assembled per variant,
// their (state-independent) bracket matrix is pseudo-inverted, and the induced
// bracket of the observables is compared block-by-block against the operator
// schedules of the poisson-structures layer.

#include <ckdv/miura.hpp>

#include <Eigen/Dense>

#include <array>
#include <utility>

namespace ckdv {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// (w, y, p, q) for the first family, (sigma, rho, alpha, beta) for the
// modified one
struct PhaseSpaceState {
    Field pos1, pos2, mom1, mom2;
    explicit PhaseSpaceState(const GridSpec& g) : pos1(g), pos2(g), mom1(g), mom2(g) {}
};

struct ConstraintVariant {
    LagrangianId id = LagrangianId::L1;
    double lambda = -1.0;
    double k = 0.5;
};

inline bool is_modified_variant(LagrangianId id) {
    return id == LagrangianId::L1M || id == LagrangianId::L2M || id == LagrangianId::LkM;
}

// every variant fits one constraint schedule; this is its weight
inline double constraint_k(const ConstraintVariant& v) {
    switch (v.id) {
        case LagrangianId::L1: case LagrangianId::L1M: return 1.0;
        case LagrangianId::L2: case LagrangianId::L2M: return 0.0;
        default: return v.k;
    }
}

inline void check_variant(const ConstraintVariant& v) {
    if (!std::isfinite(v.lambda)) throw std::invalid_argument("lambda must be finite");
    switch (v.id) {
        case LagrangianId::L1: case LagrangianId::L1M:
            require_nonzero_lambda(v.lambda, "first-member constraints");
            break;
        case LagrangianId::Lk: case LagrangianId::LkM:
            require_valid_pencil({v.lambda, v.k}, "pencil constraints");
            break;
        default: break; // second members are parameter-free
    }
}

// phi1 = m1 + (k/2) d(p1) + ((1-k)/2) d(p2)
// phi2 = m2 + (lambda k/2) d(p2) + ((1-k)/2) d(p1)
// The modified family is printed with the '+' missing in front of the
// (lambda k/2) term of phi2; it is restored here by analogy with the pencil
// constraints, and the kernel comparison adjudicates the choice.
inline std::pair<Field, Field> build_constraints(const ConstraintVariant& v,
                                                 const PhaseSpaceState& s) {
    check_variant(v);
    double k = constraint_k(v);
    Field d1 = deriv(s.pos1);
    Field d2 = deriv(s.pos2);
    Field phi1 = s.mom1 + (k / 2.0) * d1 + ((1.0 - k) / 2.0) * d2;
    Field phi2 = s.mom2 + (v.lambda * k / 2.0) * d2 + ((1.0 - k) / 2.0) * d1;
    return {std::move(phi1), std::move(phi2)};
}

namespace detail {

// dense matrix of a one-field linear map, column by column
template <typename F>
Mat matrix_of(const GridSpec& g, F&& op) {
    Mat m(g.n, g.n);
    Field e(g);
    for (int j = 0; j < g.n; ++j) {
        std::fill(e.a.begin(), e.a.end(), 0.0);
        e[j] = 1.0;
        Field col = op(e);
        for (int i = 0; i < g.n; ++i) m(i, j) = col[i];
    }
    return m;
}

// mode-wise inverse of the first derivative: divide by ik, zero the constant
// and fold modes
inline Field antiderivative(const Field& f) {
    Spectrum s = rfft(f);
    const GridSpec& g = f.grid;
    s[0] = 0.0;
    for (int m = 1; m < g.n / 2; ++m) s[m] /= std::complex<double>(0.0, wavenumber(g, m));
    s[g.n / 2] = 0.0;
    return irfft(g, s);
}

// coupling matrix of the constraint schedule and its inverse
inline std::array<double, 4> coupling_s(const ConstraintVariant& v) {
    double k = constraint_k(v);
    return {k, 1.0 - k, 1.0 - k, v.lambda * k};
}

inline std::array<double, 4> coupling_s_inverse(const ConstraintVariant& v) {
    auto s = coupling_s(v);
    double det = s[0] * s[3] - s[1] * s[2];
    return {s[3] / det, -s[1] / det, -s[2] / det, s[0] / det};
}

inline void check_dense_guard(const GridSpec& g) {
    if (g.n > 1024) throw std::invalid_argument("dense bracket assembly is capped at n = 1024");
}

} // namespace detail

// spectral first-derivative matrix; antisymmetrized so the circulant's odd
// symmetry is exact rather than at rounding
inline Mat derivative_matrix(const GridSpec& g) {
    Mat d = detail::matrix_of(g, [](const Field& e) { return deriv(e); });
    return 0.5 * (d - d.transpose().eval());
}

inline Mat antiderivative_matrix(const GridSpec& g) {
    Mat d = detail::matrix_of(g, [](const Field& e) { return detail::antiderivative(e); });
    return 0.5 * (d - d.transpose().eval());
}

struct ConstraintMatrix {
    GridSpec grid;
    ConstraintVariant variant;
    Mat full; // 2n x 2n, (1/dx) S (x) D; state-independent for every variant
};

inline ConstraintMatrix constraint_matrix(const ConstraintVariant& v, const GridSpec& g) {
    check_variant(v);
    detail::check_dense_guard(g);
    Mat d = derivative_matrix(g);
    auto s = detail::coupling_s(v);
    int n = g.n;
    Mat full(2 * n, 2 * n);
    double inv_dx = 1.0 / g.spacing();
    full.topLeftCorner(n, n) = (s[0] * inv_dx) * d;
    full.topRightCorner(n, n) = (s[1] * inv_dx) * d;
    full.bottomLeftCorner(n, n) = (s[2] * inv_dx) * d;
    full.bottomRightCorner(n, n) = (s[3] * inv_dx) * d;
    return {g, v, std::move(full)};
}

enum class PinvConvention { moore_penrose, spectral };

// The spectral convention deliberately adds O(1) rank-one terms along the four
// kernel directions (per-block constant and fold modes). They play the role of
// the arbitrary integration constant in the antiderivative kernel: the bracket
// blocks must not see them, and that insensitivity is a tested invariant.
inline Mat constraint_matrix_pinv(const ConstraintMatrix& c, PinvConvention conv) {
    int n = c.grid.n;
    if (conv == PinvConvention::moore_penrose) {
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(c.full);
        return cod.pseudoInverse();
    }
    Mat dplus = antiderivative_matrix(c.grid);
    auto si = detail::coupling_s_inverse(c.variant);
    double dx = c.grid.spacing();
    Mat out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = (si[0] * dx) * dplus;
    out.topRightCorner(n, n) = (si[1] * dx) * dplus;
    out.bottomLeftCorner(n, n) = (si[2] * dx) * dplus;
    out.bottomRightCorner(n, n) = (si[3] * dx) * dplus;
    Vec constant = Vec::Ones(n) / std::sqrt(double(n));
    Vec fold(n);
    for (int i = 0; i < n; ++i) fold(i) = (i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(double(n));
    const double gammas[4] = {0.37, -1.2, 2.5, 0.9};
    const Vec* dirs[2] = {&constant, &fold};
    for (int b = 0; b < 2; ++b) {
        for (int w = 0; w < 2; ++w) {
            Vec z = Vec::Zero(2 * n);
            z.segment(b * n, n) = *dirs[w];
            out += gammas[2 * b + w] * z * z.transpose();
        }
    }
    return out;
}

// rows {obs_i, phi_a}_PB of each observable against the two constraints,
// stacked as n x 2n. First family: u = d(pos1), v = d(pos2). Modified family:
// the observables are the Miura images, so the rows are the Frechet rows of
// the map at the frozen point (mu, nu).
struct ObservableRows {
    Mat u, v;
};

inline ObservableRows observable_rows(const ConstraintVariant& v, const GridSpec& g,
                                      const ModifiedFieldPair& frozen) {
    int n = g.n;
    Mat d = derivative_matrix(g);
    double inv_dx = 1.0 / g.spacing();
    ObservableRows rows{Mat(n, 2 * n), Mat(n, 2 * n)};
    if (!is_modified_variant(v.id)) {
        rows.u << (inv_dx * d), Mat::Zero(n, n);
        rows.v << Mat::Zero(n, n), (inv_dx * d);
        return rows;
    }
    Vec mu(n), nu(n);
    for (int i = 0; i < n; ++i) { mu(i) = frozen.u[i]; nu(i) = frozen.v[i]; }
    Mat e = d * d - (1.0 / 3.0) * mu.asDiagonal() * d;
    Mat fu = (-v.lambda / 3.0) * (nu.asDiagonal() * d);
    Mat fv = (-1.0 / 3.0) * (nu.asDiagonal() * d);
    rows.u << e, fu;
    rows.v << fv, e;
    rows.u *= inv_dx;
    rows.v *= inv_dx;
    return rows;
}

struct BracketBlocks {
    Mat uu, uv, vu, vv; // literal {obs_i, obs_j}_DB values
};

inline BracketBlocks dirac_bracket_matrix(const ConstraintVariant& v, const GridSpec& g,
                                          const ModifiedFieldPair& frozen,
                                          PinvConvention conv = PinvConvention::moore_penrose) {
    check_variant(v);
    detail::check_dense_guard(g);
    ConstraintMatrix c = constraint_matrix(v, g);
    Mat cinv = constraint_matrix_pinv(c, conv);
    ObservableRows rows = observable_rows(v, g, frozen);
    // observables are position-only, so the plain bracket block vanishes and
    // {F,G}_DB = -{F,phi} C^- {phi,G} = +A_F C^- A_G^T
    BracketBlocks b;
    Mat cu = cinv * rows.u.transpose();
    Mat cv = cinv * rows.v.transpose();
    b.uu = rows.u * cu;
    b.uv = rows.u * cv;
    b.vu = rows.v * cu;
    b.vv = rows.v * cv;
    return b;
}

inline BracketBlocks dirac_bracket_matrix(const ConstraintVariant& v, const GridSpec& g,
                                          PinvConvention conv = PinvConvention::moore_penrose) {
    return dirac_bracket_matrix(v, g, ModifiedFieldPair(g), conv);
}

// the operator schedule each variant must reproduce
inline StructureSpec matching_structure(const ConstraintVariant& v) {
    switch (v.id) {
        case LagrangianId::L1: return {StructureId::J1, v.lambda, v.k};
        case LagrangianId::L2: return {StructureId::J0, v.lambda, v.k};
        case LagrangianId::Lk: return {StructureId::Jk, v.lambda, v.k};
        case LagrangianId::L1M: return {StructureId::JM1, v.lambda, v.k};
        case LagrangianId::L2M: return {StructureId::JM0, v.lambda, v.k};
        default: return {StructureId::JkM, v.lambda, v.k};
    }
}

struct BlockDefects {
    int n = 0;
    double uu = 0.0, uv = 0.0, vu = 0.0, vv = 0.0;
    double convention_gap = 0.0; // Moore-Penrose vs spectral pinv, on the blocks
    double antisym = 0.0;        // || B + B^T || relative to || B ||
    double max_defect() const { return std::max(std::max(uu, uv), std::max(vu, vv)); }
};

struct KernelComparison {
    ConstraintVariant variant;
    std::vector<BlockDefects> per_grid;
    std::array<double, 4> orders{}; // uu, uv, vu, vv; 0 when pinned at rounding
    bool at_rounding = false;
    double max_defect = 0.0;
};

namespace detail {

inline Vec to_vec(const Field& f) {
    Vec out(f.n());
    for (int i = 0; i < f.n(); ++i) out(i) = f[i];
    return out;
}

inline double block_defect(const Mat& block, const Vec& probe, const Field& want, double dx) {
    Vec got = dx * (block * probe);
    double num = 0.0;
    for (int i = 0; i < want.n(); ++i) num = std::max(num, std::abs(got(i) - want[i]));
    return num / std::max(1.0, max_norm(want));
}

} // namespace detail

// compare the assembled bracket blocks against the closed-form operator
// schedule on band-limited mean-zero probes; field-dependent blocks are frozen
// at a seeded (mu, nu) sample
inline BlockDefects dirac_kernel_defects(const ConstraintVariant& v, const GridSpec& g,
                                         uint64_t seed = 2026u) {
    check_variant(v);
    ModifiedFieldPair frozen = random_pair(g, seed);
    BracketBlocks mp = dirac_bracket_matrix(v, g, frozen, PinvConvention::moore_penrose);
    BracketBlocks sp = dirac_bracket_matrix(v, g, frozen, PinvConvention::spectral);

    StructureSpec spec = matching_structure(v);
    FieldPair coeffs = is_modified_variant(v.id) ? miura_map(frozen, SystemParams{v.lambda})
                                                 : FieldPair(g);
    FieldPair probe = random_pair(g, seed + 1);
    Vec pu = detail::to_vec(probe.u);
    Vec pv = detail::to_vec(probe.v);
    double dx = g.spacing();

    Field zero(g);
    FieldPair left = apply_structure(spec, coeffs, {probe.u, zero});
    FieldPair right = apply_structure(spec, coeffs, {zero, probe.v});

    BlockDefects d;
    d.n = g.n;
    d.uu = detail::block_defect(mp.uu, pu, left.u, dx);
    d.vu = detail::block_defect(mp.vu, pu, left.v, dx);
    d.uv = detail::block_defect(mp.uv, pv, right.u, dx);
    d.vv = detail::block_defect(mp.vv, pv, right.v, dx);

    auto gap = [&](const Mat& a, const Mat& b, const Vec& p, const Field& ref) {
        Vec diff = dx * ((a - b) * p);
        double num = 0.0;
        for (int i = 0; i < g.n; ++i) num = std::max(num, std::abs(diff(i)));
        return num / std::max(1.0, max_norm(ref));
    };
    d.convention_gap = std::max(std::max(gap(mp.uu, sp.uu, pu, left.u), gap(mp.uv, sp.uv, pv, right.u)),
                                std::max(gap(mp.vu, sp.vu, pu, left.v), gap(mp.vv, sp.vv, pv, right.v)));

    Mat full(2 * g.n, 2 * g.n);
    full.topLeftCorner(g.n, g.n) = mp.uu;
    full.topRightCorner(g.n, g.n) = mp.uv;
    full.bottomLeftCorner(g.n, g.n) = mp.vu;
    full.bottomRightCorner(g.n, g.n) = mp.vv;
    double scale = full.cwiseAbs().maxCoeff();
    d.antisym = (full + full.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, scale);
    return d;
}

inline KernelComparison kernel_comparison(const ConstraintVariant& v,
                                          const std::vector<GridSpec>& grids,
                                          uint64_t seed = 2026u) {
    if (grids.size() < 3) throw std::invalid_argument("kernel comparison needs at least 3 grids");
    for (size_t i = 1; i < grids.size(); ++i) {
        if (grids[i].n <= grids[i - 1].n || grids[i].length != grids[i - 1].length)
            throw std::invalid_argument("grid sequence must share the length and increase n");
    }
    KernelComparison out;
    out.variant = v;
    for (const GridSpec& g : grids) out.per_grid.push_back(dirac_kernel_defects(v, g, seed));
    for (const BlockDefects& d : out.per_grid) out.max_defect = std::max(out.max_defect, d.max_defect());

    // a convergence order is only meaningful above the rounding floor
    const double floor = 1e-13;
    out.at_rounding = out.max_defect < floor;
    auto fit = [&](auto pick) {
        const BlockDefects& a = out.per_grid.front();
        const BlockDefects& b = out.per_grid.back();
        if (pick(a) < floor || pick(b) < floor) return 0.0;
        return std::log(pick(a) / pick(b)) /
               std::log(double(b.n) / double(a.n));
    };
    out.orders = {fit([](const BlockDefects& d) { return d.uu; }),
                  fit([](const BlockDefects& d) { return d.uv; }),
                  fit([](const BlockDefects& d) { return d.vu; }),
                  fit([](const BlockDefects& d) { return d.vv; })};
    return out;
}

// {F, phi_a}_DB must vanish for any phase-space functional F; at finite n this
// holds on the range of C, so probes are band-limited mean-zero draws (the
// constant and fold modes are absent from the decaying function space the
// derivation lives in)
inline double casimir_of_constraints_check(const ConstraintVariant& v, const GridSpec& g,
                                           int probes, uint64_t seed = 7u) {
    check_variant(v);
    detail::check_dense_guard(g);
    ConstraintMatrix c = constraint_matrix(v, g);
    Mat cinv = constraint_matrix_pinv(c, PinvConvention::moore_penrose);
    int n = g.n;
    Mat d = derivative_matrix(g);
    double k = constraint_k(v);
    double inv_dx = 1.0 / g.spacing();
    // pairing rows {state_s, phi_a}: positions hit the momentum part of phi,
    // momenta hit the derivative part
    Mat gmat(4 * n, 2 * n);
    gmat.setZero();
    gmat.block(0, 0, n, n) = inv_dx * Mat::Identity(n, n);
    gmat.block(n, n, n, n) = inv_dx * Mat::Identity(n, n);
    gmat.block(2 * n, 0, n, n) = (k / 2.0 * inv_dx) * d;
    gmat.block(2 * n, n, n, n) = ((1.0 - k) / 2.0 * inv_dx) * d;
    gmat.block(3 * n, 0, n, n) = ((1.0 - k) / 2.0 * inv_dx) * d;
    gmat.block(3 * n, n, n, n) = (v.lambda * k / 2.0 * inv_dx) * d;

    Mat residual = Mat::Identity(2 * n, 2 * n) - cinv * c.full;
    double worst = 0.0;
    for (int t = 0; t < probes; ++t) {
        FieldPair za = random_pair(g, seed + 10 * uint64_t(t));
        FieldPair zb = random_pair(g, seed + 10 * uint64_t(t) + 5);
        Vec z(4 * n);
        z.segment(0, n) = detail::to_vec(za.u);
        z.segment(n, n) = detail::to_vec(za.v);
        z.segment(2 * n, n) = detail::to_vec(zb.u);
        z.segment(3 * n, n) = detail::to_vec(zb.v);
        Eigen::RowVectorXd pairing = z.transpose() * gmat;
        Eigen::RowVectorXd defect = pairing * residual;
        double scale = std::max(1.0, pairing.cwiseAbs().maxCoeff());
        worst = std::max(worst, defect.cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

} // namespace ckdv
