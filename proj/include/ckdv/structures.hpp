#pragma once

// The six bracket operators of the coupled third-order system, encoded as
// 2x2 matrices of differential operators, plus the structural checks that
// certify them: Hamilton-equation consistency, skew-adjointness, the Jacobi
// identity, pencil decomposition, compatibility, the complexification
// identities, and Casimir annihilation.

#include <ckdv/functionals.hpp>
#include <ckdv/grid.hpp>

#include <utility>

namespace ckdv {

// ---------------------------------------------------------------------------
// flow right-hand side and the coupling rescale

inline FieldPair coupled_kdv_rhs(const SystemParams& p, const FieldPair& f) {
    const Field& u = f.u;
    const Field& v = f.v;
    Field ut = -1.0 * hadamard(u, deriv(u)) - deriv(u, 3);
    axpy(ut, -p.lambda, hadamard(v, deriv(v)));
    Field vt = -1.0 * deriv(hadamard(u, v)) - deriv(v, 3);
    return {std::move(ut), std::move(vt)};
}

// Second-component rescale (u, v) -> (u, v / sqrt|lambda|).  Interpreted as a
// state map from the unit-coupling system at sign(lambda) to the coupling-
// lambda system: if (u, v) solves the system with coupling sign(lambda), the
// image solves the system with coupling lambda, and because the map is linear
// it is its own tangent map, so
//   coupled_kdv_rhs(lambda, rescale(z)) = rescale(coupled_kdv_rhs(sign, z)).
inline FieldPair mkdv_like_rescale(const FieldPair& f, const SystemParams& p) {
    require_nonzero_lambda(p.lambda, "rescale");
    double s = 1.0 / std::sqrt(std::abs(p.lambda));
    return {f.u, s * f.v};
}

// ---------------------------------------------------------------------------
// bracket operators
//
// Every matrix entry of every structure is a linear combination of three
// skew-adjoint atoms acting on a covector component g:
//   dx: g_x
//   tu: g_xxx + (1/3) u_x g + (2/3) u g_x
//   mv: (1/3) v_x g + (2/3) v g_x
// The lower-left entry is derived from the upper-right by the antisymmetry
// transpose rule J_vu = -(J_uv)^adj; since each atom is skew-adjoint this
// makes J_vu carry the same coefficients as J_uv.

enum class StructureId { J1, J0, Jk, JM1, JM0, JkM };

struct StructureSpec {
    StructureId id = StructureId::J1;
    double lambda = -1.0;
    double k = 0.5; // read only by Jk / JkM
};

inline const char* name(StructureId id) {
    switch (id) {
        case StructureId::J1: return "J1";
        case StructureId::J0: return "J0";
        case StructureId::Jk: return "Jk";
        case StructureId::JM1: return "JM1";
        case StructureId::JM0: return "JM0";
        case StructureId::JkM: return "JkM";
    }
    return "?";
}

struct EntryCoeffs {
    double dx = 0, tu = 0, mv = 0;
};

struct StructureSchedule {
    EntryCoeffs uu, uv, vv; // vu = uv by the transpose rule
};

inline StructureSchedule operator+(const StructureSchedule& a, const StructureSchedule& b) {
    auto add = [](EntryCoeffs x, const EntryCoeffs& y) {
        x.dx += y.dx;
        x.tu += y.tu;
        x.mv += y.mv;
        return x;
    };
    return {add(a.uu, b.uu), add(a.uv, b.uv), add(a.vv, b.vv)};
}

inline bool is_field_dependent(const StructureSchedule& s) {
    for (const EntryCoeffs* e : {&s.uu, &s.uv, &s.vv})
        if (e->tu != 0.0 || e->mv != 0.0) return true;
    return false;
}

inline StructureSchedule schedule(const StructureSpec& spec) {
    const double lambda = spec.lambda;
    switch (spec.id) {
        case StructureId::J1:
            require_nonzero_lambda(lambda, name(spec.id));
            return {{-1, 0, 0}, {0, 0, 0}, {-1.0 / lambda, 0, 0}};
        case StructureId::J0:
            return {{0, 0, 0}, {-1, 0, 0}, {0, 0, 0}};
        case StructureId::Jk: {
            PencilParams p{lambda, spec.k};
            require_valid_pencil(p, name(spec.id));
            double d = p.delta();
            return {{lambda * spec.k / d, 0, 0},
                    {-(1.0 - spec.k) / d, 0, 0},
                    {spec.k / d, 0, 0}};
        }
        case StructureId::JM1:
            require_nonzero_lambda(lambda, name(spec.id));
            return {{0, 1, 0}, {0, 0, 1}, {0, 1.0 / lambda, 0}};
        case StructureId::JM0:
            return {{0, 0, lambda}, {0, 1, 0}, {0, 0, 1}};
        case StructureId::JkM: {
            // decomposition form a * (lambda != 0 member) + b * (any-lambda
            // member); written with the 1/lambda of the first member already
            // cancelled, so the whole schedule stays finite at lambda = 0
            PencilParams p{lambda, spec.k};
            require_valid_pencil(p, name(spec.id));
            double d = p.delta();
            double a = -lambda * spec.k / d;
            double b = (1.0 - spec.k) / d;
            return {{0, a, b * lambda}, {0, b, a}, {0, -spec.k / d, b}};
        }
    }
    throw std::logic_error("unreachable");
}

namespace detail {

inline Field m_atom(const Field& w, const Field& g) {
    Field out = (1.0 / 3.0) * hadamard(deriv(w), g);
    out = out + (2.0 / 3.0) * hadamard(w, deriv(g));
    return out;
}

inline Field t_atom(const Field& u, const Field& g) {
    Field out = deriv(g, 3);
    return out + m_atom(u, g);
}

inline void apply_entry(Field& acc, const EntryCoeffs& e, const FieldPair& fields,
                        const Field& g) {
    if (e.dx != 0.0) axpy(acc, e.dx, deriv(g));
    if (e.tu != 0.0) axpy(acc, e.tu, t_atom(fields.u, g));
    if (e.mv != 0.0) axpy(acc, e.mv, m_atom(fields.v, g));
}

} // namespace detail

inline FieldPair apply_schedule(const StructureSchedule& s, const FieldPair& fields,
                                const FieldPair& covector) {
    FieldPair out(fields.grid());
    detail::apply_entry(out.u, s.uu, fields, covector.u);
    detail::apply_entry(out.u, s.uv, fields, covector.v);
    detail::apply_entry(out.v, s.uv, fields, covector.u); // transpose rule
    detail::apply_entry(out.v, s.vv, fields, covector.v);
    return out;
}

inline FieldPair apply_structure(const StructureSpec& spec, const FieldPair& fields,
                                 const FieldPair& covector) {
    return apply_schedule(schedule(spec), fields, covector);
}

// ---------------------------------------------------------------------------
// Hamilton equations

enum class FlowMode { strict, exploratory };

inline bool matched_pair(StructureId s, FunctionalId h) {
    switch (s) {
        case StructureId::J1: return h == FunctionalId::H1;
        case StructureId::J0: return h == FunctionalId::H2;
        case StructureId::Jk: return h == FunctionalId::Hk;
        case StructureId::JM1: return h == FunctionalId::H1M;
        case StructureId::JM0: return h == FunctionalId::H2M;
        case StructureId::JkM: return h == FunctionalId::HkM;
    }
    return false;
}

inline FieldPair hamiltonian_flow(const StructureSpec& s, const FunctionalSpec& h,
                                  const FieldPair& fields, FlowMode mode = FlowMode::strict) {
    if (mode == FlowMode::strict) {
        bool ok = matched_pair(s.id, h.id) && s.lambda == h.lambda;
        if (ok && (s.id == StructureId::Jk || s.id == StructureId::JkM)) ok = s.k == h.k;
        if (!ok)
            throw std::invalid_argument(
                std::string("hamiltonian_flow: ") + name(s.id) + " and " + name(h.id) +
                " (or their parameters) are not a generating pair; "
                "use exploratory mode to combine them anyway");
    }
    return apply_structure(s, fields, variational_derivative(h, fields));
}

// ---------------------------------------------------------------------------
// structural defects (all reported normalized)

inline double skew_defect(const StructureSchedule& s, const FieldPair& fields,
                          const FieldPair& f, const FieldPair& g) {
    double raw = inner(f, apply_schedule(s, fields, g)) + inner(apply_schedule(s, fields, f), g);
    double denom = l2_norm(f) * l2_norm(g);
    return denom > 0 ? std::abs(raw) / denom : std::abs(raw);
}

inline double skew_defect(const StructureSpec& spec, const FieldPair& fields,
                          const FieldPair& f, const FieldPair& g) {
    return skew_defect(schedule(spec), fields, f, g);
}

namespace detail {

// directional derivative of the schedule coefficients along a state
// direction s, applied to a covector component: the tu atom varies by the
// mv-pattern atom in s_u, the mv atom by the same pattern in s_v
inline void apply_entry_variation(Field& acc, const EntryCoeffs& e, const FieldPair& dir,
                                  const Field& g) {
    if (e.tu != 0.0) axpy(acc, e.tu, m_atom(dir.u, g));
    if (e.mv != 0.0) axpy(acc, e.mv, m_atom(dir.v, g));
}

inline FieldPair apply_schedule_variation(const StructureSchedule& s, const FieldPair& dir,
                                          const FieldPair& covector) {
    FieldPair out(dir.grid());
    apply_entry_variation(out.u, s.uu, dir, covector.u);
    apply_entry_variation(out.u, s.uv, dir, covector.v);
    apply_entry_variation(out.v, s.uv, dir, covector.u);
    apply_entry_variation(out.v, s.vv, dir, covector.v);
    return out;
}

} // namespace detail

// Cyclic trilinear Jacobi defect on constant covectors f, g, h:
//   sum over cyclic (f,g,h) of < f, DJ[J g] h >
// where DJ[s] is the derivative of the operator coefficients along the state
// direction s.  Identically zero when no coefficient depends on the fields.
inline double jacobi_defect(const StructureSchedule& s, const FieldPair& fields,
                            const FieldPair& f, const FieldPair& g, const FieldPair& h) {
    auto term = [&](const FieldPair& a, const FieldPair& b, const FieldPair& c) {
        FieldPair dir = apply_schedule(s, fields, b);
        return inner(a, detail::apply_schedule_variation(s, dir, c));
    };
    double t1 = term(f, g, h);
    double t2 = term(g, h, f);
    double t3 = term(h, f, g);
    double scale = std::max({1.0, std::abs(t1), std::abs(t2), std::abs(t3)});
    return std::abs(t1 + t2 + t3) / scale;
}

inline double jacobi_defect(const StructureSpec& spec, const FieldPair& fields,
                            const FieldPair& f, const FieldPair& g, const FieldPair& h) {
    return jacobi_defect(schedule(spec), fields, f, g, h);
}

// ---------------------------------------------------------------------------
// pencil decomposition

// weights (a, b) with member_k = a * member_1 + b * member_0, shared by both
// families
inline std::pair<double, double> pencil_coefficients(const PencilParams& p) {
    require_valid_pencil(p, "pencil");
    double d = p.delta();
    return {-p.lambda * p.k / d, (1.0 - p.k) / d};
}

// At lambda = 0 the k = 1 member degenerates, and the pencil is spanned
// instead by the k = 1/2 and k = 0 members with weights (c1, c2).
inline std::pair<double, double> lambda0_basis_coefficients(double k) {
    if (k == 1.0)
        throw std::invalid_argument("lambda0 basis: k = 1 is outside the pencil at lambda = 0");
    double om = 1.0 - k;
    return {k / (2.0 * om * om), (1.0 - 2.0 * k) / (om * om)};
}

// Equal-coefficient weight at lambda = 0: c1(k) = c2(k) clears to
// k = 2 (1 - 2k), i.e. k = 2/5.
inline double lambda0_equal_coefficient_weight() { return 2.0 / 5.0; }

// |c1 - c2| normalized, for reporting candidate weights
inline double lambda0_coefficient_gap(double k) {
    auto [c1, c2] = lambda0_basis_coefficients(k);
    return std::abs(c1 - c2) / std::max({1.0, std::abs(c1), std::abs(c2)});
}

enum class StructureFamily { first_order, modified };

inline StructureId pencil_member(StructureFamily fam) {
    return fam == StructureFamily::first_order ? StructureId::Jk : StructureId::JkM;
}

inline double pencil_defect(StructureFamily fam, const PencilParams& p, const FieldPair& fields,
                            const FieldPair& covector) {
    StructureSpec member{pencil_member(fam), p.lambda, p.k};
    StructureSpec one{fam == StructureFamily::first_order ? StructureId::J1 : StructureId::JM1,
                      p.lambda, 0};
    StructureSpec zero{fam == StructureFamily::first_order ? StructureId::J0 : StructureId::JM0,
                       p.lambda, 0};
    auto [a, b] = pencil_coefficients(p);
    FieldPair lhs = apply_structure(member, fields, covector);
    FieldPair rhs = a * apply_structure(one, fields, covector) +
                    b * apply_structure(zero, fields, covector);
    return max_norm(lhs - rhs) / std::max(1.0, max_norm(lhs));
}

// lambda = 0 variant against the (k = 1/2, k = 0) basis
inline double pencil_defect_lambda0(StructureFamily fam, double k, const FieldPair& fields,
                                    const FieldPair& covector) {
    StructureSpec member{pencil_member(fam), 0.0, k};
    StructureSpec half{pencil_member(fam), 0.0, 0.5};
    StructureSpec zero{pencil_member(fam), 0.0, 0.0};
    auto [c1, c2] = lambda0_basis_coefficients(k);
    FieldPair lhs = apply_structure(member, fields, covector);
    FieldPair rhs = c1 * apply_structure(half, fields, covector) +
                    c2 * apply_structure(zero, fields, covector);
    return max_norm(lhs - rhs) / std::max(1.0, max_norm(lhs));
}

// ---------------------------------------------------------------------------
// complexification at lambda = -1
//
// Writing z = u + iv, the first-order pencil member satisfies two identities
// for every k: the mixed bracket {z, conj z} vanishes (block reading:
// J_uu + J_vv = 0 and J_uv - J_vu = 0), and the like bracket {z, z}
// recombines to a pure first-derivative kernel whose block sum
// (J_uu - J_vv) + (J_uv + J_vu) equals -2/(k^2 + (1-k)^2) d/dx.  The two
// summands carry -2k/D and -2(1-k)/D individually; the struct reports them.

struct ComplexificationDefect {
    double holo = 0;     // mixed-bracket defect
    double anti = 0;     // like-bracket defect against the closed-form kernel
    double part_diag = 0;  // coefficient -2k/D of the diagonal recombination
    double part_cross = 0; // coefficient -2(1-k)/D of the cross recombination
};

inline ComplexificationDefect complexification_defect(double k, const FieldPair& fields,
                                                      const FieldPair& f) {
    StructureSpec spec{StructureId::Jk, -1.0, k};
    StructureSchedule s = schedule(spec);
    double delta = PencilParams{-1.0, k}.delta(); // k^2 + (1-k)^2 > 0

    auto entry = [&](const EntryCoeffs& e, const Field& g) {
        Field out(fields.grid());
        detail::apply_entry(out, e, fields, g);
        return out;
    };
    double denom = std::max(1.0, (2.0 / delta) * max_norm(deriv(f.u)));

    ComplexificationDefect out;
    // mixed bracket: the cross difference J_uv - J_vu vanishes by the
    // transpose-rule representation, so its numeric content is the diagonal
    // sum J_uu + J_vv (checked on the second covector component)
    Field mixed_diag = entry(s.uu, f.v) + entry(s.vv, f.v);
    out.holo = max_norm(mixed_diag) / denom;

    // like bracket: (uu - vv) + (uv + vu) against -2/D g_x
    Field like = entry(s.uu, f.u) - entry(s.vv, f.u) + 2.0 * entry(s.uv, f.u);
    Field ref = (-2.0 / delta) * deriv(f.u);
    out.anti = max_norm(like - ref) / denom;

    out.part_diag = -2.0 * k / delta;
    out.part_cross = -2.0 * (1.0 - k) / delta;
    return out;
}

// ---------------------------------------------------------------------------
// Casimir candidates

inline double casimir_defect(const StructureSpec& spec, const FieldPair& fields,
                             const FunctionalSpec& candidate) {
    FieldPair grad = variational_derivative(candidate, fields);
    return max_norm(apply_structure(spec, fields, grad));
}

} // namespace ckdv
