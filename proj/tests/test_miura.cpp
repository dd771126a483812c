#include <catch2/catch_amalgamated.hpp>

#include <ckdv/miura.hpp>

#include <cmath>

using namespace ckdv;

namespace {

ModifiedFieldPair sample_modified(const GridSpec& g, uint64_t seed, double amp = 0.8) {
    RandomFieldOptions opt;
    opt.amplitude = amp;
    return random_pair(g, seed, opt);
}

// term-by-term oracle for the modified flow, grouped differently on purpose
ModifiedFieldPair mkdv_oracle(const ModifiedFieldPair& m, const SystemParams& p) {
    const Field& mu = m.u;
    const Field& nu = m.v;
    Field mu2 = hadamard(mu, mu);
    Field nu2 = hadamard(nu, nu);
    Field munu = hadamard(mu, nu);
    Field mut = -1.0 * deriv(mu, 3) + (1.0 / 6.0) * hadamard(mu2, deriv(mu))
              + (p.lambda / 6.0) * hadamard(nu2, deriv(mu))
              + (p.lambda / 3.0) * hadamard(munu, deriv(nu));
    Field nut = -1.0 * deriv(nu, 3) + (1.0 / 6.0) * hadamard(mu2, deriv(nu))
              + (p.lambda / 6.0) * hadamard(nu2, deriv(nu))
              + (1.0 / 3.0) * hadamard(munu, deriv(mu));
    return {std::move(mut), std::move(nut)};
}

} // namespace

TEST_CASE("miura map basics") {
    GridSpec g = make_grid(128, 30.0);
    SystemParams p{-1.0};

    SECTION("zero maps to zero") {
        FieldPair out = miura_map(FieldPair(g), p);
        CHECK(max_norm(out.u) == 0.0);
        CHECK(max_norm(out.v) == 0.0);
    }

    SECTION("nu = 0 gives the scalar substitution") {
        ModifiedFieldPair m(g);
        m.u = random_band_limited(g, 11u);
        FieldPair out = miura_map(m, p);
        Field want = deriv(m.u) - (1.0 / 6.0) * hadamard(m.u, m.u);
        CHECK(max_norm(out.u - want) < 1e-14);
        CHECK(max_norm(out.v) == 0.0);
    }

    SECTION("pointwise oracle on a wide box") {
        // sech(x/2) at the edge of [-60, 60) is ~1.9e-13, so the analytic
        // derivative of the non-periodic profile is a valid oracle at 1e-12
        GridSpec wide = make_grid(1024, 120.0);
        ModifiedFieldPair m(wide);
        for (int j = 0; j < wide.n; ++j) {
            double x = wide.node(j);
            double s = 1.0 / std::cosh(x / 2.0);
            m.u[j] = s;
            m.v[j] = s;
        }
        FieldPair out = miura_map(m, p);
        for (int j = 0; j < wide.n; ++j) {
            double x = wide.node(j);
            double s = 1.0 / std::cosh(x / 2.0);
            double t = std::tanh(x / 2.0);
            double sx = -0.5 * s * t;
            // lambda = -1 and mu = nu make the quadratic terms of u cancel
            double u_want = sx;
            double v_want = sx - s * s / 3.0;
            CHECK(std::abs(out.u[j] - u_want) < 1e-12);
            CHECK(std::abs(out.v[j] - v_want) < 1e-12);
        }
    }
}

TEST_CASE("miura frechet derivative") {
    GridSpec g = make_grid(128, 30.0);

    SECTION("zero tangent, derivative-only at origin") {
        SystemParams p{2.0};
        ModifiedFieldPair m = sample_modified(g, 3u);
        FieldPair out = miura_frechet(m, p, ModifiedFieldPair(g));
        CHECK(max_norm(out.u) == 0.0);
        CHECK(max_norm(out.v) == 0.0);

        ModifiedFieldPair t = sample_modified(g, 4u);
        out = miura_frechet(ModifiedFieldPair(g), p, t);
        CHECK(max_norm(out.u - deriv(t.u)) == 0.0);
        CHECK(max_norm(out.v - deriv(t.v)) == 0.0);
    }

    SECTION("linearity in the tangent") {
        SystemParams p{-1.0};
        ModifiedFieldPair m = sample_modified(g, 5u);
        ModifiedFieldPair t1 = sample_modified(g, 6u);
        ModifiedFieldPair t2 = sample_modified(g, 7u);
        double a = 1.7, b = -0.3;
        FieldPair combo = miura_frechet(m, p, a * t1 + b * t2);
        FieldPair split = a * miura_frechet(m, p, t1) + b * miura_frechet(m, p, t2);
        CHECK(max_norm(combo - split) < 1e-12);
    }

    SECTION("central difference oracle") {
        SystemParams p{2.0};
        ModifiedFieldPair m = sample_modified(g, 8u);
        ModifiedFieldPair t = sample_modified(g, 9u);
        FieldPair exact = miura_frechet(m, p, t);
        auto cd_error = [&](double eps) {
            FieldPair hi = miura_map(m + eps * t, p);
            FieldPair lo = miura_map(m + (-eps) * t, p);
            FieldPair cd = (1.0 / (2.0 * eps)) * (hi - lo);
            return max_norm(cd - exact);
        };
        // the map is quadratic, so the central difference has no truncation
        // term at all; the order test collapses to a rounding floor
        double e1 = cd_error(0.5);
        double e2 = cd_error(0.25);
        CHECK((e1 / std::max(e2, 1e-300) >= 3.73 || std::max(e1, e2) < 1e-12));
    }
}

TEST_CASE("modified flow rhs") {
    GridSpec g = make_grid(256, 40.0);

    SECTION("zero fixed point") {
        ModifiedFieldPair out = mkdv_rhs(ModifiedFieldPair(g), SystemParams{-1.0});
        CHECK(max_norm(out.u) == 0.0);
        CHECK(max_norm(out.v) == 0.0);
    }

    SECTION("nu = 0 reduces to the scalar modified flow") {
        SystemParams p{-1.0};
        ModifiedFieldPair m(g);
        m.u = random_band_limited(g, 21u);
        ModifiedFieldPair out = mkdv_rhs(m, p);
        Field want = -1.0 * deriv(m.u, 3)
                   + (1.0 / 6.0) * hadamard(hadamard(m.u, m.u), deriv(m.u));
        CHECK(max_norm(out.u - want) < 1e-13);
        CHECK(max_norm(out.v) == 0.0);
    }

    SECTION("independent term-by-term evaluation") {
        for (double lambda : {-1.0, 2.0}) {
            SystemParams p{lambda};
            ModifiedFieldPair m = sample_modified(g, 22u);
            ModifiedFieldPair a = mkdv_rhs(m, p);
            ModifiedFieldPair b = mkdv_oracle(m, p);
            CHECK(max_norm(a - b) < 1e-12);
        }
    }
}

TEST_CASE("intertwining certificate") {
    GridSpec g = make_grid(256, 40.0);

    SECTION("zero field") {
        CHECK(intertwining_defect(ModifiedFieldPair(g), SystemParams{-1.0}) == 0.0);
    }

    SECTION("scalar sector at 1e-10") {
        SystemParams p{-1.0};
        for (uint64_t seed : {31u, 32u, 33u}) {
            ModifiedFieldPair m(g);
            m.u = random_band_limited(g, seed);
            CHECK(intertwining_defect(m, p) < 1e-10);
        }
    }

    SECTION("coupled sector across lambda") {
        for (double lambda : {-1.0, 2.0}) {
            SystemParams p{lambda};
            for (uint64_t seed : {41u, 42u, 43u, 44u, 45u}) {
                ModifiedFieldPair m = sample_modified(g, seed);
                CHECK(intertwining_defect(m, p) < 1e-8);
            }
        }
    }

    SECTION("defect is scale-aware, not tiny by accident") {
        // breaking one coefficient must push the defect far above tolerance
        SystemParams p{2.0};
        ModifiedFieldPair m = sample_modified(g, 46u);
        FieldPair lhs = miura_frechet(m, p, mkdv_rhs(m, p));
        SystemParams wrong{2.5};
        FieldPair rhs = coupled_kdv_rhs(wrong, miura_map(m, p));
        double broken = max_norm(lhs - rhs) / std::max(1.0, max_norm(rhs));
        CHECK(broken > 1e-4);
    }
}
