#pragma once

// Periodic 1-D grid, sampled real fields, and the spectral toolbox the rest
// of the library is built on: Fourier differentiation, quadrature, inner
// products, seeded band-limited random data, and field serialization.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <fftw3.h>

namespace ckdv {

struct GridSpec {
    int n = 0;          // sample count, even, >= 8
    double length = 0;  // box length, > 0

    double spacing() const { return length / n; }
    // nodes run over [-length/2, length/2)
    double node(int j) const { return -0.5 * length + j * spacing(); }
    bool operator==(const GridSpec&) const = default;
};

inline GridSpec make_grid(int n, double length) {
    if (n < 8 || n % 2 != 0)
        throw std::invalid_argument("grid: n must be even and >= 8, got n=" + std::to_string(n));
    if (!(length > 0) || !std::isfinite(length))
        throw std::invalid_argument("grid: length must be positive and finite");
    return GridSpec{n, length};
}

struct Field {
    GridSpec grid;
    std::vector<double> a;

    Field() = default;
    explicit Field(GridSpec g) : grid(g), a(static_cast<size_t>(g.n), 0.0) {}
    Field(GridSpec g, std::vector<double> values) : grid(g), a(std::move(values)) {
        if (a.size() != static_cast<size_t>(g.n))
            throw std::invalid_argument("field: sample count does not match grid");
    }

    double& operator[](int j) { return a[static_cast<size_t>(j)]; }
    double operator[](int j) const { return a[static_cast<size_t>(j)]; }
    int n() const { return grid.n; }
};

namespace detail {

inline void require_same_grid(const Field& x, const Field& y) {
    if (!(x.grid == y.grid)) throw std::invalid_argument("fields live on different grids");
}

} // namespace detail

template <class F>
Field field_from_function(GridSpec g, F&& f) {
    Field out(g);
    for (int j = 0; j < g.n; ++j) out[j] = f(g.node(j));
    return out;
}

inline Field operator+(Field x, const Field& y) {
    detail::require_same_grid(x, y);
    for (int j = 0; j < x.n(); ++j) x[j] += y[j];
    return x;
}

inline Field operator-(Field x, const Field& y) {
    detail::require_same_grid(x, y);
    for (int j = 0; j < x.n(); ++j) x[j] -= y[j];
    return x;
}

inline Field operator*(double s, Field x) {
    for (int j = 0; j < x.n(); ++j) x[j] *= s;
    return x;
}

inline Field operator-(Field x) { return -1.0 * std::move(x); }

// pointwise product
inline Field hadamard(Field x, const Field& y) {
    detail::require_same_grid(x, y);
    for (int j = 0; j < x.n(); ++j) x[j] *= y[j];
    return x;
}

inline Field& axpy(Field& y, double s, const Field& x) {
    detail::require_same_grid(y, x);
    for (int j = 0; j < y.n(); ++j) y[j] += s * x[j];
    return y;
}

inline double max_norm(const Field& x) {
    double m = 0;
    for (double v : x.a) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(const Field& x) {
    return std::all_of(x.a.begin(), x.a.end(), [](double v) { return std::isfinite(v); });
}

struct FieldPair {
    Field u, v;

    FieldPair() = default;
    FieldPair(Field uu, Field vv) : u(std::move(uu)), v(std::move(vv)) {
        detail::require_same_grid(u, v);
    }
    explicit FieldPair(GridSpec g) : u(g), v(g) {}
    const GridSpec& grid() const { return u.grid; }
};

inline FieldPair operator+(FieldPair x, const FieldPair& y) {
    return {x.u + y.u, x.v + y.v};
}
inline FieldPair operator-(FieldPair x, const FieldPair& y) {
    return {x.u - y.u, x.v - y.v};
}
inline FieldPair operator*(double s, FieldPair x) { return {s * x.u, s * x.v}; }

inline double max_norm(const FieldPair& x) { return std::max(max_norm(x.u), max_norm(x.v)); }
inline bool all_finite(const FieldPair& x) { return all_finite(x.u) && all_finite(x.v); }

// ---------------------------------------------------------------------------
// system / pencil parameters

struct SystemParams {
    double lambda = -1.0;
};

// Pencil member parameters. delta() is the determinant of the constraint
// coupling matrix; the member is well defined only away from its zeros,
// k = 1/(1 +- sqrt(lambda)) for lambda > 0 and k = 1 for lambda = 0.
struct PencilParams {
    double lambda = -1.0;
    double k = 1.0;

    double delta() const { return -lambda * k * k + (1.0 - k) * (1.0 - k); }
};

inline bool pencil_k_excluded(const PencilParams& p, double tol = 1e-12) {
    return std::abs(p.delta()) <= tol;
}

// roots of delta for lambda > 0; empty otherwise
inline std::vector<double> excluded_k_values(double lambda) {
    if (lambda > 0) {
        double r = std::sqrt(lambda);
        return {1.0 / (1.0 + r), 1.0 / (1.0 - r)};
    }
    if (lambda == 0) return {1.0};
    return {};
}

inline void require_valid_pencil(const PencilParams& p, const char* what) {
    if (pencil_k_excluded(p)) {
        std::string msg = std::string(what) + ": k=" + std::to_string(p.k) +
                          " is excluded at lambda=" + std::to_string(p.lambda) +
                          " (coupling determinant " + std::to_string(p.delta()) +
                          " vanishes";
        auto roots = excluded_k_values(p.lambda);
        if (!roots.empty()) {
            msg += "; excluded k:";
            for (double r : roots) msg += " " + std::to_string(r);
        }
        msg += ")";
        throw std::invalid_argument(msg);
    }
}

inline void require_nonzero_lambda(double lambda, const char* what) {
    if (lambda == 0.0)
        throw std::invalid_argument(std::string(what) +
                                    ": undefined at lambda = 0 (diagonal bracket entry carries 1/lambda)");
}

// ---------------------------------------------------------------------------
// FFT backend.  Plans are cached per size and created under a lock; execution
// uses the new-array interface on caller-owned buffers, which is safe for
// concurrent use.

namespace detail {

struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

inline FftPlans& plans_for(int n) {
    static std::mutex mu;
    static std::unordered_map<int, FftPlans> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> re(static_cast<size_t>(n));
    std::vector<std::complex<double>> sp(static_cast<size_t>(n / 2 + 1));
    FftPlans p;
    p.fwd = fftw_plan_dft_r2c_1d(n, re.data(), reinterpret_cast<fftw_complex*>(sp.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inv = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(sp.data()), re.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.fwd || !p.inv) throw std::runtime_error("fft: plan creation failed");
    return cache.emplace(n, p).first->second;
}

} // namespace detail

using Spectrum = std::vector<std::complex<double>>; // n/2 + 1 modes

inline Spectrum rfft(const Field& f) {
    const int n = f.n();
    Spectrum out(static_cast<size_t>(n / 2 + 1));
    std::vector<double> in(f.a);
    fftw_execute_dft_r2c(detail::plans_for(n).fwd, in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

inline Field irfft(GridSpec g, Spectrum spec) {
    if (spec.size() != static_cast<size_t>(g.n / 2 + 1))
        throw std::invalid_argument("irfft: mode count does not match grid");
    Field out(g);
    fftw_execute_dft_c2r(detail::plans_for(g.n).inv,
                         reinterpret_cast<fftw_complex*>(spec.data()), out.a.data());
    const double scale = 1.0 / g.n;
    for (double& v : out.a) v *= scale;
    return out;
}

// physical wavenumber of mode m on this grid
inline double wavenumber(const GridSpec& g, int m) {
    return 2.0 * std::numbers::pi * m / g.length;
}

// Spectral derivative of integer order 1..4.  The Nyquist mode is zeroed for
// odd orders so that differentiation stays a real, antisymmetric operation.
inline Field deriv(const Field& f, int order = 1) {
    if (order < 1 || order > 4) throw std::invalid_argument("deriv: order must be in 1..4");
    const GridSpec g = f.grid;
    Spectrum s = rfft(f);
    const int nyq = g.n / 2;
    for (int m = 0; m <= nyq; ++m) {
        std::complex<double> ik(0.0, wavenumber(g, m));
        std::complex<double> mult = 1.0;
        for (int r = 0; r < order; ++r) mult *= ik;
        s[static_cast<size_t>(m)] *= mult;
    }
    if (order % 2 == 1) s[static_cast<size_t>(nyq)] = 0.0;
    return irfft(g, std::move(s));
}

// truncate modes above |k_index| > cutoff (in place on a copy)
inline Field truncate_modes(const Field& f, int cutoff) {
    Spectrum s = rfft(f);
    for (size_t m = static_cast<size_t>(cutoff) + 1; m < s.size(); ++m) s[m] = 0.0;
    return irfft(f.grid, std::move(s));
}

// ---------------------------------------------------------------------------
// quadrature and pairings (trapezoid = rectangle on a periodic grid; exact
// for resolved trigonometric polynomials)

inline double integral(const Field& f) {
    double s = 0;
    for (double v : f.a) s += v;
    return s * f.grid.spacing();
}

inline double inner(const Field& x, const Field& y) {
    detail::require_same_grid(x, y);
    double s = 0;
    for (int j = 0; j < x.n(); ++j) s += x[j] * y[j];
    return s * x.grid.spacing();
}

inline double inner(const FieldPair& x, const FieldPair& y) {
    return inner(x.u, y.u) + inner(x.v, y.v);
}

inline double l2_norm(const Field& x) { return std::sqrt(inner(x, x)); }
inline double l2_norm(const FieldPair& x) { return std::sqrt(inner(x, x)); }

// ---------------------------------------------------------------------------
// seeded band-limited random fields.
//
// The generator avoids <random> distributions (their output is
// implementation-defined); mode coefficients come from mt19937_64 words
// mapped through an explicit Box-Muller step, so a seed pins the samples
// bit-for-bit on any platform.

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline double unit_double(uint64_t w) {
    // (0,1]: top 53 bits
    return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

} // namespace detail

struct RandomFieldOptions {
    int cutoff = 10;        // highest retained mode index
    double amplitude = 1.0; // max-norm after normalization
};

inline Field random_band_limited(GridSpec g, uint64_t seed, RandomFieldOptions opt = {}) {
    if (opt.cutoff < 1 || opt.cutoff >= g.n / 2)
        throw std::invalid_argument("random field: cutoff must lie in [1, n/2)");
    uint64_t s = seed;
    // decorrelate the raw seed before use
    detail::splitmix64(s);
    Spectrum spec(static_cast<size_t>(g.n / 2 + 1), 0.0);
    for (int m = 1; m <= opt.cutoff; ++m) {
        double u1 = detail::unit_double(detail::splitmix64(s));
        double u2 = detail::unit_double(detail::splitmix64(s));
        double r = std::sqrt(-2.0 * std::log(u1));
        spec[static_cast<size_t>(m)] = {r * std::cos(2.0 * std::numbers::pi * u2),
                                        r * std::sin(2.0 * std::numbers::pi * u2)};
    }
    Field f = irfft(g, std::move(spec));
    double m = max_norm(f);
    if (m > 0) {
        double sc = opt.amplitude / m;
        for (double& v : f.a) v *= sc;
    }
    return f;
}

inline FieldPair random_pair(GridSpec g, uint64_t seed, RandomFieldOptions opt = {}) {
    uint64_t s = seed;
    uint64_t su = detail::splitmix64(s);
    uint64_t sv = detail::splitmix64(s);
    return {random_band_limited(g, su, opt), random_band_limited(g, sv, opt)};
}

// ---------------------------------------------------------------------------
// serialization

inline void write_csv(const Field& f, std::ostream& os) {
    char buf[64];
    os << "x,value\n";
    for (int j = 0; j < f.n(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid.node(j), f[j]);
        os << buf;
    }
}

inline void write_csv(const Field& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(f, os);
}

// Reads a two-column x,value table written by write_csv; x samples are
// trusted to be the nodes of `g`.
inline Field read_csv(GridSpec g, std::istream& is) {
    Field f(g);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
    int j = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("csv: malformed row: " + line);
        if (j >= g.n) throw std::runtime_error("csv: more rows than grid points");
        f[j++] = std::stod(line.substr(comma + 1));
    }
    if (j != g.n) throw std::runtime_error("csv: row count does not match grid");
    return f;
}

inline Field read_csv(GridSpec g, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_csv(g, is);
}

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

// binary snapshot: u64 sample count, f64 box length, raw f64 payload
inline void write_snapshot(const Field& f, std::ostream& os) {
    uint64_t n = static_cast<uint64_t>(f.n());
    double length = f.grid.length;
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&length), sizeof length);
    os.write(reinterpret_cast<const char*>(f.a.data()),
             static_cast<std::streamsize>(f.a.size() * sizeof(double)));
}

inline void write_snapshot(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_snapshot(f, os);
}

inline Field read_snapshot(std::istream& is) {
    uint64_t n = 0;
    double length = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    is.read(reinterpret_cast<char*>(&length), sizeof length);
    if (!is || n > (1u << 24)) throw std::runtime_error("snapshot: bad header");
    GridSpec g = make_grid(static_cast<int>(n), length);
    Field f(g);
    is.read(reinterpret_cast<char*>(f.a.data()),
            static_cast<std::streamsize>(f.a.size() * sizeof(double)));
    if (!is) throw std::runtime_error("snapshot: truncated payload");
    return f;
}

inline Field read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_snapshot(is);
}

} // namespace ckdv
