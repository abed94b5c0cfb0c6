#include "riccati/oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "riccati/errors.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace riccati::oracle {

namespace {

constexpr double kNormGrowthLimit = 1e8;
constexpr double kRk4StabilityMargin = 2.5;

int step_count(double t, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInput("oracle dt must be positive and finite");
    }
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InvalidInput("oracle final time must be non-negative and finite");
    }
    return static_cast<int>(std::ceil(t / dt - 1e-9));
}

void guard(double norm, double initial, double t) {
    if (!std::isfinite(norm) || (initial > 0.0 && norm > kNormGrowthLimit * initial)) {
        std::ostringstream msg;
        msg << "direct integration unstable after t = " << t;
        throw InstabilityError(msg.str(), t);
    }
}

Field1D shift(const Field1D& f, int s) {
    const Eigen::Index n = f.size();
    Field1D out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = f(((i + s) % n + n) % n);
    }
    return out;
}

// Periodic central differences.
Field1D central_d1(const Field1D& f, double h, int order) {
    if (order == 2) {
        return (shift(f, 1) - shift(f, -1)) / (2.0 * h);
    }
    return ((2.0 / 3.0) * (shift(f, 1) - shift(f, -1)) - (1.0 / 12.0) * (shift(f, 2) - shift(f, -2))) / h;
}

Field1D central_d2(const Field1D& f, double h, int order) {
    if (order == 2) {
        return (shift(f, 1) - 2.0 * f + shift(f, -1)) / (h * h);
    }
    return ((4.0 / 3.0) * (shift(f, 1) + shift(f, -1)) - (1.0 / 12.0) * (shift(f, 2) + shift(f, -2)) -
            2.5 * f) /
           (h * h);
}

// Σ c_j D^j f with D^{2i} = D2^i and D^{2i+1} = D1 D2^i.
Field1D stencil_apply(const SpectralSymbol& d, const Field1D& f, double h, int order) {
    const auto& c = d.coeffs();
    Field1D out = Field1D::Zero(f.size());
    Field1D even = f;  // D2^i f
    for (std::size_t j = 0; j < c.size(); j += 2) {
        if (c[j] != 0.0) {
            out += c[j] * even;
        }
        if (j + 1 < c.size() && c[j + 1] != 0.0) {
            out += c[j + 1] * central_d1(even, h, order);
        }
        if (j + 2 < c.size()) {
            even = central_d2(even, h, order);
        }
    }
    return out;
}

Eigen::VectorXcd exp_vector(const Eigen::VectorXcd& z, double t, const Grid1D& grid) {
    Eigen::VectorXcd out(z.size());
    for (Eigen::Index m = 0; m < z.size(); ++m) {
        out(m) = exp_factor(z(m), t, grid.freq(static_cast<int>(m)));
    }
    return out;
}

// Damped high modes decay into subnormals, which are orders of magnitude
// slower. Flushes them to zero for the lifetime of the guard (x86 only).
class FlushSubnormals {
public:
#if defined(__SSE__)
    FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
    ~FlushSubnormals() { _mm_setcsr(saved_); }

private:
    unsigned int saved_;
#endif
};

// Lawson RK4 for y' = Λ y + N(y), Λ diagonal over rows.
template <typename State, typename Nonlinear>
State lawson_rk4(const State& y, double h, const Eigen::VectorXcd& e_half,
                 const Eigen::VectorXcd& e_full, Nonlinear&& nonlinear) {
    const auto Eh = e_half.asDiagonal();
    const auto E = e_full.asDiagonal();
    const State k1 = nonlinear(y);
    const State k2 = nonlinear(State(Eh * (y + 0.5 * h * k1)));
    const State k3 = nonlinear(State(Eh * y + 0.5 * h * k2));
    const State k4 = nonlinear(State(E * y + h * (Eh * k3)));
    return E * y + (h / 6.0) * (E * k1 + 2.0 * (Eh * (k2 + k3)) + k4);
}

}  // namespace

double relative_l2(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidInput("relative_l2: shape mismatch");
    }
    const double denom = b.norm();
    const double num = (a - b).norm();
    return denom > 0.0 ? num / denom : num;
}

double stencil_spectral_radius(const SpectralSymbol& d, const Grid1D& grid, int stencil_order) {
    const double h = grid.dx();
    const int n = grid.size();
    const auto& c = d.coeffs();
    double radius = 0.0;
    for (int m = 0; m < n; ++m) {
        const double theta = 2.0 * std::numbers::pi * m / n;
        cplx d1;
        double d2;
        if (stencil_order == 2) {
            d1 = cplx(0.0, std::sin(theta) / h);
            d2 = -4.0 * std::pow(std::sin(0.5 * theta), 2) / (h * h);
        } else {
            d1 = cplx(0.0, ((4.0 / 3.0) * std::sin(theta) - (1.0 / 6.0) * std::sin(2.0 * theta)) / h);
            d2 = (-2.5 + (8.0 / 3.0) * std::cos(theta) - (1.0 / 6.0) * std::cos(2.0 * theta)) / (h * h);
        }
        cplx sym = 0.0;
        double d2pow = 1.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            sym += c[j] * (j % 2 == 0 ? cplx(d2pow) : d1 * d2pow);
            if (j % 2 == 1) {
                d2pow *= d2;
            }
        }
        radius = std::max(radius, std::abs(sym));
    }
    return radius;
}

Field1D direct_conv(const ConvModel& m, double t, const DirectConvOptions& opts) {
    const Grid1D& grid = m.grid;
    if (m.g0.size() != grid.size()) {
        throw InvalidInput("direct_conv: g0 does not match the grid");
    }
    const int steps = step_count(t, opts.dt);
    const double h = steps > 0 ? t / steps : 0.0;
    const FlushSubnormals flush;
    Field1D g = m.g0;
    const double initial = g.norm();

    if (opts.scheme == ConvScheme::Spectral) {
        const Eigen::VectorXcd z = m.d.action(grid);
        const Eigen::VectorXcd eh = exp_vector(z, 0.5 * h, grid);
        const Eigen::VectorXcd ef = exp_vector(z, h, grid);
        Spectrum1D gh = dft_forward(g, grid);
        auto nonlinear = [&](const Spectrum1D& y) -> Spectrum1D {
            if (opts.linear_only) {
                return Spectrum1D::Zero(y.size());
            }
            return -y.cwiseProduct(y);
        };
        for (int s = 0; s < steps; ++s) {
            gh = lawson_rk4(gh, h, eh, ef, nonlinear);
            guard(gh.norm() * std::sqrt(grid.dk() / grid.dx()), initial, (s + 1) * h);
        }
        return dft_inverse(gh, grid);
    }

    if (opts.stencil_order != 2 && opts.stencil_order != 4) {
        throw InvalidInput("stencil order must be 2 or 4");
    }
    const double radius = stencil_spectral_radius(m.d, grid, opts.stencil_order);
    if (h * radius > kRk4StabilityMargin) {
        std::ostringstream msg;
        msg << "dt = " << h << " violates the explicit stencil bound dt <= "
            << kRk4StabilityMargin / radius;
        throw InstabilityError(msg.str(), 0.0);
    }
    const double dx = grid.dx();
    auto rhs = [&](const Field1D& y) -> Field1D {
        Field1D out = stencil_apply(m.d, y, dx, opts.stencil_order);
        if (!opts.linear_only) {
            Spectrum1D yh = dft_forward(y, grid);
            out -= dft_inverse(yh.cwiseProduct(yh), grid);
        }
        return out;
    };
    for (int s = 0; s < steps; ++s) {
        const Field1D k1 = rhs(g);
        const Field1D k2 = rhs(g + 0.5 * h * k1);
        const Field1D k3 = rhs(g + 0.5 * h * k2);
        const Field1D k4 = rhs(g + h * k3);
        g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        guard(g.norm(), initial, (s + 1) * h);
    }
    return g;
}

Kernel2D direct_corr(const CorrModel& m, double t, double dt) {
    const Grid1D& grid = m.grid;
    require_same_grid(grid, m.g0.grid(), "direct_corr");
    if (m.b.size() != grid.size()) {
        throw InvalidInput("direct_corr: b does not match the grid");
    }
    const int n = grid.size();
    const int steps = step_count(t, dt);
    const double h = steps > 0 ? t / steps : 0.0;

    // Only the support of b enters ∫ g(x,z) b(z) g(z,y) dz.
    std::vector<int> support;
    for (int j = 0; j < n; ++j) {
        if (m.b(j) != 0.0) {
            support.push_back(j);
        }
    }
    const auto nz = static_cast<Eigen::Index>(support.size());
    Eigen::VectorXcd wb(nz);
    // rows(z, m) evaluates the inverse transform at x_z: g(x_z, ·) = rows · ĝ.
    Eigen::MatrixXcd rows(nz, n);
    for (Eigen::Index r = 0; r < nz; ++r) {
        const int j = support[static_cast<std::size_t>(r)];
        wb(r) = grid.weights()[static_cast<std::size_t>(j)] * m.b(j);
        for (int mode = 0; mode < n; ++mode) {
            const double phase = -2.0 * std::numbers::pi * grid.freq(mode) * grid.point(j);
            rows(r, mode) = grid.dk() * std::polar(1.0, phase);
        }
    }
    std::vector<Eigen::Index> cols(support.begin(), support.end());

    const Eigen::VectorXcd z = m.d.action(grid);
    const Eigen::VectorXcd eh = exp_vector(z, 0.5 * h, grid);
    const Eigen::VectorXcd ef = exp_vector(z, h, grid);

    auto nonlinear = [&](const Eigen::MatrixXcd& gh) -> Eigen::MatrixXcd {
        if (nz == 0) {
            return Eigen::MatrixXcd::Zero(n, n);
        }
        Eigen::MatrixXcd left(n, nz);
        for (Eigen::Index r = 0; r < nz; ++r) {
            left.col(r) = gh.col(cols[static_cast<std::size_t>(r)]) * wb(r);
        }
        Eigen::MatrixXcd slab(nz, n);
        slab.noalias() = rows * gh;
        Eigen::MatrixXcd out(n, n);
        out.noalias() = -left * slab;
        return out;
    };

    const FlushSubnormals flush;
    Eigen::MatrixXcd gh = m.g0.values();
    dft_forward_columns(gh, grid);
    const double initial = gh.norm();
    for (int s = 0; s < steps; ++s) {
        gh = lawson_rk4(gh, h, eh, ef, nonlinear);
        guard(gh.norm(), initial, (s + 1) * h);
    }
    dft_inverse_columns(gh, grid);
    return Kernel2D(grid, std::move(gh));
}

Field1D direct_burgers(const Grid1D& grid, const Field1D& u0, double t, double dt) {
    if (u0.size() != grid.size()) {
        throw InvalidInput("direct_burgers: u0 does not match the grid");
    }
    const int n = grid.size();
    const int steps = step_count(t, dt);
    const double h = steps > 0 ? t / steps : 0.0;

    const Eigen::VectorXcd z = SpectralSymbol({0.0, 0.0, 1.0}).action(grid);
    Eigen::VectorXcd ddx = SpectralSymbol({0.0, 1.0}).action(grid);
    // 2/3 rule: keep |m| <= n/3.
    Eigen::VectorXd keep(n);
    for (int mode = 0; mode < n; ++mode) {
        const int signed_mode = mode < n / 2 ? mode : mode - n;
        keep(mode) = (3 * std::abs(signed_mode) <= n) ? 1.0 : 0.0;
    }
    ddx(n / 2) = 0.0;
    const Eigen::VectorXcd eh = exp_vector(z, 0.5 * h, grid);
    const Eigen::VectorXcd ef = exp_vector(z, h, grid);

    auto nonlinear = [&](const Spectrum1D& uh) -> Spectrum1D {
        const Field1D u = dft_inverse(keep.cast<cplx>().cwiseProduct(uh), grid);
        const Spectrum1D sq = dft_forward(u.cwiseProduct(u), grid);
        return (-0.5 * keep.cast<cplx>()).cwiseProduct(ddx.cwiseProduct(sq));
    };

    const FlushSubnormals flush;
    Spectrum1D uh = dft_forward(u0, grid);
    const double initial = uh.norm();
    for (int s = 0; s < steps; ++s) {
        uh = lawson_rk4(uh, h, eh, ef, nonlinear);
        guard(uh.norm(), initial, (s + 1) * h);
    }
    return dft_inverse(uh, grid);
}

}  // namespace riccati::oracle
