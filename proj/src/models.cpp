#include "riccati/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "riccati/errors.hpp"

namespace riccati {

namespace {

constexpr double kPoleRelTol = 1e-6;

void check_profile(const Field1D& f, const Grid1D& grid, const char* what) {
    if (f.size() != grid.size() || !f.allFinite()) {
        throw InvalidInput(std::string(what) + " must be finite samples on the grid");
    }
}

// Bisection on Re(den) over [lo, hi] where Re(den(lo)) > 0 >= Re(den(hi)).
double bisect_root(cplx z, cplx g0, double lo, double hi) {
    for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const cplx den = 1.0 + phi_factor(z, mid) * g0;
        if (den.real() > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::optional<PoleInfo> scan_poles(const ConvModel& m, double t) {
    check_profile(m.g0, m.grid, "g0");
    if (!(t >= 0.0)) {
        throw InvalidInput("evaluation time must be non-negative");
    }
    if (t == 0.0) {
        return std::nullopt;
    }
    const Eigen::VectorXcd z = m.d.action(m.grid);
    const Spectrum1D g0_hat = dft_forward(m.g0, m.grid);
    std::optional<PoleInfo> earliest;
    const double stride = t / kPoleScanIntervals;

    for (int mode = 0; mode < m.grid.size(); ++mode) {
        const cplx g = g0_hat(mode);
        if (g == cplx(0.0, 0.0)) {
            continue;
        }
        double prev_s = 0.0;
        double prev_re = 1.0;
        for (int j = 1; j <= kPoleScanIntervals; ++j) {
            const double s = (j == kPoleScanIntervals) ? t : j * stride;
            if (earliest && s - stride > earliest->critical_time) {
                break;
            }
            if (z(mode).real() * s > kPropagatorOverflow) {
                break;
            }
            const cplx phi = phi_factor(z(mode), s);
            const cplx den = 1.0 + phi * g;
            const double scale = 1.0 + std::abs(phi * g);
            std::optional<double> root;
            if (std::abs(den) <= 1e-12 * scale) {
                root = s;
            } else if (prev_re > 0.0 && den.real() <= 0.0) {
                const double r = bisect_root(z(mode), g, prev_s, s);
                const cplx at_root = 1.0 + phi_factor(z(mode), r) * g;
                if (std::abs(at_root) <= kPoleRelTol * (1.0 + std::abs(phi_factor(z(mode), r) * g))) {
                    root = r;
                }
            }
            if (root) {
                if (!earliest || *root < earliest->critical_time) {
                    earliest = PoleInfo{m.grid.freq(mode), *root};
                }
                break;
            }
            prev_s = s;
            prev_re = den.real();
        }
    }
    return earliest;
}

Spectrum1D conv_closed_form_spectrum(const ConvModel& m, double t) {
    if (const auto pole = scan_poles(m, t)) {
        std::ostringstream msg;
        msg << "mode k = " << pole->freq << " reaches its Riccati pole at t ≈ "
            << pole->critical_time;
        throw PoleCrossing(msg.str(), pole->freq, pole->critical_time);
    }
    const Eigen::VectorXcd z = m.d.action(m.grid);
    const Spectrum1D g0_hat = dft_forward(m.g0, m.grid);
    Spectrum1D out(m.grid.size());
    for (int mode = 0; mode < m.grid.size(); ++mode) {
        const double k = m.grid.freq(mode);
        const cplx e = exp_factor(z(mode), t, k);
        const cplx phi = phi_factor(z(mode), t);
        out(mode) = e * g0_hat(mode) / (1.0 + phi * g0_hat(mode));
    }
    return out;
}

Field1D conv_closed_form(const ConvModel& m, double t) {
    return dft_inverse(conv_closed_form_spectrum(m, t), m.grid);
}

Kernel2D translation_kernel(const Field1D& profile, const Grid1D& grid) {
    check_profile(profile, grid, "profile");
    const int n = grid.size();
    Kernel2D k(grid);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // x_i − x_j = (i − j)Δx ≡ x_{(i − j + n/2) mod n} on the periodic grid.
            k.values()(i, j) = profile(((i - j + n / 2) % n + n) % n);
        }
    }
    return k;
}

double translation_invariance_deviation(const Kernel2D& k) {
    const int n = k.size();
    const int j0 = n / 2;
    const double scale = k.values().cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return 0.0;
    }
    double dev = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int shifted = ((i - j + j0) % n + n) % n;
            dev = std::max(dev, std::abs(k(i, j) - k(shifted, j0)));
        }
    }
    return dev / scale;
}

FlowState conv_pipeline_state(const ConvModel& m, double t) {
    FlowConfig cfg{m.grid, m.d};
    cfg.b = UnitCoupling{};
    cfg.t_final = t;
    FlowState state = evolve_fast_at(cfg, translation_kernel(m.g0, m.grid), t);
    riccati_solution(state);
    return state;
}

Field1D conv_via_pipeline(const ConvModel& m, double t) {
    const FlowState state = conv_pipeline_state(m, t);
    return state.g->values().col(m.grid.zero_index());
}

FlowConfig corr_flow_config(const CorrModel& m, double t) {
    FlowConfig cfg{m.grid, m.d};
    cfg.b = MultiplicativeCoupling{m.b};
    cfg.t_final = t;
    return cfg;
}

std::pair<Kernel2D, Kernel2D> corr_build(const CorrModel& m, double t) {
    FlowState state = evolve_fast_at(corr_flow_config(m, t), m.g0, t);
    return {std::move(state.p), std::move(state.qprime)};
}

Kernel2D corr_solve(const CorrModel& m, double t) {
    auto [p, q] = corr_build(m, t);
    return solve_riccati_relation(p, q, t).g;
}

Field1D spectral_derivative(const Field1D& f, const Grid1D& grid, int order) {
    if (order < 0) {
        throw InvalidInput("derivative order must be non-negative");
    }
    std::vector<double> coeffs(static_cast<std::size_t>(order) + 1, 0.0);
    coeffs.back() = 1.0;
    Eigen::VectorXcd mult = SpectralSymbol(std::move(coeffs)).action(grid);
    if (order % 2 == 1) {
        mult(grid.size() / 2) = 0.0;  // odd derivatives drop the Nyquist mode
    }
    Spectrum1D fh = dft_forward(f, grid);
    fh = mult.cwiseProduct(fh);
    return dft_inverse(fh, grid);
}

ColeHopfSolution burgers_cole_hopf(const BurgersModel& m, double t) {
    const Grid1D& grid = m.grid;
    if (m.q0.size() != grid.size() || !m.q0.allFinite()) {
        throw InvalidInput("q0 must be finite samples on the grid");
    }
    if (m.q0.minCoeff() <= 0.0) {
        throw NonPositiveQ("Cole–Hopf needs q0 > 0 (min q0 = " + std::to_string(m.q0.minCoeff()) +
                               ")",
                           m.q0.minCoeff());
    }
    if (!(t >= 0.0)) {
        throw InvalidInput("evaluation time must be non-negative");
    }
    const Eigen::VectorXcd z = SpectralSymbol({0.0, 0.0, 1.0}).action(grid);
    Spectrum1D qh = dft_forward(m.q0.cast<cplx>(), grid);
    for (int mode = 0; mode < grid.size(); ++mode) {
        qh(mode) *= exp_factor(z(mode), t, grid.freq(mode));
    }
    ColeHopfSolution sol;
    sol.q = dft_inverse(qh, grid);
    const double min_q = sol.q.real().minCoeff();
    if (!(min_q > 0.0)) {
        throw NonPositiveQ("heat-evolved q is not positive (min q = " + std::to_string(min_q) + ")",
                           min_q);
    }
    sol.p = spectral_derivative(sol.q, grid, 1);
    sol.g = sol.p.cwiseQuotient(sol.q);
    return sol;
}

double burgers_residual(const Field1D& u_minus, const Field1D& u, const Field1D& u_plus, double h,
                        const Grid1D& grid) {
    const Field1D ut = (u_plus - u_minus) / (2.0 * h);
    const Field1D ux = spectral_derivative(u, grid, 1);
    const Field1D uxx = spectral_derivative(u, grid, 2);
    const Field1D rhs = uxx - u.cwiseProduct(ux);
    const double denom = rhs.norm();
    const double num = (ut - rhs).norm();
    return denom > 0.0 ? num / denom : num;
}

}  // namespace riccati
