#pragma once

// Concrete instances of the Riccati construction:
//  - convolution nonlinearity   ∂t g = d g − g ∗ g,
//  - correlation nonlinearity   ∂t g = d g − ∫ g(x,z) b(z) g(z,y) dz,
//  - viscous Burgers through the rank-one relation p = g q (Cole–Hopf).

#include <optional>
#include <utility>

#include "riccati/flow_engine.hpp"
#include "riccati/grid_spectral.hpp"
#include "riccati/kernel_ops.hpp"

namespace riccati {

struct ConvModel {
    Grid1D grid;
    SpectralSymbol d;
    Field1D g0;  // one-argument profile; the kernel is g0(x − y)
};

struct CorrModel {
    Grid1D grid;
    SpectralSymbol d;
    Eigen::VectorXd b;  // correlation function on the grid
    Kernel2D g0;
};

struct BurgersModel {
    Grid1D grid;
    Eigen::VectorXd q0;  // strictly positive
};

/// Stride of the coarse time mesh used by the pole scan is t / kPoleScanIntervals.
inline constexpr int kPoleScanIntervals = 64;

struct PoleInfo {
    double freq;
    double critical_time;
};

/// Earliest time in (0, t] at which some mode's denominator
/// 1 + Î(k, s) ĝ0(k) vanishes, refined by bisection.
std::optional<PoleInfo> scan_poles(const ConvModel& m, double t);

/// ĝ(k; t) = e^{d t} ĝ0 / (1 + Î(k, t) ĝ0). Throws PoleCrossing.
Spectrum1D conv_closed_form_spectrum(const ConvModel& m, double t);
Field1D conv_closed_form(const ConvModel& m, double t);

/// Circulant kernel g0(x_i − x_j) with the difference wrapped onto the grid.
Kernel2D translation_kernel(const Field1D& profile, const Grid1D& grid);

/// max_ij |k(x_i, x_j) − k(x_i − x_j, 0)| / max |k|.
double translation_invariance_deviation(const Kernel2D& k);

/// Example-1 state from the closed-form base and auxiliary flows, with g solved.
FlowState conv_pipeline_state(const ConvModel& m, double t);
/// The y = 0 slice of conv_pipeline_state(m, t).g.
Field1D conv_via_pipeline(const ConvModel& m, double t);

FlowConfig corr_flow_config(const CorrModel& m, double t);
/// (p, q′) at time t.
std::pair<Kernel2D, Kernel2D> corr_build(const CorrModel& m, double t);
Kernel2D corr_solve(const CorrModel& m, double t);

struct ColeHopfSolution {
    Field1D q;  // heat flow of q0
    Field1D p;  // ∂x q
    Field1D g;  // p / q
    /// The Burgers field −2 g.
    Field1D u() const { return -2.0 * g; }
};

/// Throws NonPositiveQ when q drops to zero or below.
ColeHopfSolution burgers_cole_hopf(const BurgersModel& m, double t);

/// Spectral first derivative under the grid's Fourier convention.
Field1D spectral_derivative(const Field1D& f, const Grid1D& grid, int order = 1);

/// Residual of u_t + u u_x − u_xx from three samples at t − h, t, t + h,
/// relative to ‖u_xx − u u_x‖.
double burgers_residual(const Field1D& u_minus, const Field1D& u, const Field1D& u_plus, double h,
                        const Grid1D& grid);

}  // namespace riccati
