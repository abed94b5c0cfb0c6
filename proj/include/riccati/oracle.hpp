#pragma once

// Direct time integration of the nonlinear equations. These share only the
// grid and transform primitives with the Riccati construction and exist to
// cross-check it.

#include "riccati/grid_spectral.hpp"
#include "riccati/kernel_ops.hpp"
#include "riccati/models.hpp"

namespace riccati::oracle {

enum class ConvScheme {
    /// Method of lines: central differences for d, convolution via ĝ².
    Stencil,
    /// Per-mode ∂t ĝ = d(2πik) ĝ − ĝ² with an integrating factor.
    Spectral,
};

struct DirectConvOptions {
    double dt = 1e-3;
    ConvScheme scheme = ConvScheme::Stencil;
    /// Accuracy order of the central difference stencils, 2 or 4.
    int stencil_order = 4;
    /// Drop the −g ∗ g term.
    bool linear_only = false;
};

/// Spectral radius of the central-difference operator for d on the grid.
double stencil_spectral_radius(const SpectralSymbol& d, const Grid1D& grid, int stencil_order);

Field1D direct_conv(const ConvModel& m, double t, const DirectConvOptions& opts = {});

/// Spectral in x, integrating-factor RK4 in t, nonlocal term by quadrature.
Kernel2D direct_corr(const CorrModel& m, double t, double dt);

/// u_t + u u_x = u_xx, spectral derivatives with 2/3-rule dealiasing,
/// integrating-factor RK4.
Field1D direct_burgers(const Grid1D& grid, const Field1D& u0, double t, double dt);

/// ‖a − b‖ / ‖b‖ (absolute when b = 0).
double relative_l2(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace riccati::oracle
