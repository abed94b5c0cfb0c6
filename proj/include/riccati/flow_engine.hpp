#pragma once

// Kernel-level pipeline. Solve the linear base and auxiliary equations
//
//     ∂t q′ = a + a⋆q′ + b p,        q′(0) = 0,
//     ∂t p  = c + c⋆q′ + d(∂x) p,    p(0)  = g0,
//
// then the Riccati relation p = g ⋆ (δ + q′). The kernel g solves
//
//     ∂t g = c + d(∂x) g − g ⋆ (a + b g).
//
// Kernels are stored with x varying within a column, so d(∂x) acts on
// contiguous columns.

#include <optional>
#include <variant>
#include <vector>

#include "riccati/grid_spectral.hpp"
#include "riccati/kernel_ops.hpp"

namespace riccati {

/// b ≡ 1.
struct UnitCoupling {};
/// b(x) sampled on the grid; acts as row scaling b(x) p(x, y).
struct MultiplicativeCoupling {
    Eigen::VectorXd samples;
};
/// b = b(∂x), a constant coefficient polynomial.
struct SymbolCoupling {
    SpectralSymbol symbol;
};
using Coupling = std::variant<UnitCoupling, MultiplicativeCoupling, SymbolCoupling>;

inline Coupling zero_coupling(const Grid1D& grid) {
    return MultiplicativeCoupling{Eigen::VectorXd::Zero(grid.size())};
}

using KernelEvaluator = std::function<Kernel2D(double)>;

struct FlowConfig {
    FlowConfig(Grid1D grid_, SpectralSymbol d_) : grid(std::move(grid_)), d(std::move(d_)) {}

    Grid1D grid;
    SpectralSymbol d;
    Coupling b = UnitCoupling{};
    KernelEvaluator a;  // empty means a ≡ 0
    KernelEvaluator c;  // empty means c ≡ 0
    double t_final = 1.0;
    double dt = 1e-3;
    /// General path: det₂ is recorded every det2_stride steps.
    int det2_stride = 1;
    /// Fast path: det₂ is recorded at this many equally spaced times in (0, t].
    int fast_trace_samples = 4;

    /// Throws InvalidInput on an inadmissible symbol, bad b samples or bad times.
    void validate() const;
    bool has_sources() const { return static_cast<bool>(a) || static_cast<bool>(c); }
};

struct Det2Sample {
    double t;
    cplx det2;
    double qprime_hs;
};

struct FlowState {
    double t = 0.0;
    Kernel2D p;
    Kernel2D qprime;
    std::optional<Kernel2D> g;
    std::vector<Det2Sample> det2_trace;
    /// Filled by riccati_solution.
    double fredholm_residual = 0.0;
    cplx det2{1.0, 0.0};
};

/// Lawson RK4 (exact e^{d h} on the base equation) up to cfg.t_final.
/// Throws InstabilityError on norm growth beyond 1e8 and PatchBreakdown
/// from the det₂ monitor.
FlowState evolve_general(const FlowConfig& cfg, const Kernel2D& g0);

/// One integration pass returning the state at every requested time
/// (ascending, non-negative); cfg.t_final is ignored.
std::vector<FlowState> evolve_general_at(const FlowConfig& cfg, const Kernel2D& g0,
                                         const std::vector<double>& times);

/// Closed-form evolution for a = c = 0: p^ = e^{d t} g0^ column-wise and
/// q′ = b · F⁻¹[Î(k, t) g0^]. Exact in t.
FlowState evolve_fast(const FlowConfig& cfg, const Kernel2D& g0);
FlowState evolve_fast_at(const FlowConfig& cfg, const Kernel2D& g0, double t);

/// Solves the Riccati relation for the state and stores g, det₂ and the residual.
const Kernel2D& riccati_solution(FlowState& state);

/// c + d(∂x) g − g ⋆ (a + b g) at time t.
Kernel2D pde_rhs(const FlowConfig& cfg, double t, const Kernel2D& g);

/// ‖(g₊ − g₋)/(2h) − rhs(g)‖_HS / ‖rhs(g)‖_HS.
double pde_residual(const Kernel2D& g_minus, const Kernel2D& g, const Kernel2D& g_plus, double h,
                    const FlowConfig& cfg, double t);

}  // namespace riccati
