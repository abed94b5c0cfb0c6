#pragma once

// Nyström representation of Hilbert–Schmidt operators on L²([-L, L)):
// a kernel k(x, y) is stored as its n×n sample matrix K_ij = k(x_i, x_j),
// and the operator acts as (K f)(x_i) = Σ_j K_ij w_j f_j.
// Composition, det₂ and the Fredholm solve all use the same weights.

#include <functional>

#include <Eigen/Dense>

#include "riccati/grid_spectral.hpp"

namespace riccati {

/// det₂ below this means the canonical coordinate patch is lost.
inline constexpr double kPatchBreakdownDet2 = 1e-8;
/// Reciprocal condition estimate below this is treated as singular.
inline constexpr double kSingularRcond = 1e-12;
/// Relative Riccati-relation residual accepted from a Fredholm solve.
inline constexpr double kFredholmResidualTol = 1e-10;

class Kernel2D {
public:
    explicit Kernel2D(Grid1D grid);
    Kernel2D(Grid1D grid, Eigen::MatrixXcd values);

    static Kernel2D zero(const Grid1D& grid) { return Kernel2D(grid); }
    static Kernel2D sample(const Grid1D& grid, const std::function<cplx(double, double)>& f);

    const Grid1D& grid() const noexcept { return grid_; }
    const Eigen::MatrixXcd& values() const noexcept { return values_; }
    Eigen::MatrixXcd& values() noexcept { return values_; }
    int size() const noexcept { return grid_.size(); }

    cplx operator()(int i, int j) const { return values_(i, j); }

    Kernel2D& operator+=(const Kernel2D& other);
    Kernel2D& operator-=(const Kernel2D& other);
    Kernel2D& operator*=(cplx s);

    bool all_finite() const;

private:
    Grid1D grid_;
    Eigen::MatrixXcd values_;
};

Kernel2D operator+(Kernel2D a, const Kernel2D& b);
Kernel2D operator-(Kernel2D a, const Kernel2D& b);
Kernel2D operator*(cplx s, Kernel2D a);

/// δ + q′ at the kernel level.
class IdentityPlus {
public:
    explicit IdentityPlus(Kernel2D tail) : tail_(std::move(tail)) {}
    const Kernel2D& tail() const noexcept { return tail_; }

    /// f + ∫ q′(·, y) f(y) dy.
    Field1D apply(const Field1D& f) const;
    /// g ⋆ (δ + q′) = g + g ⋆ q′.
    Kernel2D right_compose(const Kernel2D& g) const;

private:
    Kernel2D tail_;
};

/// (g ⋆ h)(x, y) = ∫ g(x, z) h(z, y) dz by the grid quadrature.
Kernel2D star(const Kernel2D& g, const Kernel2D& h);

/// ‖k‖_HS² = Σ_i Σ_j w_i w_j |k(x_i, x_j)|².
double hs_norm(const Kernel2D& k);

/// LU factorization of I + D_w Q′, shared by det₂, the Fredholm solve and
/// the inverse kernel. Immutable once built; solves may run concurrently.
class AuxiliaryFactorization {
public:
    explicit AuxiliaryFactorization(const Kernel2D& qprime);

    const Grid1D& grid() const noexcept { return grid_; }
    cplx det2() const noexcept { return det2_; }
    /// log|det₂|; finite even when det₂ underflows.
    double log_abs_det2() const noexcept { return log_abs_det2_; }
    double rcond() const noexcept { return rcond_; }
    double qprime_hs() const noexcept { return qprime_hs_; }

    /// True when |det₂| or the condition estimate signal patch breakdown.
    bool broken() const noexcept;

    /// Solves G (I + D_w Q′) = P for G.
    Eigen::MatrixXcd solve_right(const Eigen::MatrixXcd& p) const;

private:
    Grid1D grid_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    cplx det2_;
    double log_abs_det2_;
    double rcond_;
    double qprime_hs_;
};

/// Full outcome of solving the Riccati relation p = g ⋆ (δ + q′).
struct FredholmResult {
    Kernel2D g;
    cplx det2;
    double rcond;
    double qprime_hs;
    /// ‖p − g − g⋆q′‖_HS / max(1, ‖p‖_HS).
    double residual;
};

/// Throws PatchBreakdown when |det₂| < 1e-8, the solve is numerically
/// singular, or the residual cannot be brought below 1e-10.
FredholmResult solve_riccati_relation(const Kernel2D& p, const Kernel2D& qprime, double time = 0.0);

/// Returns g with p = g + g ⋆ q′.
Kernel2D fredholm_solve(const Kernel2D& p, const Kernel2D& qprime);

/// det₂(id + Q′) = det(I + D_w Q′) e^{−tr(D_w Q′)}.
cplx det2(const Kernel2D& qprime);

/// q̃′ with (δ + q′) ⋆ (δ + q̃′) = δ, i.e. q′ + q̃′ + q′ ⋆ q̃′ = 0.
Kernel2D inverse_kernel(const Kernel2D& qprime);

/// ‖p − g ⋆ (δ + q′)‖_HS / max(1, ‖p‖_HS).
double riccati_relation_residual(const Kernel2D& p, const Kernel2D& g, const Kernel2D& qprime);

}  // namespace riccati
