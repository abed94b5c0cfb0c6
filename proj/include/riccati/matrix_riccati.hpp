#pragma once

// Finite-dimensional prototype: the linear frame flow
//
//     Q' = A Q + B P,    P' = C Q + D P,    Q(0) = I_k, P(0) = G0,
//
// projected to G = P Q⁻¹ solves the matrix Riccati equation
//
//     G' = C + D G − G (A + B G),    G(0) = G0.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace riccati {

/// Frame condition below which Q is treated as singular.
inline constexpr double kProjectRcond = 1e-12;
/// Entry magnitude treated as blow-up.
inline constexpr double kBlowUpMagnitude = 1e12;

struct BlockSystem {
    using Block = std::function<Eigen::MatrixXcd(double)>;

    int k = 0;  // dimension of the chart subspace
    int m = 0;  // n − k
    Block A, B, C, D;

    static BlockSystem constant(Eigen::MatrixXcd a, Eigen::MatrixXcd b, Eigen::MatrixXcd c,
                                Eigen::MatrixXcd d);
    /// Real Gaussian blocks with entries N(0, scale²) from a seeded engine.
    static BlockSystem random(int k, int m, std::uint64_t seed, double scale = 1.0);

    /// Throws InvalidInput when any block at time t has the wrong shape.
    void check_shapes(double t) const;
};

struct FrameState {
    double t = 0.0;
    Eigen::MatrixXcd Q;  // k×k
    Eigen::MatrixXcd P;  // m×k
};

struct RiccatiState {
    double t = 0.0;
    Eigen::MatrixXcd G;  // m×k
};

/// Classical RK4 on the frame flow. The step is t_final / ceil(t_final / dt).
std::vector<FrameState> integrate_frame(const BlockSystem& sys, const Eigen::MatrixXcd& G0,
                                        double t_final, double dt);

/// Same flow from arbitrary (Q0, P0); used for the superposition property.
std::vector<FrameState> integrate_frame_from(const BlockSystem& sys, const Eigen::MatrixXcd& Q0,
                                             const Eigen::MatrixXcd& P0, double t_final,
                                             double dt);

/// G = P Q⁻¹ by a linear solve. Throws PatchBreakdown when frame_rcond < 1e-12.
RiccatiState project(const FrameState& frame);

/// 1 / (‖Q⁻¹‖₁ ‖[Q; P]‖₁), a lower bound of rcond(Q) that stays meaningful
/// when the whole frame shrinks or grows.
double frame_rcond(const FrameState& frame);

/// Riccati vector field C + D G − G (A + B G) at time t.
Eigen::MatrixXcd riccati_rhs(const BlockSystem& sys, double t, const Eigen::MatrixXcd& G);

/// RK4 on the Riccati equation. Throws BlowUp (with the last good time and a
/// pole estimate) when an entry exceeds 1e12 or turns non-finite.
std::vector<RiccatiState> integrate_riccati_direct(const BlockSystem& sys,
                                                   const Eigen::MatrixXcd& G0, double t_final,
                                                   double dt);

/// max_t ‖P Q⁻¹ − G_direct‖_F over two trajectories on the same time mesh.
double max_projection_gap(const std::vector<FrameState>& frames,
                          const std::vector<RiccatiState>& direct);

}  // namespace riccati
