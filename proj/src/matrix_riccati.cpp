#include "riccati/matrix_riccati.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "riccati/errors.hpp"

namespace riccati {

namespace {

int step_count(double t_final, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInput("time step must be positive and finite");
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw InvalidInput("final time must be non-negative and finite");
    }
    return static_cast<int>(std::ceil(t_final / dt - 1e-9));
}

bool blown_up(const Eigen::MatrixXcd& m) {
    if (!m.allFinite()) {
        return true;
    }
    return m.size() > 0 && m.cwiseAbs().maxCoeff() > kBlowUpMagnitude;
}

void require_shape(const Eigen::MatrixXcd& m, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream msg;
        msg << "block " << name << " must be " << rows << "x" << cols << ", got " << m.rows()
            << "x" << m.cols();
        throw InvalidInput(msg.str());
    }
}

}  // namespace

BlockSystem BlockSystem::constant(Eigen::MatrixXcd a, Eigen::MatrixXcd b, Eigen::MatrixXcd c,
                                  Eigen::MatrixXcd d) {
    BlockSystem sys;
    sys.k = static_cast<int>(a.rows());
    sys.m = static_cast<int>(d.rows());
    sys.A = [a = std::move(a)](double) { return a; };
    sys.B = [b = std::move(b)](double) { return b; };
    sys.C = [c = std::move(c)](double) { return c; };
    sys.D = [d = std::move(d)](double) { return d; };
    sys.check_shapes(0.0);
    return sys;
}

BlockSystem BlockSystem::random(int k, int m, std::uint64_t seed, double scale) {
    if (k < 1 || m < 1) {
        throw InvalidInput("block dimensions must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    auto draw = [&](int rows, int cols) {
        Eigen::MatrixXcd out(rows, cols);
        for (int j = 0; j < cols; ++j) {
            for (int i = 0; i < rows; ++i) {
                out(i, j) = normal(rng);
            }
        }
        return out;
    };
    Eigen::MatrixXcd a = draw(k, k);
    Eigen::MatrixXcd b = draw(k, m);
    Eigen::MatrixXcd c = draw(m, k);
    Eigen::MatrixXcd d = draw(m, m);
    return constant(std::move(a), std::move(b), std::move(c), std::move(d));
}

void BlockSystem::check_shapes(double t) const {
    if (k < 1 || m < 1) {
        throw InvalidInput("block dimensions must be positive");
    }
    if (!A || !B || !C || !D) {
        throw InvalidInput("all four blocks must be provided");
    }
    require_shape(A(t), k, k, "A");
    require_shape(B(t), k, m, "B");
    require_shape(C(t), m, k, "C");
    require_shape(D(t), m, m, "D");
}

std::vector<FrameState> integrate_frame_from(const BlockSystem& sys, const Eigen::MatrixXcd& Q0,
                                             const Eigen::MatrixXcd& P0, double t_final,
                                             double dt) {
    sys.check_shapes(0.0);
    if (Q0.rows() != sys.k || P0.rows() != sys.m || Q0.cols() != P0.cols()) {
        throw InvalidInput("initial frame does not match the block system");
    }
    const int steps = step_count(t_final, dt);
    const double h = steps > 0 ? t_final / steps : 0.0;

    auto rhs = [&sys](double t, const Eigen::MatrixXcd& Q, const Eigen::MatrixXcd& P) {
        const Eigen::MatrixXcd dQ = sys.A(t) * Q + sys.B(t) * P;
        const Eigen::MatrixXcd dP = sys.C(t) * Q + sys.D(t) * P;
        return std::pair{dQ, dP};
    };

    std::vector<FrameState> traj;
    traj.reserve(static_cast<std::size_t>(steps) + 1);
    traj.push_back({0.0, Q0, P0});
    Eigen::MatrixXcd Q = Q0;
    Eigen::MatrixXcd P = P0;
    for (int s = 0; s < steps; ++s) {
        const double t = s * h;
        const auto [k1q, k1p] = rhs(t, Q, P);
        const auto [k2q, k2p] = rhs(t + 0.5 * h, Q + 0.5 * h * k1q, P + 0.5 * h * k1p);
        const auto [k3q, k3p] = rhs(t + 0.5 * h, Q + 0.5 * h * k2q, P + 0.5 * h * k2p);
        const auto [k4q, k4p] = rhs(t + h, Q + h * k3q, P + h * k3p);
        Q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        P += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (!Q.allFinite() || !P.allFinite()) {
            throw InstabilityError("linear frame flow produced a non-finite state", t);
        }
        traj.push_back({(s + 1) * h, Q, P});
    }
    return traj;
}

std::vector<FrameState> integrate_frame(const BlockSystem& sys, const Eigen::MatrixXcd& G0,
                                        double t_final, double dt) {
    if (G0.rows() != sys.m || G0.cols() != sys.k) {
        throw InvalidInput("G0 must be (n-k)×k");
    }
    return integrate_frame_from(sys, Eigen::MatrixXcd::Identity(sys.k, sys.k), G0, t_final, dt);
}

namespace {

// rcond(Q) scaled by ‖Q‖₁ / ‖[Q; P]‖₁, i.e. 1 / (‖Q⁻¹‖₁ ‖[Q; P]‖₁). Unlike
// rcond(Q) alone this sees a 1×1 frame approaching Q = 0.
double relative_rcond(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, const FrameState& frame) {
    const Eigen::RowVectorXd q_cols = frame.Q.cwiseAbs().colwise().sum();
    Eigen::RowVectorXd frame_cols = q_cols;
    if (frame.P.size() > 0) {
        frame_cols += frame.P.cwiseAbs().colwise().sum();
    }
    const double q_norm = q_cols.maxCoeff();
    const double frame_norm = frame_cols.maxCoeff();
    if (!(q_norm > 0.0) || !(frame_norm > 0.0)) {
        return 0.0;
    }
    return lu.rcond() * q_norm / frame_norm;
}

}  // namespace

double frame_rcond(const FrameState& frame) {
    return relative_rcond(frame.Q.partialPivLu(), frame);
}

RiccatiState project(const FrameState& frame) {
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(frame.Q);
    const double rc = relative_rcond(lu, frame);
    if (!(rc >= kProjectRcond)) {
        std::ostringstream msg;
        msg << "Q is singular at t = " << frame.t << " (rcond = " << rc << ")";
        throw PatchBreakdown(msg.str(), frame.t, std::abs(lu.determinant()), rc);
    }
    // G Q = P  <=>  Qᵀ Gᵀ = Pᵀ.
    const Eigen::MatrixXcd pt = frame.P.transpose();
    const Eigen::MatrixXcd gt = lu.transpose().solve(pt);
    return {frame.t, gt.transpose()};
}

Eigen::MatrixXcd riccati_rhs(const BlockSystem& sys, double t, const Eigen::MatrixXcd& G) {
    return sys.C(t) + sys.D(t) * G - G * (sys.A(t) + sys.B(t) * G);
}

std::vector<RiccatiState> integrate_riccati_direct(const BlockSystem& sys,
                                                   const Eigen::MatrixXcd& G0, double t_final,
                                                   double dt) {
    sys.check_shapes(0.0);
    if (G0.rows() != sys.m || G0.cols() != sys.k) {
        throw InvalidInput("G0 must be (n-k)×k");
    }
    const int steps = step_count(t_final, dt);
    const double h = steps > 0 ? t_final / steps : 0.0;

    std::vector<RiccatiState> traj;
    traj.reserve(static_cast<std::size_t>(steps) + 1);
    traj.push_back({0.0, G0});
    Eigen::MatrixXcd G = G0;

    // Near a pole G ~ R/(t* − t), so t + ‖G‖/‖G'‖ estimates t*. The estimate
    // is taken from the last state the step still resolves (h‖G'‖ <= ‖G‖/2).
    double pole_estimate = std::numeric_limits<double>::infinity();
    auto update_estimate = [&](double t, const Eigen::MatrixXcd& g) {
        const double gn = g.norm();
        const double fn = riccati_rhs(sys, t, g).norm();
        if (gn > 0.0 && fn > 0.0 && h * fn <= 0.5 * gn) {
            pole_estimate = t + gn / fn;
        }
    };
    update_estimate(0.0, G);

    for (int s = 0; s < steps; ++s) {
        const double t = s * h;
        const Eigen::MatrixXcd k1 = riccati_rhs(sys, t, G);
        const Eigen::MatrixXcd k2 = riccati_rhs(sys, t + 0.5 * h, G + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = riccati_rhs(sys, t + 0.5 * h, G + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = riccati_rhs(sys, t + h, G + h * k3);
        Eigen::MatrixXcd next = G + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (blown_up(next)) {
            std::ostringstream msg;
            msg << "Riccati solution blew up after t = " << t << " (estimated pole at t = "
                << pole_estimate << ")";
            throw BlowUp(msg.str(), t, pole_estimate);
        }
        G = std::move(next);
        traj.push_back({(s + 1) * h, G});
        update_estimate((s + 1) * h, G);
    }
    return traj;
}

double max_projection_gap(const std::vector<FrameState>& frames,
                          const std::vector<RiccatiState>& direct) {
    if (frames.size() != direct.size()) {
        throw InvalidInput("trajectories must share a time mesh");
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        gap = std::max(gap, (project(frames[i]).G - direct[i].G).norm());
    }
    return gap;
}

}  // namespace riccati
