#include "riccati/kernel_ops.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "riccati/errors.hpp"

namespace riccati {

namespace {

Eigen::VectorXd weight_vector(const Grid1D& grid) {
    const auto w = grid.weights();
    return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

void require_square(const Eigen::MatrixXcd& m, const Grid1D& grid) {
    if (m.rows() != grid.size() || m.cols() != grid.size()) {
        throw InvalidInput("kernel sample matrix must be n×n on its grid");
    }
}

}  // namespace

Kernel2D::Kernel2D(Grid1D grid)
    : grid_(std::move(grid)), values_(Eigen::MatrixXcd::Zero(grid_.size(), grid_.size())) {}

Kernel2D::Kernel2D(Grid1D grid, Eigen::MatrixXcd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    require_square(values_, grid_);
}

Kernel2D Kernel2D::sample(const Grid1D& grid, const std::function<cplx(double, double)>& f) {
    Kernel2D k(grid);
    const int n = grid.size();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            k.values_(i, j) = f(grid.point(i), grid.point(j));
        }
    }
    return k;
}

Kernel2D& Kernel2D::operator+=(const Kernel2D& other) {
    require_same_grid(grid_, other.grid_, "Kernel2D::operator+=");
    values_ += other.values_;
    return *this;
}

Kernel2D& Kernel2D::operator-=(const Kernel2D& other) {
    require_same_grid(grid_, other.grid_, "Kernel2D::operator-=");
    values_ -= other.values_;
    return *this;
}

Kernel2D& Kernel2D::operator*=(cplx s) {
    values_ *= s;
    return *this;
}

bool Kernel2D::all_finite() const { return values_.allFinite(); }

Kernel2D operator+(Kernel2D a, const Kernel2D& b) { return a += b; }
Kernel2D operator-(Kernel2D a, const Kernel2D& b) { return a -= b; }
Kernel2D operator*(cplx s, Kernel2D a) { return a *= s; }

Field1D IdentityPlus::apply(const Field1D& f) const {
    const Grid1D& grid = tail_.grid();
    if (f.size() != grid.size()) {
        throw InvalidInput("IdentityPlus::apply: field length does not match grid");
    }
    const Eigen::VectorXd w = weight_vector(grid);
    return f + tail_.values() * (w.asDiagonal() * f);
}

Kernel2D IdentityPlus::right_compose(const Kernel2D& g) const {
    return g + star(g, tail_);
}

Kernel2D star(const Kernel2D& g, const Kernel2D& h) {
    require_same_grid(g.grid(), h.grid(), "star");
    const Eigen::VectorXd w = weight_vector(g.grid());
    Eigen::MatrixXcd out = g.values() * w.asDiagonal();
    out = out * h.values();
    return Kernel2D(g.grid(), std::move(out));
}

double hs_norm(const Kernel2D& k) {
    const Eigen::VectorXd w = weight_vector(k.grid()).cwiseSqrt();
    return (w.asDiagonal() * k.values() * w.asDiagonal()).norm();
}

AuxiliaryFactorization::AuxiliaryFactorization(const Kernel2D& qprime) : grid_(qprime.grid()) {
    if (!qprime.all_finite()) {
        throw InvalidInput("auxiliary kernel has non-finite samples");
    }
    const int n = grid_.size();
    const Eigen::VectorXd w = weight_vector(grid_);
    Eigen::MatrixXcd a = w.asDiagonal() * qprime.values();
    const cplx trace = a.trace();
    a.diagonal().array() += 1.0;
    lu_.compute(a);

    // det(I + A) from the LU diagonal in log form, then divide by e^{tr A}.
    double log_abs = 0.0;
    double arg = lu_.permutationP().determinant() < 0 ? std::numbers::pi : 0.0;
    const auto& packed = lu_.matrixLU();
    for (int i = 0; i < n; ++i) {
        const cplx u = packed(i, i);
        log_abs += std::log(std::abs(u));
        arg += std::arg(u);
    }
    log_abs_det2_ = log_abs - trace.real();
    const double phase = arg - trace.imag();
    det2_ = std::polar(std::exp(log_abs_det2_), phase);
    rcond_ = lu_.rcond();
    qprime_hs_ = hs_norm(qprime);
}

bool AuxiliaryFactorization::broken() const noexcept {
    return !(log_abs_det2_ >= std::log(kPatchBreakdownDet2)) || !(rcond_ >= kSingularRcond);
}

Eigen::MatrixXcd AuxiliaryFactorization::solve_right(const Eigen::MatrixXcd& p) const {
    // G M = P  <=>  Mᵀ Gᵀ = Pᵀ.
    Eigen::MatrixXcd pt = p.transpose();
    Eigen::MatrixXcd gt = lu_.transpose().solve(pt);
    return gt.transpose();
}

double riccati_relation_residual(const Kernel2D& p, const Kernel2D& g, const Kernel2D& qprime) {
    require_same_grid(p.grid(), g.grid(), "riccati_relation_residual");
    require_same_grid(p.grid(), qprime.grid(), "riccati_relation_residual");
    const Kernel2D r = p - g - star(g, qprime);
    return hs_norm(r) / std::max(1.0, hs_norm(p));
}

FredholmResult solve_riccati_relation(const Kernel2D& p, const Kernel2D& qprime, double time) {
    require_same_grid(p.grid(), qprime.grid(), "fredholm_solve");
    const AuxiliaryFactorization fact(qprime);
    if (fact.broken()) {
        std::ostringstream msg;
        msg << "patch breakdown at t = " << time << ": |det2| = " << std::abs(fact.det2())
            << ", rcond = " << fact.rcond();
        throw PatchBreakdown(msg.str(), time, std::abs(fact.det2()), fact.rcond());
    }
    Kernel2D g(p.grid(), fact.solve_right(p.values()));
    double residual = riccati_relation_residual(p, g, qprime);
    // One step of iterative refinement before giving up.
    if (residual > kFredholmResidualTol) {
        const Kernel2D r = p - g - star(g, qprime);
        g.values() += fact.solve_right(r.values());
        residual = riccati_relation_residual(p, g, qprime);
    }
    if (!(residual <= kFredholmResidualTol)) {
        std::ostringstream msg;
        msg << "Riccati relation numerically singular at t = " << time
            << ": residual = " << residual << ", rcond = " << fact.rcond();
        throw PatchBreakdown(msg.str(), time, std::abs(fact.det2()), fact.rcond());
    }
    return FredholmResult{std::move(g), fact.det2(), fact.rcond(), fact.qprime_hs(), residual};
}

Kernel2D fredholm_solve(const Kernel2D& p, const Kernel2D& qprime) {
    return solve_riccati_relation(p, qprime).g;
}

cplx det2(const Kernel2D& qprime) { return AuxiliaryFactorization(qprime).det2(); }

Kernel2D inverse_kernel(const Kernel2D& qprime) {
    // (I + Q′ D_w) q̃′ = −q′.
    const Grid1D& grid = qprime.grid();
    const AuxiliaryFactorization fact(qprime);
    if (fact.broken()) {
        throw PatchBreakdown("inverse_kernel: auxiliary operator is not invertible", 0.0,
                             std::abs(fact.det2()), fact.rcond());
    }
    const Eigen::VectorXd w = weight_vector(grid);
    Eigen::MatrixXcd m = qprime.values() * w.asDiagonal();
    m.diagonal().array() += 1.0;
    Eigen::MatrixXcd tilde = m.partialPivLu().solve(-qprime.values());
    return Kernel2D(grid, std::move(tilde));
}

}  // namespace riccati
