#include "riccati/flow_engine.hpp"

#include <cmath>
#include <sstream>

#include "riccati/errors.hpp"

namespace riccati {

namespace {

constexpr double kNormGrowthLimit = 1e8;

Eigen::VectorXd weight_vector(const Grid1D& grid) {
    const auto w = grid.weights();
    return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

// b applied to a physical kernel: b(x) p(x, y), p, or b(∂x) p.
Eigen::MatrixXcd apply_coupling(const Coupling& b, const Eigen::MatrixXcd& p, const Grid1D& grid) {
    return std::visit(
        [&](const auto& coupling) -> Eigen::MatrixXcd {
            using T = std::decay_t<decltype(coupling)>;
            if constexpr (std::is_same_v<T, UnitCoupling>) {
                return p;
            } else if constexpr (std::is_same_v<T, MultiplicativeCoupling>) {
                return coupling.samples.asDiagonal() * p;
            } else {
                Eigen::MatrixXcd out = p;
                apply_symbol_columns(out, coupling.symbol, grid);
                return out;
            }
        },
        b);
}

// Per-mode multiplier of b when it is diagonal in Fourier space.
std::optional<Eigen::VectorXcd> spectral_coupling(const Coupling& b, const Grid1D& grid) {
    if (std::holds_alternative<UnitCoupling>(b)) {
        return Eigen::VectorXcd::Ones(grid.size());
    }
    if (const auto* s = std::get_if<SymbolCoupling>(&b)) {
        return s->symbol.action(grid);
    }
    return std::nullopt;
}

Eigen::VectorXcd exp_vector(const Eigen::VectorXcd& z, double t, const Grid1D& grid) {
    Eigen::VectorXcd out(z.size());
    for (Eigen::Index m = 0; m < z.size(); ++m) {
        out(m) = exp_factor(z(m), t, grid.freq(static_cast<int>(m)));
    }
    return out;
}

Eigen::VectorXcd phi_vector(const Eigen::VectorXcd& z, double t, const Grid1D& grid) {
    Eigen::VectorXcd out(z.size());
    for (Eigen::Index m = 0; m < z.size(); ++m) {
        if (z(m).real() * t > kPropagatorOverflow) {
            const double k = grid.freq(static_cast<int>(m));
            throw InadmissibleSymbol("phi overflow at k = " + std::to_string(k), k,
                                     z(m).real() * t);
        }
        out(m) = phi_factor(z(m), t);
    }
    return out;
}

Det2Sample monitor_det2(const Kernel2D& qprime, double t) {
    const AuxiliaryFactorization fact(qprime);
    if (fact.broken()) {
        std::ostringstream msg;
        msg << "det2 monitor: patch breakdown at t = " << t << " (|det2| = "
            << std::abs(fact.det2()) << ", rcond = " << fact.rcond() << ")";
        throw PatchBreakdown(msg.str(), t, std::abs(fact.det2()), fact.rcond());
    }
    return {t, fact.det2(), fact.qprime_hs()};
}

bool essentially_real(cplx v) { return std::abs(v.imag()) <= 1e-10 * std::abs(v); }

// A real det₂ that changes sign between samples passed through zero.
void append_sample(std::vector<Det2Sample>& trace, const Det2Sample& s) {
    if (!trace.empty()) {
        const cplx prev = trace.back().det2;
        if (essentially_real(prev) && essentially_real(s.det2) &&
            prev.real() * s.det2.real() < 0.0) {
            std::ostringstream msg;
            msg << "det2 monitor: det2 changed sign in (" << trace.back().t << ", " << s.t
                << "]";
            throw PatchBreakdown(msg.str(), s.t, 0.0, 0.0);
        }
    }
    trace.push_back(s);
}

// Integrator for the general path. p is carried in Fourier space
// (column-wise in x) so the stiff part e^{d h} is diagonal. q′ is carried in
// Fourier space too when a = c = 0 and b is diagonal there, otherwise in
// physical space.
class LinearFlowStepper {
public:
    LinearFlowStepper(const FlowConfig& cfg, const Kernel2D& g0)
        : cfg_(cfg), grid_(cfg.grid), z_(cfg.d.action(cfg.grid)), w_(weight_vector(cfg.grid)) {
        if (!cfg.has_sources()) {
            b_hat_ = spectral_coupling(cfg.b, grid_);
        }
        p_hat_ = g0.values();
        dft_forward_columns(p_hat_, grid_);
        q_ = Eigen::MatrixXcd::Zero(grid_.size(), grid_.size());
        initial_norm_ = p_hat_.norm();
    }

    bool q_spectral() const { return b_hat_.has_value(); }

    void step(double t, double h) {
        if (h != cached_h_) {
            e_half_ = exp_vector(z_, 0.5 * h, grid_);
            e_full_ = exp_vector(z_, h, grid_);
            cached_h_ = h;
        }
        if (q_spectral()) {
            step_spectral(h);
        } else {
            step_physical(t, h);
        }

        const double norm = p_hat_.norm() + q_.norm();
        if (!std::isfinite(norm) || (initial_norm_ > 0.0 && norm > kNormGrowthLimit * initial_norm_)) {
            std::ostringstream msg;
            msg << "base/auxiliary integration unstable after t = " << t
                << " (norm growth " << norm / initial_norm_ << "); reduce dt";
            throw InstabilityError(msg.str(), t);
        }
    }

    Kernel2D p() const {
        Eigen::MatrixXcd out = p_hat_;
        dft_inverse_columns(out, grid_);
        return Kernel2D(grid_, std::move(out));
    }

    Kernel2D qprime() const {
        Eigen::MatrixXcd out = q_;
        if (q_spectral()) {
            dft_inverse_columns(out, grid_);
        }
        return Kernel2D(grid_, std::move(out));
    }

private:
    // Same Lawson RK4 stages as step_physical with p̂' = 0, q̂' = b̂ p̂,
    // evaluated entry by entry in one pass.
    void step_spectral(double h) {
        const Eigen::Index n = grid_.size();
        const Eigen::VectorXcd& b = *b_hat_;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index r = 0; r < n; ++r) {
                const cplx p = p_hat_(r, j);
                const cplx k1 = b(r) * p;
                const cplx k2 = b(r) * (e_half_(r) * p);
                const cplx k4 = b(r) * (e_full_(r) * p);
                q_(r, j) += (h / 6.0) * (k1 + 4.0 * k2 + k4);
                p_hat_(r, j) = e_full_(r) * p;
            }
        }
    }

    void step_physical(double t, double h) {
        const auto Eh = e_half_.asDiagonal();
        const auto E = e_full_.asDiagonal();

        const auto [k1p, k1q] = rhs(t, p_hat_, q_);
        Eigen::MatrixXcd p2 = Eh * (p_hat_ + 0.5 * h * k1p);
        Eigen::MatrixXcd q2 = q_ + 0.5 * h * k1q;
        const auto [k2p, k2q] = rhs(t + 0.5 * h, p2, q2);
        Eigen::MatrixXcd p3 = Eh * p_hat_ + 0.5 * h * k2p;
        Eigen::MatrixXcd q3 = q_ + 0.5 * h * k2q;
        const auto [k3p, k3q] = rhs(t + 0.5 * h, p3, q3);
        Eigen::MatrixXcd p4 = E * p_hat_ + h * (Eh * k3p);
        Eigen::MatrixXcd q4 = q_ + h * k3q;
        const auto [k4p, k4q] = rhs(t + h, p4, q4);

        p_hat_ = E * p_hat_ + (h / 6.0) * (E * k1p + 2.0 * (Eh * (k2p + k3p)) + k4p);
        q_ += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    }

    std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> rhs(double t, const Eigen::MatrixXcd& p_hat,
                                                      const Eigen::MatrixXcd& q) const {
        const Eigen::Index n = grid_.size();
        Eigen::MatrixXcd dp = Eigen::MatrixXcd::Zero(n, n);
        Eigen::MatrixXcd dq = Eigen::MatrixXcd::Zero(n, n);
        if (cfg_.c) {
            const Kernel2D c = cfg_.c(t);
            require_same_grid(c.grid(), grid_, "flow source c");
            dp = c.values() + c.values() * (w_.asDiagonal() * q);
            dft_forward_columns(dp, grid_);
        }
        if (cfg_.a) {
            const Kernel2D a = cfg_.a(t);
            require_same_grid(a.grid(), grid_, "flow source a");
            dq = a.values() + a.values() * (w_.asDiagonal() * q);
        }
        Eigen::MatrixXcd p = p_hat;
        dft_inverse_columns(p, grid_);
        dq += apply_coupling(cfg_.b, p, grid_);
        return {std::move(dp), std::move(dq)};
    }

    const FlowConfig& cfg_;
    Grid1D grid_;
    Eigen::VectorXcd z_;
    Eigen::VectorXd w_;
    std::optional<Eigen::VectorXcd> b_hat_;
    Eigen::MatrixXcd p_hat_;
    Eigen::MatrixXcd q_;
    double initial_norm_ = 0.0;
    double cached_h_ = -1.0;
    Eigen::VectorXcd e_half_;
    Eigen::VectorXcd e_full_;
};

void check_initial_kernel(const FlowConfig& cfg, const Kernel2D& g0) {
    require_same_grid(cfg.grid, g0.grid(), "flow initial data");
    if (!g0.all_finite()) {
        throw InvalidInput("initial kernel has non-finite entries");
    }
}

}  // namespace

void FlowConfig::validate() const {
    if (!d.admissible(grid)) {
        std::ostringstream msg;
        msg << "symbol d is neither diffusive nor dispersive on this grid (max Re d = "
            << d.max_growth(grid) << ")";
        throw InvalidInput(msg.str());
    }
    if (const auto* mb = std::get_if<MultiplicativeCoupling>(&b)) {
        if (mb->samples.size() != grid.size() || !mb->samples.allFinite()) {
            throw InvalidInput("b must be given as finite samples on the grid");
        }
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw InvalidInput("t_final must be non-negative and finite");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInput("dt must be positive and finite");
    }
    if (det2_stride < 1 || fast_trace_samples < 1) {
        throw InvalidInput("det2 stride and trace sample count must be positive");
    }
}

std::vector<FlowState> evolve_general_at(const FlowConfig& cfg, const Kernel2D& g0,
                                         const std::vector<double>& times) {
    cfg.validate();
    check_initial_kernel(cfg, g0);
    double prev = 0.0;
    for (double t : times) {
        if (!(t >= prev) || !std::isfinite(t)) {
            throw InvalidInput("output times must be finite, non-negative and ascending");
        }
        prev = t;
    }

    LinearFlowStepper stepper(cfg, g0);
    std::vector<Det2Sample> trace;
    append_sample(trace, monitor_det2(Kernel2D::zero(cfg.grid), 0.0));

    std::vector<FlowState> out;
    out.reserve(times.size());
    double t = 0.0;
    long global_step = 0;
    for (double target : times) {
        const double span = target - t;
        const int steps = span > 0.0 ? static_cast<int>(std::ceil(span / cfg.dt - 1e-9)) : 0;
        const double h = steps > 0 ? span / steps : 0.0;
        for (int s = 0; s < steps; ++s) {
            stepper.step(t, h);
            t = (s + 1 == steps) ? target : t + h;
            ++global_step;
            if (global_step % cfg.det2_stride == 0 && s + 1 < steps) {
                append_sample(trace, monitor_det2(stepper.qprime(), t));
            }
        }
        Kernel2D q = stepper.qprime();
        if (trace.back().t != target) {
            append_sample(trace, monitor_det2(q, target));
        }
        // Before the first step the state is the initial data verbatim.
        Kernel2D p = global_step == 0 ? g0 : stepper.p();
        out.push_back(FlowState{target, std::move(p), std::move(q), std::nullopt, trace});
    }
    return out;
}

FlowState evolve_general(const FlowConfig& cfg, const Kernel2D& g0) {
    return std::move(evolve_general_at(cfg, g0, {cfg.t_final}).back());
}

FlowState evolve_fast_at(const FlowConfig& cfg, const Kernel2D& g0, double t) {
    cfg.validate();
    check_initial_kernel(cfg, g0);
    if (cfg.has_sources()) {
        throw InvalidInput("the closed-form path requires a = c = 0");
    }
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InvalidInput("evaluation time must be non-negative and finite");
    }
    const Grid1D& grid = cfg.grid;
    const Eigen::VectorXcd z = cfg.d.action(grid);
    const auto b_hat = spectral_coupling(cfg.b, grid);

    Eigen::MatrixXcd g0_hat = g0.values();
    dft_forward_columns(g0_hat, grid);

    auto auxiliary_at = [&](double s) {
        Eigen::MatrixXcd q = phi_vector(z, s, grid).asDiagonal() * g0_hat;
        if (b_hat) {
            q = b_hat->asDiagonal() * q;
            dft_inverse_columns(q, grid);
        } else {
            dft_inverse_columns(q, grid);
            q = apply_coupling(cfg.b, q, grid);
        }
        return Kernel2D(grid, std::move(q));
    };

    std::vector<Det2Sample> trace;
    append_sample(trace, monitor_det2(Kernel2D::zero(grid), 0.0));
    if (t > 0.0) {
        for (int j = 1; j < cfg.fast_trace_samples; ++j) {
            const double s = t * j / cfg.fast_trace_samples;
            append_sample(trace, monitor_det2(auxiliary_at(s), s));
        }
    }

    Eigen::MatrixXcd p = exp_vector(z, t, grid).asDiagonal() * g0_hat;
    dft_inverse_columns(p, grid);
    Kernel2D q = auxiliary_at(t);
    if (t > 0.0) {
        append_sample(trace, monitor_det2(q, t));
    }
    return FlowState{t, Kernel2D(grid, std::move(p)), std::move(q), std::nullopt, std::move(trace)};
}

FlowState evolve_fast(const FlowConfig& cfg, const Kernel2D& g0) {
    return evolve_fast_at(cfg, g0, cfg.t_final);
}

const Kernel2D& riccati_solution(FlowState& state) {
    FredholmResult r = solve_riccati_relation(state.p, state.qprime, state.t);
    state.fredholm_residual = r.residual;
    state.det2 = r.det2;
    state.g = std::move(r.g);
    return *state.g;
}

Kernel2D pde_rhs(const FlowConfig& cfg, double t, const Kernel2D& g) {
    require_same_grid(cfg.grid, g.grid(), "pde_rhs");
    const Grid1D& grid = cfg.grid;
    Eigen::MatrixXcd dg = g.values();
    apply_symbol_columns(dg, cfg.d, grid);

    Eigen::MatrixXcd inner = apply_coupling(cfg.b, g.values(), grid);
    if (cfg.a) {
        inner += cfg.a(t).values();
    }
    const Eigen::VectorXd w = weight_vector(grid);
    Eigen::MatrixXcd out = dg - (g.values() * w.asDiagonal()) * inner;
    if (cfg.c) {
        out += cfg.c(t).values();
    }
    return Kernel2D(grid, std::move(out));
}

double pde_residual(const Kernel2D& g_minus, const Kernel2D& g, const Kernel2D& g_plus, double h,
                    const FlowConfig& cfg, double t) {
    if (!(h > 0.0)) {
        throw InvalidInput("pde_residual: h must be positive");
    }
    Kernel2D dgdt = g_plus - g_minus;
    dgdt *= 1.0 / (2.0 * h);
    const Kernel2D rhs = pde_rhs(cfg, t, g);
    const double denom = hs_norm(rhs);
    const double num = hs_norm(dgdt - rhs);
    return denom > 0.0 ? num / denom : num;
}

}  // namespace riccati
