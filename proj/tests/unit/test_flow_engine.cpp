#include <cmath>
#include <numbers>

#include "doctest.h"
#include "riccati/errors.hpp"
#include "riccati/flow_engine.hpp"
#include "riccati/models.hpp"

using namespace riccati;
using Eigen::MatrixXcd;
using std::numbers::pi;

namespace {

Kernel2D gaussian_kernel(const Grid1D& grid, double scale) {
    return Kernel2D::sample(grid, [scale](double x, double y) {
        return cplx(scale * std::exp(-x * x - 0.5 * y * y), 0.1 * scale * x * std::exp(-x * x - y * y));
    });
}

// Dense matrix of d(∂x) acting on samples: real-space derivative of each
// Fourier basis vector, built one unit vector at a time.
MatrixXcd symbol_matrix(const SpectralSymbol& d, const Grid1D& grid) {
    MatrixXcd m = MatrixXcd::Identity(grid.size(), grid.size());
    apply_symbol_columns(m, d, grid);
    return m;
}

// RK4 on the dense linear system for (Q′, P) with b ≡ 1 and constant a, c:
//   Q′' = A + A W Q′ + P,  P' = C + C W Q′ + D P.
std::pair<MatrixXcd, MatrixXcd> dense_flow(const MatrixXcd& a, const MatrixXcd& c,
                                           const MatrixXcd& dmat, const MatrixXcd& w,
                                           const MatrixXcd& g0, double t, int steps) {
    const double h = t / steps;
    MatrixXcd q = MatrixXcd::Zero(g0.rows(), g0.cols());
    MatrixXcd p = g0;
    auto rhs = [&](const MatrixXcd& qq, const MatrixXcd& pp) {
        return std::pair<MatrixXcd, MatrixXcd>{a + a * w * qq + pp, c + c * w * qq + dmat * pp};
    };
    for (int s = 0; s < steps; ++s) {
        const auto [k1q, k1p] = rhs(q, p);
        const auto [k2q, k2p] = rhs(q + 0.5 * h * k1q, p + 0.5 * h * k1p);
        const auto [k3q, k3p] = rhs(q + 0.5 * h * k2q, p + 0.5 * h * k2p);
        const auto [k4q, k4p] = rhs(q + h * k3q, p + h * k3p);
        q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    return {q, p};
}

}  // namespace

TEST_CASE("decoupled flow: g is the linear evolution of g0") {
    const Grid1D grid(4.0, 32);
    FlowConfig cfg(grid, SpectralSymbol({0.5, 0.0, 1.0}));
    cfg.b = zero_coupling(grid);
    cfg.t_final = 0.4;
    const Kernel2D g0 = gaussian_kernel(grid, 1.0);

    MatrixXcd expected = g0.values();
    dft_forward_columns(expected, grid);
    for (int m = 0; m < grid.size(); ++m) {
        expected.row(m) *= propagator(cfg.d, -grid.freq(m), 0.4);
    }
    dft_inverse_columns(expected, grid);

    for (bool general : {false, true}) {
        FlowState state = general ? evolve_general(cfg, g0) : evolve_fast(cfg, g0);
        CHECK(hs_norm(state.qprime) == 0.0);
        const Kernel2D& g = riccati_solution(state);
        CHECK((g.values() - expected).norm() / expected.norm() < 1e-12);
        CHECK(state.det2 == cplx(1.0, 0.0));
    }
}

TEST_CASE("general and closed-form paths agree") {
    const Grid1D grid(4.0, 32);
    FlowConfig cfg(grid, SpectralSymbol({1.0, 0.0, 1.0}));
    cfg.t_final = 0.5;
    const Kernel2D g0 = gaussian_kernel(grid, 0.3);
    for (const Coupling& b : {Coupling{UnitCoupling{}}, Coupling{SymbolCoupling{SpectralSymbol({1.0, 0.0, 0.1})}},
                              Coupling{MultiplicativeCoupling{Eigen::VectorXd::Constant(32, 0.7)}}}) {
        cfg.b = b;
        FlowState fast = evolve_fast(cfg, g0);
        FlowState gen = evolve_general(cfg, g0);
        CHECK(hs_norm(gen.p - fast.p) / hs_norm(fast.p) < 1e-12);
        CHECK(hs_norm(gen.qprime - fast.qprime) / hs_norm(fast.qprime) < 1e-8);
        const Kernel2D gf = riccati_solution(fast);
        const Kernel2D gg = riccati_solution(gen);
        CHECK(hs_norm(gg - gf) / hs_norm(gf) < 1e-8);
    }
}

TEST_CASE("constant source kernels match a dense operator flow") {
    const Grid1D grid(2.0, 16);
    FlowConfig cfg(grid, SpectralSymbol({0.0, 0.0, 0.2}));
    const Kernel2D a = Kernel2D::sample(grid, [](double x, double y) {
        return cplx(0.3 * std::exp(-x * x - y * y), 0.0);
    });
    const Kernel2D c = Kernel2D::sample(grid, [](double x, double y) {
        return cplx(-0.2 * std::exp(-(x - y) * (x - y)), 0.05);
    });
    cfg.a = [a](double) { return a; };
    cfg.c = [c](double) { return c; };
    cfg.t_final = 0.5;
    cfg.dt = 1e-3;
    const Kernel2D g0 = gaussian_kernel(grid, 0.5);

    FlowState state = evolve_general(cfg, g0);

    MatrixXcd w = MatrixXcd::Zero(16, 16);
    for (int i = 0; i < 16; ++i) {
        w(i, i) = grid.weights()[static_cast<std::size_t>(i)];
    }
    const auto [q_ref, p_ref] =
        dense_flow(a.values(), c.values(), symbol_matrix(cfg.d, grid), w, g0.values(), 0.5, 5000);
    CHECK((state.p.values() - p_ref).norm() / p_ref.norm() < 1e-9);
    CHECK((state.qprime.values() - q_ref).norm() / q_ref.norm() < 1e-9);
    CHECK_THROWS_AS(evolve_fast(cfg, g0), InvalidInput);
}

TEST_CASE("output at t = 0 is the initial data") {
    const Grid1D grid(3.0, 16);
    FlowConfig cfg(grid, SpectralSymbol({1.0, 0.0, 1.0}));
    const Kernel2D g0 = gaussian_kernel(grid, 1.0);
    const auto states = evolve_general_at(cfg, g0, {0.0, 0.1});
    REQUIRE(states.size() == 2);
    CHECK(states[0].p.values() == g0.values());
    CHECK(hs_norm(states[0].qprime) == 0.0);
    FlowState fast = evolve_fast_at(cfg, g0, 0.0);
    CHECK((fast.p.values() - g0.values()).norm() < 1e-14);
    CHECK(hs_norm(fast.qprime) == 0.0);
}

TEST_CASE("det2 trace starts at the identity") {
    const Grid1D grid(3.0, 16);
    FlowConfig cfg(grid, SpectralSymbol({1.0, 0.0, 1.0}));
    cfg.t_final = 0.2;
    cfg.dt = 0.01;
    cfg.det2_stride = 5;
    const Kernel2D g0 = gaussian_kernel(grid, 0.4);
    for (const FlowState& s : {evolve_general(cfg, g0), evolve_fast(cfg, g0)}) {
        REQUIRE(s.det2_trace.size() >= 2);
        CHECK(s.det2_trace.front().t == 0.0);
        CHECK(s.det2_trace.front().det2 == cplx(1.0, 0.0));
        CHECK(s.det2_trace.front().qprime_hs == 0.0);
        CHECK(s.det2_trace.back().t == doctest::Approx(0.2));
        for (std::size_t i = 1; i < s.det2_trace.size(); ++i) {
            CHECK(s.det2_trace[i].t > s.det2_trace[i - 1].t);
        }
    }
    CHECK(evolve_general(cfg, g0).det2_trace.size() == 5);
}

TEST_CASE("translation-invariant data stays translation invariant") {
    const Grid1D grid(5.0, 32);
    Field1D profile(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        profile(i) = 0.4 * std::exp(-grid.point(i) * grid.point(i));
    }
    const Kernel2D g0 = translation_kernel(profile, grid);
    CHECK(translation_invariance_deviation(g0) == 0.0);
    FlowConfig cfg(grid, SpectralSymbol({1.0, 0.0, 1.0}));
    cfg.t_final = 0.5;
    cfg.dt = 5e-3;
    FlowState state = evolve_general(cfg, g0);
    CHECK(translation_invariance_deviation(riccati_solution(state)) < 1e-10);
}

TEST_CASE("pde residual of the constructed solution") {
    const Grid1D grid(4.0, 32);
    FlowConfig cfg(grid, SpectralSymbol({1.0, 0.0, 0.5}));
    cfg.b = MultiplicativeCoupling{Eigen::VectorXd::Constant(32, 0.5)};
    const Kernel2D g0 = gaussian_kernel(grid, 0.5);
    auto g_at = [&](double t) {
        FlowState s = evolve_fast_at(cfg, g0, t);
        return riccati_solution(s);
    };
    const double t = 0.3;
    const Kernel2D g = g_at(t);
    const double r1 = pde_residual(g_at(t - 1e-2), g, g_at(t + 1e-2), 1e-2, cfg, t);
    const double r2 = pde_residual(g_at(t - 5e-3), g, g_at(t + 5e-3), 5e-3, cfg, t);
    CHECK(r1 < 1e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.25));

    // Wrong nonlinearity sign leaves an O(1) residual.
    FlowConfig wrong = cfg;
    wrong.b = MultiplicativeCoupling{Eigen::VectorXd::Constant(32, -0.5)};
    CHECK(pde_residual(g_at(t - 5e-3), g, g_at(t + 5e-3), 5e-3, wrong, t) > 1e-2);
    CHECK_THROWS_AS(pde_residual(g, g, g, 0.0, cfg, t), InvalidInput);
}

TEST_CASE("configuration validation") {
    const Grid1D grid(3.0, 16);
    const Kernel2D g0 = gaussian_kernel(grid, 1.0);
    FlowConfig bad(grid, SpectralSymbol({0.0, 0.0, -1.0}));
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    FlowConfig cfg(grid, SpectralSymbol({0.0, 0.0, 1.0}));
    cfg.dt = 0.0;
    CHECK_THROWS_AS(evolve_general(cfg, g0), InvalidInput);
    cfg.dt = 1e-3;
    cfg.b = MultiplicativeCoupling{Eigen::VectorXd::Zero(8)};
    CHECK_THROWS_AS(evolve_fast(cfg, g0), InvalidInput);
    cfg.b = UnitCoupling{};
    CHECK_THROWS_AS(evolve_general_at(cfg, g0, {0.2, 0.1}), InvalidInput);
    CHECK_THROWS_AS(evolve_fast(cfg, Kernel2D::zero(Grid1D(3.0, 32))), InvalidInput);
}

TEST_CASE("strong negative coupling breaks the patch") {
    const Grid1D grid(3.0, 16);
    FlowConfig cfg(grid, SpectralSymbol({1.0}));
    const Kernel2D g0 = Kernel2D::sample(grid, [](double x, double y) {
        return cplx(-std::exp(-x * x - y * y), 0.0);
    });
    cfg.t_final = 5.0;
    cfg.dt = 1e-2;
    CHECK_THROWS_AS(evolve_general(cfg, g0), PatchBreakdown);
}
