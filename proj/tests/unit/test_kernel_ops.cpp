#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "riccati/errors.hpp"
#include "riccati/kernel_ops.hpp"

using namespace riccati;
using std::numbers::pi;

namespace {

Kernel2D random_kernel(const Grid1D& grid, unsigned seed, double target_hs) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd v(grid.size(), grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        for (int i = 0; i < grid.size(); ++i) {
            v(i, j) = cplx(normal(rng), normal(rng));
        }
    }
    Kernel2D k(grid, v);
    k *= target_hs / hs_norm(k);
    return k;
}

Field1D gaussian(const Grid1D& grid, double center) {
    Field1D f(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.point(i) - center;
        f(i) = std::exp(-x * x);
    }
    return f;
}

// Rank-one kernel u(x) v(y).
Kernel2D outer(const Grid1D& grid, const Field1D& u, const Field1D& v) {
    return Kernel2D(grid, u * v.transpose());
}

cplx weighted_dot(const Grid1D& grid, const Field1D& v, const Field1D& u) {
    cplx s = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        s += v(i) * grid.weights()[static_cast<std::size_t>(i)] * u(i);
    }
    return s;
}

}  // namespace

TEST_CASE("star of Gaussians") {
    const Grid1D grid(20.0, 512);
    const auto gauss = [](double x, double y) { return cplx(std::exp(-pi * (x - y) * (x - y))); };
    const Kernel2D g = Kernel2D::sample(grid, gauss);
    const Kernel2D gg = star(g, g);
    double err = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        for (int i = 0; i < grid.size(); ++i) {
            const double x = grid.point(i);
            const double y = grid.point(j);
            if (std::abs(x) > 15.0 || std::abs(y) > 15.0) {
                continue;
            }
            const double expected = std::exp(-pi * (x - y) * (x - y) / 2.0) / std::sqrt(2.0);
            err = std::max(err, std::abs(gg(i, j) - expected));
        }
    }
    CHECK(err < 1e-8);
}

TEST_CASE("star is associative and bilinear") {
    const Grid1D grid(2.0, 24);
    const Kernel2D a = random_kernel(grid, 1, 1.0);
    const Kernel2D b = random_kernel(grid, 2, 1.0);
    const Kernel2D c = random_kernel(grid, 3, 1.0);
    const Kernel2D left = star(star(a, b), c);
    const Kernel2D right = star(a, star(b, c));
    CHECK((left.values() - right.values()).norm() / left.values().norm() < 1e-13);
    const Kernel2D lin = star(a, b + cplx(2.0, -1.0) * c);
    const Kernel2D sum = star(a, b) + cplx(2.0, -1.0) * star(a, c);
    CHECK((lin.values() - sum.values()).norm() / lin.values().norm() < 1e-13);
}

TEST_CASE("star rejects mismatched grids") {
    const Kernel2D a = Kernel2D::zero(Grid1D(1.0, 16));
    const Kernel2D b = Kernel2D::zero(Grid1D(2.0, 16));
    CHECK_THROWS_AS(star(a, b), GridMismatch);
    CHECK_THROWS_AS(star(a, Kernel2D::zero(Grid1D(1.0, 32))), GridMismatch);
}

TEST_CASE("HS norm of a separable Gaussian") {
    const Grid1D grid(20.0, 512);
    const Kernel2D k = Kernel2D::sample(grid, [](double x, double y) {
        return cplx(std::exp(-pi * (x * x + y * y)));
    });
    CHECK(hs_norm(k) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(hs_norm(Kernel2D::zero(grid)) == 0.0);
}

TEST_CASE("HS norm is homogeneous") {
    const Grid1D grid(3.0, 32);
    const Kernel2D k = random_kernel(grid, 9, 2.5);
    const cplx s(-1.5, 2.0);
    CHECK(hs_norm(s * k) == doctest::Approx(std::abs(s) * hs_norm(k)).epsilon(1e-13));
}

TEST_CASE("det2 of the zero kernel is exactly one") {
    const Grid1D grid(3.0, 32);
    CHECK(det2(Kernel2D::zero(grid)) == cplx(1.0, 0.0));
}

TEST_CASE("det2 of a rank-one kernel") {
    // det₂(id + u⊗v) = (1 + ⟨v, u⟩) e^{−⟨v, u⟩}.
    const Grid1D grid(6.0, 64);
    const Field1D u = gaussian(grid, 0.5);
    const Field1D v = cplx(0.3, 0.2) * gaussian(grid, -0.25);
    const cplx s = weighted_dot(grid, v, u);
    const cplx expected = (1.0 + s) * std::exp(-s);
    CHECK(std::abs(det2(outer(grid, u, v)) - expected) < 1e-12);
}

TEST_CASE("det2 agrees with the eigenvalue product") {
    const Grid1D grid(1.0, 8);
    for (unsigned seed = 0; seed < 10; ++seed) {
        const Kernel2D q = random_kernel(grid, 100 + seed, 0.8);
        Eigen::MatrixXcd a = q.values();
        for (int j = 0; j < grid.size(); ++j) {
            a.row(j) *= grid.weights()[static_cast<std::size_t>(j)];
        }
        const Eigen::VectorXcd lambda = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(a).eigenvalues();
        cplx expected = 1.0;
        for (int i = 0; i < lambda.size(); ++i) {
            expected *= (1.0 + lambda(i)) * std::exp(-lambda(i));
        }
        CHECK(std::abs(det2(q) - expected) < 1e-12 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("Fredholm solve of a rank-one auxiliary kernel") {
    // g = p − (p ⋆ u) ⊗ v / (1 + ⟨v, u⟩) by Sherman–Morrison.
    const Grid1D grid(6.0, 64);
    const Field1D u = gaussian(grid, 0.0);
    const Field1D v = cplx(0.5, -0.1) * gaussian(grid, 1.0);
    const Kernel2D q = outer(grid, u, v);
    const Kernel2D p = Kernel2D::sample(grid, [](double x, double y) {
        return cplx(std::exp(-(x - y) * (x - y)), 0.1 * x);
    });
    const cplx s = weighted_dot(grid, v, u);
    Field1D pu(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        pu(i) = weighted_dot(grid, p.values().row(i).transpose(), u);
    }
    const Eigen::MatrixXcd expected = p.values() - pu * v.transpose() / (1.0 + s);
    const Kernel2D g = fredholm_solve(p, q);
    CHECK((g.values() - expected).norm() / expected.norm() < 1e-12);
    CHECK(riccati_relation_residual(p, g, q) < 1e-12);
}

TEST_CASE("Fredholm solve with zero auxiliary kernel is the identity map") {
    const Grid1D grid(2.0, 16);
    const Kernel2D p = random_kernel(grid, 4, 1.0);
    const FredholmResult r = solve_riccati_relation(p, Kernel2D::zero(grid));
    CHECK(r.g.values() == p.values());
    CHECK(r.det2 == cplx(1.0, 0.0));
}

TEST_CASE("Fredholm solve stays accurate for contractive kernels") {
    const Grid1D grid(2.0, 48);
    const Kernel2D p = random_kernel(grid, 21, 1.0);
    for (double norm : {0.1, 0.5, 0.9, 0.99}) {
        const Kernel2D q = random_kernel(grid, 22, norm);
        const FredholmResult r = solve_riccati_relation(p, q);
        CHECK(r.residual < 1e-10);
        CHECK(riccati_relation_residual(p, r.g, q) < 1e-10);
        CHECK(r.qprime_hs == doctest::Approx(norm).epsilon(1e-12));
    }
}

TEST_CASE("inverse kernel matches the Neumann series") {
    const Grid1D grid(2.0, 32);
    const Kernel2D q = random_kernel(grid, 31, 0.2);
    // q̃′ = −q′ + q′⋆q′ − q′⋆q′⋆q′ + …
    Kernel2D term = -1.0 * q;
    Kernel2D series = term;
    for (int i = 0; i < 60; ++i) {
        term = -1.0 * star(term, q);
        series += term;
    }
    const Kernel2D inv = inverse_kernel(q);
    CHECK((inv.values() - series.values()).norm() / series.values().norm() < 1e-12);
    const Kernel2D identity_defect = q + inv + star(q, inv);
    CHECK(hs_norm(identity_defect) < 1e-12);
    const Kernel2D back = inverse_kernel(inv);
    CHECK((back.values() - q.values()).norm() / q.values().norm() < 1e-12);
}

TEST_CASE("IdentityPlus application") {
    const Grid1D grid(2.0, 16);
    const Kernel2D q = random_kernel(grid, 41, 0.5);
    const Kernel2D g = random_kernel(grid, 42, 1.0);
    const IdentityPlus op(q);
    const Kernel2D composed = op.right_compose(g);
    CHECK((composed.values() - (g + star(g, q)).values()).norm() < 1e-13);
    const Field1D f = gaussian(grid, 0.0);
    Field1D expected = f;
    for (int i = 0; i < grid.size(); ++i) {
        expected(i) += weighted_dot(grid, q.values().row(i).transpose(), f);
    }
    CHECK((op.apply(f) - expected).norm() < 1e-13);
}

TEST_CASE("patch breakdown when det2 is tiny") {
    const Grid1D grid(6.0, 64);
    const Field1D u = gaussian(grid, 0.0);
    // ⟨u, u⟩ = s, so −u⊗u / s drives 1 + ⟨v, u⟩ to zero.
    const cplx s = weighted_dot(grid, u, u);
    const Kernel2D singular = outer(grid, u, -u / s);
    const Kernel2D p = Kernel2D::sample(grid, [](double x, double y) {
        return cplx(std::exp(-x * x - y * y));
    });
    CHECK_THROWS_AS(solve_riccati_relation(p, singular, 0.5), PatchBreakdown);
    try {
        solve_riccati_relation(p, singular, 0.5);
    } catch (const PatchBreakdown& e) {
        CHECK(e.time() == 0.5);
        CHECK(e.det2_abs() < kPatchBreakdownDet2);
    }
    CHECK(AuxiliaryFactorization(singular).broken());
    CHECK_FALSE(AuxiliaryFactorization(Kernel2D::zero(grid)).broken());
}

TEST_CASE("non-finite kernels are rejected") {
    const Grid1D grid(2.0, 16);
    Kernel2D q = Kernel2D::zero(grid);
    q.values()(3, 4) = cplx(std::nan(""), 0.0);
    CHECK_FALSE(q.all_finite());
    CHECK_THROWS_AS(det2(q), InvalidInput);
}
