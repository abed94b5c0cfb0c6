#include <cmath>

#include "doctest.h"
#include "riccati/errors.hpp"
#include "riccati/matrix_riccati.hpp"

using namespace riccati;
using Eigen::MatrixXcd;

namespace {

// exp(M) by scaling and squaring of a long Taylor sum.
MatrixXcd expm(const MatrixXcd& m) {
    int squarings = 0;
    double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.25) {
        norm /= 2.0;
        ++squarings;
    }
    const MatrixXcd a = m / std::pow(2.0, squarings);
    MatrixXcd term = MatrixXcd::Identity(m.rows(), m.cols());
    MatrixXcd sum = term;
    for (int j = 1; j < 30; ++j) {
        term = term * a / static_cast<double>(j);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) {
        sum = sum * sum;
    }
    return sum;
}

MatrixXcd scalar(double v) { return MatrixXcd::Constant(1, 1, v); }

}  // namespace

TEST_CASE("frame flow of a constant system matches the matrix exponential") {
    MatrixXcd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << 0.3;
    b << -0.4;
    c << 0.7;
    d << -0.2;
    const BlockSystem sys = BlockSystem::constant(a, b, c, d);
    MatrixXcd g0(1, 1);
    g0 << 0.5;
    const auto frames = integrate_frame(sys, g0, 1.0, 1e-3);
    MatrixXcd gen(2, 2);
    gen << 0.3, -0.4, 0.7, -0.2;
    MatrixXcd start(2, 1);
    start << 1.0, 0.5;
    const MatrixXcd expected = expm(gen) * start;
    const FrameState& last = frames.back();
    CHECK(last.t == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(last.Q(0, 0) - expected(0, 0)) < 1e-12);
    CHECK(std::abs(last.P(0, 0) - expected(1, 0)) < 1e-12);
    const double g_expected = (expected(1, 0) / expected(0, 0)).real();
    CHECK(std::abs(project(last).G(0, 0) - g_expected) < 1e-12);
}

TEST_CASE("zero field keeps G constant") {
    const int k = 2;
    const int m = 3;
    const BlockSystem sys = BlockSystem::constant(MatrixXcd::Zero(k, k), MatrixXcd::Zero(k, m),
                                                  MatrixXcd::Zero(m, k), MatrixXcd::Zero(m, m));
    const MatrixXcd g0 = MatrixXcd::Random(m, k);
    for (const FrameState& f : integrate_frame(sys, g0, 1.0, 0.1)) {
        CHECK(f.Q == MatrixXcd::Identity(k, k));
        CHECK(project(f).G == g0);
    }
}

TEST_CASE("pure coupling gives Q = I + t G0") {
    const int k = 2;
    MatrixXcd g0(2, 2);
    g0 << 0.5, 0.1, -0.2, 0.3;
    const BlockSystem sys = BlockSystem::constant(MatrixXcd::Zero(k, k), MatrixXcd::Identity(k, k),
                                                  MatrixXcd::Zero(k, k), MatrixXcd::Zero(k, k));
    const auto frames = integrate_frame(sys, g0, 2.0, 0.05);
    for (const FrameState& f : frames) {
        const MatrixXcd q = MatrixXcd::Identity(k, k) + f.t * g0;
        CHECK((f.Q - q).norm() < 1e-13);
        CHECK((f.P - g0).norm() < 1e-15);
        const MatrixXcd g = g0 * q.inverse();
        CHECK((project(f).G - g).norm() < 1e-12);
    }
}

TEST_CASE("scalar Riccati G' = -G^2") {
    const BlockSystem sys = BlockSystem::constant(scalar(0.0), scalar(1.0), scalar(0.0), scalar(0.0));
    const auto frames = integrate_frame(sys, scalar(2.0), 1.0, 1e-2);
    const auto direct = integrate_riccati_direct(sys, scalar(2.0), 1.0, 1e-2);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double t = frames[i].t;
        CHECK(std::abs(project(frames[i]).G(0, 0) - 2.0 / (1.0 + 2.0 * t)) < 1e-13);
        CHECK(std::abs(direct[i].G(0, 0) - 2.0 / (1.0 + 2.0 * t)) < 1e-6);
    }
}

TEST_CASE("singular Q raises patch breakdown") {
    FrameState f;
    f.t = 0.25;
    f.Q = MatrixXcd::Identity(2, 2);
    f.Q(1, 1) = 1e-14;
    f.P = MatrixXcd::Ones(3, 2);
    CHECK(frame_rcond(f) < kProjectRcond);
    CHECK_THROWS_AS(project(f), PatchBreakdown);
    try {
        project(f);
    } catch (const PatchBreakdown& e) {
        CHECK(e.time() == 0.25);
    }
}

TEST_CASE("negative initial data reaches the pole at t = 1") {
    const BlockSystem sys = BlockSystem::constant(scalar(0.0), scalar(1.0), scalar(0.0), scalar(0.0));
    const double dt = 1e-3;
    // Frame side: Q = 1 − t vanishes exactly at the pole.
    const auto frames = integrate_frame(sys, scalar(-1.0), 1.0, dt);
    CHECK(std::abs(frames.back().Q(0, 0)) < 1e-12);
    CHECK_THROWS_AS(project(frames.back()), PatchBreakdown);
    CHECK_NOTHROW(project(frames[frames.size() - 2]));

    bool thrown = false;
    try {
        integrate_riccati_direct(sys, scalar(-1.0), 1.5, dt);
    } catch (const BlowUp& e) {
        thrown = true;
        CHECK(std::abs(e.estimated_time() - 1.0) < 2.0 * dt);
        CHECK(e.last_good_time() < 1.0 + 2.0 * dt);
    }
    CHECK(thrown);
}

TEST_CASE("random system: projection agrees with direct integration") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const BlockSystem sys = BlockSystem::random(2, 2, seed, 0.5);
        const MatrixXcd g0 = 0.3 * MatrixXcd::Identity(2, 2);
        const auto frames = integrate_frame(sys, g0, 1.0, 1e-3);
        const auto direct = integrate_riccati_direct(sys, g0, 1.0, 1e-3);
        CHECK(max_projection_gap(frames, direct) < 1e-6);
    }
}

TEST_CASE("frame integration converges at fourth order") {
    const BlockSystem sys = BlockSystem::random(2, 2, 7, 1.0);
    const MatrixXcd g0 = 0.2 * MatrixXcd::Ones(2, 2);
    const MatrixXcd ref = project(integrate_frame(sys, g0, 1.0, 1e-4).back()).G;
    const double e1 = (project(integrate_frame(sys, g0, 1.0, 0.1).back()).G - ref).norm();
    const double e2 = (project(integrate_frame(sys, g0, 1.0, 0.05).back()).G - ref).norm();
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("frame flow is linear in the initial frame") {
    const BlockSystem sys = BlockSystem::random(2, 3, 11, 1.0);
    const MatrixXcd q1 = MatrixXcd::Random(2, 2);
    const MatrixXcd p1 = MatrixXcd::Random(3, 2);
    const MatrixXcd q2 = MatrixXcd::Random(2, 2);
    const MatrixXcd p2 = MatrixXcd::Random(3, 2);
    const std::complex<double> alpha(0.7, -0.3);
    const auto a = integrate_frame_from(sys, q1, p1, 0.8, 1e-2).back();
    const auto b = integrate_frame_from(sys, q2, p2, 0.8, 1e-2).back();
    const auto c = integrate_frame_from(sys, q1 + alpha * q2, p1 + alpha * p2, 0.8, 1e-2).back();
    CHECK((c.Q - (a.Q + alpha * b.Q)).norm() < 1e-12);
    CHECK((c.P - (a.P + alpha * b.P)).norm() < 1e-12);
}

TEST_CASE("projection at t = 0 returns G0 exactly") {
    const BlockSystem sys = BlockSystem::random(3, 2, 5, 1.0);
    const MatrixXcd g0 = MatrixXcd::Random(2, 3);
    const auto frames = integrate_frame(sys, g0, 0.5, 0.1);
    CHECK(frames.front().t == 0.0);
    CHECK(project(frames.front()).G == g0);
}

TEST_CASE("step is adjusted to land on the final time") {
    const BlockSystem sys = BlockSystem::random(1, 1, 3, 1.0);
    const auto frames = integrate_frame(sys, scalar(0.1), 1.0, 0.3);
    CHECK(frames.size() == 5);
    CHECK(frames.back().t == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("shape errors") {
    MatrixXcd a = MatrixXcd::Zero(2, 2);
    CHECK_THROWS_AS(BlockSystem::constant(a, MatrixXcd::Zero(2, 3), MatrixXcd::Zero(2, 2),
                                          MatrixXcd::Zero(3, 3)),
                    InvalidInput);
    const BlockSystem sys = BlockSystem::random(2, 3, 1, 1.0);
    CHECK_THROWS_AS(integrate_frame(sys, MatrixXcd::Zero(2, 3), 1.0, 0.1), InvalidInput);
    CHECK_THROWS_AS(integrate_frame(sys, MatrixXcd::Zero(3, 2), 1.0, 0.0), InvalidInput);
}
