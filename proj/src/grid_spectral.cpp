#include "riccati/grid_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "riccati/errors.hpp"

namespace riccati {

namespace {

// The FFTW planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e^z - 1 without cancellation for small |z|.
cplx expm1_complex(cplx z) {
    const double a = z.real();
    const double b = z.imag();
    const double em1 = std::expm1(a);
    const double s = std::sin(0.5 * b);
    const double re = em1 * std::cos(b) - 2.0 * s * s;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

}  // namespace

struct Grid1D::Impl {
    double L;
    int n;
    double dx;
    std::vector<double> points;
    std::vector<double> freqs;
    std::vector<double> weights;
    // (-1)^m phase from the x_0 = -L origin, folded into the scaling.
    std::vector<double> alternating;
    fftw_plan plus_plan = nullptr;   // e^{+2πi jm/n}
    fftw_plan minus_plan = nullptr;  // e^{-2πi jm/n}

    Impl(double half_width, int size) : L(half_width), n(size), dx(2.0 * half_width / size) {
        points.resize(static_cast<std::size_t>(n));
        freqs.resize(static_cast<std::size_t>(n));
        weights.assign(static_cast<std::size_t>(n), dx);
        alternating.resize(static_cast<std::size_t>(n));
        const double dk = 1.0 / (2.0 * L);
        for (int j = 0; j < n; ++j) {
            points[static_cast<std::size_t>(j)] = -L + j * dx;
            const int m = j < n / 2 ? j : j - n;
            freqs[static_cast<std::size_t>(j)] = m * dk;
            alternating[static_cast<std::size_t>(j)] = (j % 2 == 0) ? 1.0 : -1.0;
        }
        std::lock_guard lock(planner_mutex());
        std::vector<cplx> scratch(static_cast<std::size_t>(n));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plus_plan = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
        minus_plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plus_plan);
        fftw_destroy_plan(minus_plan);
    }

    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
};

Grid1D::Grid1D(double half_width, int n) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw InvalidInput("grid half-width must be positive and finite");
    }
    if (n < 8 || n % 2 != 0) {
        throw InvalidInput("grid size must be even and at least 8, got " + std::to_string(n));
    }
    impl_ = std::make_shared<const Impl>(half_width, n);
}

double Grid1D::half_width() const noexcept { return impl_->L; }
int Grid1D::size() const noexcept { return impl_->n; }
double Grid1D::dx() const noexcept { return impl_->dx; }
double Grid1D::dk() const noexcept { return 1.0 / (2.0 * impl_->L); }
std::span<const double> Grid1D::points() const noexcept { return impl_->points; }
std::span<const double> Grid1D::freqs() const noexcept { return impl_->freqs; }
std::span<const double> Grid1D::weights() const noexcept { return impl_->weights; }

bool Grid1D::operator==(const Grid1D& other) const noexcept {
    return impl_ == other.impl_ || (impl_->n == other.impl_->n && impl_->L == other.impl_->L);
}

void Grid1D::forward_inplace(cplx* data) const {
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(impl_->plus_plan, buf, buf);
    const double dx = impl_->dx;
    for (int m = 0; m < impl_->n; ++m) {
        data[m] *= dx * impl_->alternating[static_cast<std::size_t>(m)];
    }
}

void Grid1D::inverse_inplace(cplx* data) const {
    for (int m = 0; m < impl_->n; ++m) {
        data[m] *= impl_->alternating[static_cast<std::size_t>(m)] / (2.0 * impl_->L);
    }
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(impl_->minus_plan, buf, buf);
}

void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where) {
    if (!(a == b)) {
        throw GridMismatch(std::string(where) + ": operands live on different grids");
    }
}

Spectrum1D dft_forward(const Field1D& f, const Grid1D& grid) {
    if (f.size() != grid.size()) {
        throw InvalidInput("dft_forward: field length does not match grid");
    }
    Spectrum1D out = f;
    grid.forward_inplace(out.data());
    return out;
}

Field1D dft_inverse(const Spectrum1D& fhat, const Grid1D& grid) {
    if (fhat.size() != grid.size()) {
        throw InvalidInput("dft_inverse: spectrum length does not match grid");
    }
    Field1D out = fhat;
    grid.inverse_inplace(out.data());
    return out;
}

void dft_forward_columns(Eigen::MatrixXcd& values, const Grid1D& grid) {
    if (values.rows() != grid.size()) {
        throw InvalidInput("dft_forward_columns: row count does not match grid");
    }
    const Eigen::Index cols = values.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < cols; ++j) {
        grid.forward_inplace(values.col(j).data());
    }
}

void dft_inverse_columns(Eigen::MatrixXcd& values, const Grid1D& grid) {
    if (values.rows() != grid.size()) {
        throw InvalidInput("dft_inverse_columns: row count does not match grid");
    }
    const Eigen::Index cols = values.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < cols; ++j) {
        grid.inverse_inplace(values.col(j).data());
    }
}

SpectralSymbol::SpectralSymbol(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw InvalidInput("spectral symbol coefficients must be finite");
        }
    }
    while (!coeffs_.empty() && coeffs_.back() == 0.0) {
        coeffs_.pop_back();
    }
}

int SpectralSymbol::degree() const noexcept {
    return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1;
}

bool SpectralSymbol::is_zero() const noexcept { return coeffs_.empty(); }

cplx SpectralSymbol::eval(double k) const {
    // Horner in s = 2πik.
    const cplx s(0.0, kTwoPi * k);
    cplx acc(0.0, 0.0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

Eigen::VectorXcd SpectralSymbol::action(const Grid1D& grid) const {
    Eigen::VectorXcd z(grid.size());
    for (int m = 0; m < grid.size(); ++m) {
        z(m) = eval(-grid.freq(m));
    }
    return z;
}

double SpectralSymbol::max_growth(const Grid1D& grid) const {
    double best = -std::numeric_limits<double>::infinity();
    for (double k : grid.freqs()) {
        best = std::max(best, eval(k).real());
    }
    return best;
}

bool SpectralSymbol::admissible(const Grid1D& grid) const {
    const double c0 = coeffs_.empty() ? 0.0 : coeffs_.front();
    // Relative slack for rounding in the Horner sum.
    return max_growth(grid) <= c0 + 1e-12 * std::max(1.0, std::abs(c0));
}

cplx symbol_eval(const SpectralSymbol& d, double k) { return d.eval(k); }

cplx exp_factor(cplx z, double t, double freq) {
    const double growth = z.real() * t;
    if (growth > kPropagatorOverflow) {
        throw InadmissibleSymbol("propagator overflow: Re d(2πik)·t = " + std::to_string(growth) +
                                     " at k = " + std::to_string(freq),
                                 freq, growth);
    }
    return std::exp(z * t);
}

cplx phi_factor(cplx z, double t) {
    if (std::abs(z) < kPhiSeriesThreshold) {
        // t + z t²/2 + z² t³/6 + z³ t⁴/24 + z⁴ t⁵/120
        cplx term = t;
        cplx sum = term;
        for (int j = 1; j < 5; ++j) {
            term *= z * t / static_cast<double>(j + 1);
            sum += term;
        }
        return sum;
    }
    return expm1_complex(z * t) / z;
}

cplx propagator(const SpectralSymbol& d, double k, double t) {
    return exp_factor(d.eval(k), t, k);
}

cplx phi_integral(const SpectralSymbol& d, double k, double t) {
    const cplx z = d.eval(k);
    if (z.real() * t > kPropagatorOverflow) {
        throw InadmissibleSymbol("phi_integral overflow at k = " + std::to_string(k), k,
                                 z.real() * t);
    }
    return phi_factor(z, t);
}

void apply_symbol_columns(Eigen::MatrixXcd& values, const SpectralSymbol& d, const Grid1D& grid) {
    const Eigen::VectorXcd z = d.action(grid);
    dft_forward_columns(values, grid);
    values = z.asDiagonal() * values;
    dft_inverse_columns(values, grid);
}

namespace {
bool in_boundary_strip(double x, double L) { return std::abs(x) >= 0.95 * L; }
}  // namespace

double boundary_mass(const Field1D& f, const Grid1D& grid) {
    double total = 0.0;
    double edge = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        const double m = std::norm(f(j));
        total += m;
        if (in_boundary_strip(grid.point(j), grid.half_width())) {
            edge += m;
        }
    }
    return total > 0.0 ? edge / total : 0.0;
}

double boundary_mass(const Eigen::MatrixXcd& values, const Grid1D& grid) {
    double total = 0.0;
    double edge = 0.0;
    const double L = grid.half_width();
    for (int j = 0; j < grid.size(); ++j) {
        const bool yedge = in_boundary_strip(grid.point(j), L);
        for (int i = 0; i < grid.size(); ++i) {
            const double m = std::norm(values(i, j));
            total += m;
            if (yedge || in_boundary_strip(grid.point(i), L)) {
                edge += m;
            }
        }
    }
    return total > 0.0 ? edge / total : 0.0;
}

}  // namespace riccati
