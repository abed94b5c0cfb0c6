#pragma once

// Uniform periodic grid on [-L, L), Fourier transforms and spectral symbols.
//
// Fourier convention (note the sign, it is the opposite of FFTW/numpy):
//
//     f^(k) = ∫ f(x) e^{+2πikx} dx,        f(x) = ∫ f^(k) e^{-2πikx} dk,
//
// with frequencies k in cycles per unit length. Under this convention
// ∂x corresponds to multiplication by -2πik, so the operator d(∂x) acts on
// mode k as symbol_eval(d, -k). Use SpectralSymbol::action() for that.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace riccati {

using cplx = std::complex<double>;

/// Samples on grid points.
using Field1D = Eigen::VectorXcd;
/// Samples on grid frequencies, standard DFT layout.
using Spectrum1D = Eigen::VectorXcd;

class Grid1D {
public:
    /// Throws InvalidInput unless L > 0 and n is even and >= 8.
    Grid1D(double half_width, int n);

    double half_width() const noexcept;
    int size() const noexcept;
    double dx() const noexcept;
    /// Frequency spacing 1/(2L).
    double dk() const noexcept;
    /// Index j with points()[j] == 0.
    int zero_index() const noexcept { return size() / 2; }

    std::span<const double> points() const noexcept;
    std::span<const double> freqs() const noexcept;
    std::span<const double> weights() const noexcept;
    double point(int j) const noexcept { return points()[static_cast<std::size_t>(j)]; }
    double freq(int m) const noexcept { return freqs()[static_cast<std::size_t>(m)]; }

    /// Same half-width and size.
    bool operator==(const Grid1D& other) const noexcept;

    // In-place transforms of contiguous length-n buffers. Thread-safe.
    void forward_inplace(cplx* data) const;
    void inverse_inplace(cplx* data) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Throws GridMismatch when the grids differ.
void require_same_grid(const Grid1D& a, const Grid1D& b, const char* where);

Spectrum1D dft_forward(const Field1D& f, const Grid1D& grid);
Field1D dft_inverse(const Spectrum1D& fhat, const Grid1D& grid);

/// Column-wise transforms in the first argument x of a sampled kernel.
void dft_forward_columns(Eigen::MatrixXcd& values, const Grid1D& grid);
void dft_inverse_columns(Eigen::MatrixXcd& values, const Grid1D& grid);

/// Constant-coefficient polynomial d(∂x) = Σ c_j ∂x^j with real c_j.
class SpectralSymbol {
public:
    SpectralSymbol() = default;
    explicit SpectralSymbol(std::vector<double> coeffs);

    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    int degree() const noexcept;
    bool is_zero() const noexcept;

    /// Σ c_j (2πik)^j.
    cplx eval(double k) const;

    /// Per-mode multiplier of d(∂x) on the grid under the +2πikx forward
    /// convention, i.e. eval(-k_m) for every grid frequency.
    Eigen::VectorXcd action(const Grid1D& grid) const;

    /// max_k Re d(2πik) over the grid frequencies.
    double max_growth(const Grid1D& grid) const;

    /// Re d(2πik) <= c_0 on every grid frequency (diffusive or dispersive).
    bool admissible(const Grid1D& grid) const;

private:
    std::vector<double> coeffs_;
};

cplx symbol_eval(const SpectralSymbol& d, double k);

/// e^{d(2πik) t}. Throws InadmissibleSymbol when Re d(2πik)·t > 700.
cplx propagator(const SpectralSymbol& d, double k, double t);

/// (e^{d(2πik) t} - 1) / d(2πik), with the removable singularity at d = 0.
cplx phi_integral(const SpectralSymbol& d, double k, double t);

/// Branch switch between the ratio and the Taylor series of phi.
inline constexpr double kPhiSeriesThreshold = 1e-6;
/// Re z·t above this would overflow the exponential.
inline constexpr double kPropagatorOverflow = 700.0;

// Same quantities as functions of the symbol value z = d(2πik).
cplx exp_factor(cplx z, double t, double freq = 0.0);
cplx phi_factor(cplx z, double t);

/// Applies d(∂x) to every column of values (x varies within a column).
void apply_symbol_columns(Eigen::MatrixXcd& values, const SpectralSymbol& d, const Grid1D& grid);

/// Fraction of the L² mass of f carried by the outer 5% strips at ±L.
double boundary_mass(const Field1D& f, const Grid1D& grid);
/// Same for a kernel, strips taken in both arguments.
double boundary_mass(const Eigen::MatrixXcd& values, const Grid1D& grid);

}  // namespace riccati
