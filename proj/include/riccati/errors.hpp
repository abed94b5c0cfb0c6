#pragma once

#include <stdexcept>
#include <string>

namespace riccati {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: malformed grid, inconsistent shapes, invalid config.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Two kernels or fields live on different grids.
class GridMismatch : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Re d(2πik)·t exceeded the overflow guard.
class InadmissibleSymbol : public Error {
public:
    InadmissibleSymbol(const std::string& what, double freq, double growth)
        : Error(what), freq_(freq), growth_(growth) {}
    double freq() const noexcept { return freq_; }
    double growth() const noexcept { return growth_; }

private:
    double freq_;
    double growth_;
};

/// The flow left the canonical coordinate patch: det₂ of the auxiliary
/// operator collapsed or the Riccati relation became numerically singular.
class PatchBreakdown : public Error {
public:
    PatchBreakdown(const std::string& what, double time, double det2_abs, double rcond)
        : Error(what), time_(time), det2_abs_(det2_abs), rcond_(rcond) {}
    double time() const noexcept { return time_; }
    double det2_abs() const noexcept { return det2_abs_; }
    double rcond() const noexcept { return rcond_; }

private:
    double time_;
    double det2_abs_;
    double rcond_;
};

/// A Fourier mode of the convolution model reaches its Riccati pole.
/// The per-mode denominator is a factor of det₂, so this is a patch breakdown.
class PoleCrossing : public PatchBreakdown {
public:
    PoleCrossing(const std::string& what, double freq, double critical_time)
        : PatchBreakdown(what, critical_time, 0.0, 0.0), freq_(freq) {}
    double freq() const noexcept { return freq_; }
    double critical_time() const noexcept { return time(); }

private:
    double freq_;
};

/// Explicit integration diverged (norm growth, non-finite state, CFL violation).
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, double last_good_time)
        : Error(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// Finite-time blow-up of the direct Riccati integration.
class BlowUp : public InstabilityError {
public:
    BlowUp(const std::string& what, double last_good_time, double estimated_time)
        : InstabilityError(what, last_good_time), estimated_time_(estimated_time) {}
    double estimated_time() const noexcept { return estimated_time_; }

private:
    double estimated_time_;
};

/// Cole–Hopf requires q > 0 everywhere.
class NonPositiveQ : public InvalidInput {
public:
    NonPositiveQ(const std::string& what, double min_q) : InvalidInput(what), min_q_(min_q) {}
    double min_q() const noexcept { return min_q_; }

private:
    double min_q_;
};

}  // namespace riccati
