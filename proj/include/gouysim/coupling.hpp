#pragma once

// Overlap amplitudes A_p(z) = \int u*_{0p}(rho, z) u_SMF(rho) d^2 rho.

#include "gouysim/beamgeom.hpp"

namespace gouysim {

struct OverlapConfig {
    LGModeSpec mode;
    FiberMode fiber;
    double z = 0.0;
};

/// Closed form B(z) sum_j C(p,j) (-1)^j / C(z)^{j+1}.
complex overlap_analytic(const OverlapConfig& cfg);
complex overlap_analytic(int p, const BeamParams& beam, const FiberMode& fiber, double z);

/// The complex C(z) of the closed form; Re(C) > 0 always.
complex overlap_c_factor(const BeamParams& beam, const FiberMode& fiber, double z);

/// Adaptive Gauss-Kronrod quadrature of the overlap integral using the
/// beamgeom field evaluators. Throws NumericalError when the error estimate
/// exceeds 1e-9.
complex overlap_numeric(const OverlapConfig& cfg, double* error_estimate = nullptr);

} // namespace gouysim
