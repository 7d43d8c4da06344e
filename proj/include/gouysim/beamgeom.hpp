#pragma once

// Analytic paraxial mode geometry. All lengths are SI metres.

#include <complex>

namespace gouysim {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Focused Gaussian beam: wavelength, waist radius and focal plane position.
class BeamParams {
public:
    BeamParams(double wavelength, double waist, double focal_position = 0.0);

    double wavelength() const { return wavelength_; }
    double waist() const { return waist_; }
    double focal_position() const { return focal_position_; }

    double wavenumber() const { return 2.0 * pi / wavelength_; }
    /// z_R = k w0^2 / 2
    double rayleigh_length() const { return 0.5 * wavenumber() * waist_ * waist_; }

    BeamParams with_waist(double waist) const { return {wavelength_, waist, focal_position_}; }
    BeamParams with_focus(double z0) const { return {wavelength_, waist_, z0}; }

private:
    double wavelength_;
    double waist_;
    double focal_position_;
};

/// Laguerre-Gaussian mode LG_{ell,p}.
struct LGModeSpec {
    int ell = 0;
    int p = 0;
    BeamParams beam;

    LGModeSpec(int ell_, int p_, BeamParams beam_);
    /// Main-text convention S = 2p + |ell| + 1.
    int order() const;
};

/// Hermite-Gaussian mode HG_{m,n}.
struct HGModeSpec {
    int m = 0;
    int n = 0;
    BeamParams beam;

    HGModeSpec(int m_, int n_, BeamParams beam_);
    /// S = m + n (no +1 offset in this convention).
    int order() const { return m + n; }
    /// S2 = m^2 + n^2
    int order_sq() const { return m * m + n * n; }
};

/// Gaussian eigenmode of a single-mode fiber.
class FiberMode {
public:
    explicit FiberMode(double mode_radius);
    static FiberMode from_mfd(double mode_field_diameter) { return FiberMode(0.5 * mode_field_diameter); }

    double mode_radius() const { return radius_; }

private:
    double radius_;
};

/// L_p(x), explicit binomial sum for p <= 20, three-term recurrence above.
double laguerre_poly(int p, double x);
double laguerre_poly_sum(int p, double x);
double laguerre_poly_recurrence(int p, double x);

/// Orthonormal Hermite function psi_n(xi) (integral of psi_n^2 d xi = 1).
double hermite_function(int n, double xi);

double beam_radius(const BeamParams& beam, double z);

/// 1/R(z); zero at the focus.
double inverse_curvature(const BeamParams& beam, double z);

double gouy_phase(const LGModeSpec& mode, double z);

/// Normalized u_{0p}(r, z). Throws ConfigError for ell != 0.
complex lg_field(const LGModeSpec& mode, double r, double z);

/// Normalized u_{mn}(x, y, z), same phase convention as lg_field.
complex hg_field(const HGModeSpec& mode, double x, double y, double z);

double fiber_field(const FiberMode& fiber, double r);

} // namespace gouysim
