#include "gouysim/beamgeom.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "gouysim/errors.hpp"

namespace gouysim {

namespace {

constexpr int kLaguerreSumMaxOrder = 20;

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

} // namespace

BeamParams::BeamParams(double wavelength, double waist, double focal_position)
    : wavelength_(wavelength), waist_(waist), focal_position_(focal_position) {
    require_positive(wavelength, "wavelength");
    require_positive(waist, "waist");
    if (!std::isfinite(focal_position)) {
        throw ConfigError("focal position must be finite");
    }
}

LGModeSpec::LGModeSpec(int ell_, int p_, BeamParams beam_) : ell(ell_), p(p_), beam(beam_) {
    if (p < 0) {
        throw ConfigError("radial index p must be >= 0");
    }
}

int LGModeSpec::order() const { return 2 * p + std::abs(ell) + 1; }

HGModeSpec::HGModeSpec(int m_, int n_, BeamParams beam_) : m(m_), n(n_), beam(beam_) {
    if (m < 0 || n < 0) {
        throw ConfigError("HG indices must be >= 0");
    }
}

FiberMode::FiberMode(double mode_radius) : radius_(mode_radius) {
    require_positive(mode_radius, "fiber mode radius");
}

double laguerre_poly_sum(int p, double x) {
    // term_j = C(p,j) (-x)^j / j!, accumulated in extended precision with
    // Neumaier compensation. The alternating terms cancel heavily once x
    // exceeds a few units, so this is still limited by its condition number
    // sum_j |term_j| = L_p(-x).
    long double term = 1.0L;
    long double sum = 1.0L;
    long double comp = 0.0L;
    for (int j = 0; j < p; ++j) {
        term *= -static_cast<long double>(x) * static_cast<long double>(p - j) /
                (static_cast<long double>(j + 1) * static_cast<long double>(j + 1));
        const long double t = sum + term;
        comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return static_cast<double>(sum + comp);
}

double laguerre_poly_recurrence(int p, double x) {
    if (p == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double cur = 1.0 - x;
    for (int n = 1; n < p; ++n) {
        const double next = ((2.0 * n + 1.0 - x) * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double laguerre_poly(int p, double x) {
    if (p < 0) {
        throw ConfigError("Laguerre order must be >= 0");
    }
    return p <= kLaguerreSumMaxOrder ? laguerre_poly_sum(p, x) : laguerre_poly_recurrence(p, x);
}

double hermite_function(int n, double xi) {
    if (n < 0) {
        throw ConfigError("Hermite order must be >= 0");
    }
    double prev = 0.0;
    double cur = std::pow(pi, -0.25) * std::exp(-0.5 * xi * xi);
    for (int j = 0; j < n; ++j) {
        const double next = std::sqrt(2.0 / (j + 1.0)) * xi * cur - std::sqrt(j / (j + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double beam_radius(const BeamParams& beam, double z) {
    const double t = (z - beam.focal_position()) / beam.rayleigh_length();
    return beam.waist() * std::sqrt(1.0 + t * t);
}

double inverse_curvature(const BeamParams& beam, double z) {
    const double dz = z - beam.focal_position();
    const double zr = beam.rayleigh_length();
    return dz / (dz * dz + zr * zr);
}

double gouy_phase(const LGModeSpec& mode, double z) {
    const double arg = 2.0 * (z - mode.beam.focal_position()) / (mode.beam.wavenumber() * mode.beam.waist() * mode.beam.waist());
    return -static_cast<double>(mode.order()) * std::atan(arg);
}

complex lg_field(const LGModeSpec& mode, double r, double z) {
    if (mode.ell != 0) {
        throw ConfigError("lg_field supports radial modes (ell = 0) only");
    }
    const BeamParams& beam = mode.beam;
    const double w = beam_radius(beam, z);
    const double x = 2.0 * r * r / (w * w);
    const double amplitude = std::sqrt(2.0 / pi) / w * std::exp(-r * r / (w * w)) * laguerre_poly(mode.p, x);
    const double phase = 0.5 * r * r * beam.wavenumber() * inverse_curvature(beam, z) + gouy_phase(mode, z);
    return amplitude * complex(std::cos(phase), std::sin(phase));
}

complex hg_field(const HGModeSpec& mode, double x, double y, double z) {
    const BeamParams& beam = mode.beam;
    const double w = beam_radius(beam, z);
    const double scale = std::sqrt(2.0) / w;
    const double amplitude = scale * hermite_function(mode.m, scale * x) * hermite_function(mode.n, scale * y);
    const double t = (z - beam.focal_position()) / beam.rayleigh_length();
    const double r2 = x * x + y * y;
    const double phase = 0.5 * r2 * beam.wavenumber() * inverse_curvature(beam, z) - (mode.order() + 1.0) * std::atan(t);
    return amplitude * complex(std::cos(phase), std::sin(phase));
}

double fiber_field(const FiberMode& fiber, double r) {
    const double wf = fiber.mode_radius();
    return std::sqrt(2.0 / pi) / wf * std::exp(-r * r / (wf * wf));
}

} // namespace gouysim
