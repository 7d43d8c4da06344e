#include "gouysim/metrology.hpp"

#include <algorithm>
#include <cmath>

#include "gouysim/errors.hpp"

namespace gouysim {

namespace {

void require_photons(int photons) {
    if (photons < 1) {
        throw ConfigError("photon number N must be >= 1");
    }
}

bool same_beam(const BeamParams& a, const BeamParams& b) {
    return a.wavelength() == b.wavelength() && a.waist() == b.waist() && a.focal_position() == b.focal_position();
}

QfiBreakdown make_breakdown(double sql, double heisenberg) { return {sql, heisenberg, sql + heisenberg}; }

AngularSpectrum unit_spectrum(const SampledField& field) {
    // Sampled analytic modes are normalized to ~1e-12; renormalize exactly.
    AngularSpectrum s = to_angular_spectrum(field);
    const double scale = 1.0 / std::sqrt(s.norm());
    std::vector<complex> v = s.values();
    for (auto& x : v) {
        x *= scale;
    }
    return AngularSpectrum(s.source_grid(), s.z(), s.wavenumber(), std::move(v));
}

} // namespace

HgKzStats kz_stats_hg(const HGModeSpec& mode) {
    const double zr = mode.beam.rayleigh_length();
    const double s = mode.order();
    const double s2 = mode.order_sq();
    return {mode.beam.wavenumber() - (s + 1.0) / (2.0 * zr), (s2 + s + 2.0) / (8.0 * zr * zr)};
}

QfiBreakdown qfi_noon_hg(int photons, const HGModeSpec& a, const HGModeSpec& b) {
    require_photons(photons);
    if (!same_beam(a.beam, b.beam)) {
        throw ConfigError("HG modes must share the same beam parameters");
    }
    const double n = photons;
    const double zr = a.beam.rayleigh_length();
    const double sql = n / (4.0 * zr * zr) * (a.order_sq() + b.order_sq() + a.order() + b.order() + 4.0);
    // Slope of the Gouy phase difference at the focus: (S - S') / z_R.
    const double slope = (a.order() - b.order()) / zr;
    return make_breakdown(sql, 0.25 * n * n * slope * slope);
}

QfiBreakdown qfi_from_moments(int photons, const KzMoments& a, const KzMoments& b) {
    require_photons(photons);
    const double n = photons;
    const double diff = a.mean_offset - b.mean_offset;
    return make_breakdown(2.0 * n * (a.variance + b.variance), n * n * diff * diff);
}

QfiBreakdown qfi_from_spectra(int photons, const AngularSpectrum& a, const AngularSpectrum& b, KzModel model) {
    return qfi_from_moments(photons, kz_moments(a, model), kz_moments(b, model));
}

QfiBreakdown qfi_noon_numeric(int photons, int p, int p_prime, const BeamParams& beam, const QfiGridOptions& options) {
    require_photons(photons);
    const LGModeSpec ma(0, p, beam);
    const LGModeSpec mb(0, p_prime, beam);
    const double z = beam.focal_position();
    const double radius = std::max(lg_second_moment_radius(ma, z), lg_second_moment_radius(mb, z));
    const GridSpec grid = options.window > 0.0 ? GridSpec::square(options.samples, options.window)
                                               : default_grid(radius, options.samples);
    const AngularSpectrum sa = unit_spectrum(sample_lg(ma, z, grid));
    if (p == p_prime) {
        return qfi_from_spectra(photons, sa, sa, options.model);
    }
    return qfi_from_spectra(photons, sa, unit_spectrum(sample_lg(mb, z, grid)), options.model);
}

QfiBreakdown qfi_noon_numeric_hg(int photons, const HGModeSpec& a, const HGModeSpec& b, const QfiGridOptions& options) {
    require_photons(photons);
    if (!same_beam(a.beam, b.beam)) {
        throw ConfigError("HG modes must share the same beam parameters");
    }
    const double z = a.beam.focal_position();
    const double radius = std::max(hg_second_moment_radius(a, z), hg_second_moment_radius(b, z));
    const GridSpec grid = options.window > 0.0 ? GridSpec::square(options.samples, options.window)
                                               : default_grid(radius, options.samples);
    return qfi_from_spectra(photons, unit_spectrum(sample_hg(a, z, grid)), unit_spectrum(sample_hg(b, z, grid)),
                            options.model);
}

double heisenberg_term_lg(int photons, int delta_p, const BeamParams& beam) {
    require_photons(photons);
    const double slope = 2.0 * delta_p / beam.rayleigh_length();
    return 0.25 * photons * photons * slope * slope;
}

double cfi_curve(int photons, int delta_p, double p_max, const BeamParams& beam, double z) {
    if (!(p_max > 0.0 && p_max <= 1.0)) {
        throw ConfigError("P_max must lie in (0, 1]");
    }
    const double fq = heisenberg_term_lg(photons, delta_p, beam);
    const double arg = photons * delta_p * std::atan((z - beam.focal_position()) / beam.rayleigh_length());
    const double c = std::cos(arg);
    if (c == 0.0) {
        return 0.0;
    }
    // 1 - P sin^2 written as (1 - P) + P cos^2 to stay exact as P -> 1.
    return fq * (4.0 * p_max * c * c) / ((1.0 - p_max) + p_max * c * c);
}

} // namespace gouysim
