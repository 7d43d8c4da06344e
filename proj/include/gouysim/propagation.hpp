#pragma once

// Sampled transverse fields and angular-spectrum propagation.

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gouysim/beamgeom.hpp"

namespace gouysim {

enum class KzModel { exact, paraxial };

/// Uniform transverse grid. Sample (ix, iy) sits at
/// x = center_x + (ix - nx/2) dx, y = center_y + (iy - ny/2) dy.
struct GridSpec {
    int nx = 1024;
    int ny = 1024;
    double dx = 0.0;
    double dy = 0.0;
    double center_x = 0.0;
    double center_y = 0.0;

    /// Square grid of n x n samples covering a window of the given full width.
    static GridSpec square(int n, double window);

    double x(int ix) const { return center_x + (ix - nx / 2) * dx; }
    double y(int iy) const { return center_y + (iy - ny / 2) * dy; }
    double window_x() const { return nx * dx; }
    double window_y() const { return ny * dy; }
    void validate() const;
};

/// Default grid: 1024^2 over 8x the largest second-moment radius supplied.
GridSpec default_grid(double largest_beam_radius, int n = 1024);

/// Complex field on a GridSpec, row-major (iy major).
class SampledField {
public:
    SampledField(GridSpec grid, double z, double wavenumber, std::vector<complex> values);

    const GridSpec& grid() const { return grid_; }
    double z() const { return z_; }
    double wavenumber() const { return k_; }
    const std::vector<complex>& values() const { return values_; }
    complex at(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * grid_.nx + ix]; }

    /// sum |u|^2 dx dy
    double norm() const;
    /// sqrt(2 <r^2>) about the grid centre; equals w for a Gaussian.
    double second_moment_radius() const;

private:
    GridSpec grid_;
    double z_;
    double k_;
    std::vector<complex> values_;
};

/// Unitary transverse spectrum F(kappa) = (1/2pi) \int u exp(-i kappa.rho) d^2 rho,
/// stored in FFT order (index 0 is kappa = 0, upper half holds negative kappa).
class AngularSpectrum {
public:
    AngularSpectrum(GridSpec source_grid, double z, double wavenumber, std::vector<complex> values);

    const GridSpec& source_grid() const { return grid_; }
    double z() const { return z_; }
    double wavenumber() const { return k_; }
    int nx() const { return grid_.nx; }
    int ny() const { return grid_.ny; }
    double dkx() const { return 2.0 * pi / (grid_.nx * grid_.dx); }
    double dky() const { return 2.0 * pi / (grid_.ny * grid_.dy); }
    double kx(int ix) const { return dkx() * (ix < grid_.nx / 2 ? ix : ix - grid_.nx); }
    double ky(int iy) const { return dky() * (iy < grid_.ny / 2 ? iy : iy - grid_.ny); }
    const std::vector<complex>& values() const { return values_; }
    complex at(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * grid_.nx + ix]; }

    /// sum |F|^2 dkx dky
    double norm() const;

private:
    GridSpec grid_;
    double z_;
    double k_;
    std::vector<complex> values_;
};

SampledField sample_field(const GridSpec& grid, double z, double wavenumber,
                          const std::function<complex(double, double)>& field);
SampledField sample_lg(const LGModeSpec& mode, double z, const GridSpec& grid);
SampledField sample_hg(const HGModeSpec& mode, double z, const GridSpec& grid);

/// Analytic second-moment radii used for window sizing.
double lg_second_moment_radius(const LGModeSpec& mode, double z);
double hg_second_moment_radius(const HGModeSpec& mode, double z);

AngularSpectrum to_angular_spectrum(const SampledField& field);
SampledField from_angular_spectrum(const AngularSpectrum& spectrum);

/// Longitudinal wavevector. Exact model throws NumericalError for kappa^2 > k^2.
double kz(double kappa_sq, double k, KzModel model);

/// kz - k, evaluated without cancellation.
double kz_offset(double kappa_sq, double k, KzModel model);

struct PropagationDiagnostics {
    double discarded_energy_fraction = 0.0;
    /// Fewer than 4 samples per beam radius, or a window under 6 radii.
    bool under_resolved = false;
    std::string warning;
};

/// Propagate by dz. The spectrum is multiplied by exp(+i kz dz); the returned
/// field includes the plane-wave carrier exp(+i k dz).
SampledField asm_propagate(const SampledField& field, double dz, KzModel model = KzModel::paraxial,
                           PropagationDiagnostics* diagnostics = nullptr);

/// Same as asm_propagate with the carrier exp(+i k dz) removed, so that the
/// result compares directly against lg_field / hg_field.
SampledField asm_propagate_envelope(const SampledField& field, double dz, KzModel model = KzModel::paraxial,
                                    PropagationDiagnostics* diagnostics = nullptr);

struct KzMoments {
    double mean = 0.0;          ///< <kz>
    double second_moment = 0.0; ///< <kz^2>
    double mean_offset = 0.0;   ///< <kz> - k
    double variance = 0.0;      ///< <kz^2> - <kz>^2
};

/// Moments over |F|^2. Requires a unit-norm spectrum (ConfigError otherwise).
KzMoments kz_moments(const AngularSpectrum& spectrum, KzModel model = KzModel::paraxial);

/// CSV dump with columns x_m,y_m,re,im; optional leading comment line.
void write_field_csv(std::ostream& out, const SampledField& field, const std::string& comment = {});
/// JSON sidecar text for a field dump.
std::string field_metadata_json(const SampledField& field);

} // namespace gouysim
