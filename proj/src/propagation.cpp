#include "gouysim/propagation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gouysim/errors.hpp"

namespace gouysim {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW's planner is not reentrant; execution with a private plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void fft2d(std::vector<complex>& data, int nx, int ny, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE);
    }
    if (plan == nullptr) {
        throw NumericalError("FFTW failed to create a plan");
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

// Rotate so that the sample at (nx/2, ny/2) moves to index 0 (and back).
std::vector<complex> roll_half(const std::vector<complex>& in, int nx, int ny) {
    std::vector<complex> out(in.size());
    const int hx = nx / 2;
    const int hy = ny / 2;
    for (int iy = 0; iy < ny; ++iy) {
        const int sy = (iy + hy) % ny;
        for (int ix = 0; ix < nx; ++ix) {
            const int sx = (ix + hx) % nx;
            out[static_cast<std::size_t>(iy) * nx + ix] = in[static_cast<std::size_t>(sy) * nx + sx];
        }
    }
    return out;
}

} // namespace

GridSpec GridSpec::square(int n, double window) {
    GridSpec g;
    g.nx = n;
    g.ny = n;
    g.dx = window / n;
    g.dy = window / n;
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (!is_pow2(nx) || !is_pow2(ny) || nx < 64 || ny < 64) {
        throw ConfigError("grid dimensions must be powers of two >= 64 (got " + std::to_string(nx) + "x" +
                          std::to_string(ny) + ")");
    }
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
        throw ConfigError("grid pitch must be positive");
    }
}

GridSpec default_grid(double largest_beam_radius, int n) {
    if (!(largest_beam_radius > 0.0)) {
        throw ConfigError("beam radius must be positive");
    }
    return GridSpec::square(n, 8.0 * largest_beam_radius);
}

SampledField::SampledField(GridSpec grid, double z, double wavenumber, std::vector<complex> values)
    : grid_(grid), z_(z), k_(wavenumber), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != static_cast<std::size_t>(grid_.nx) * grid_.ny) {
        throw ConfigError("field sample count does not match grid");
    }
    if (!(k_ > 0.0)) {
        throw ConfigError("wavenumber must be positive");
    }
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ConfigError("field norm must be finite and positive");
    }
}

double SampledField::norm() const {
    double acc = 0.0;
    for (const auto& v : values_) {
        acc += std::norm(v);
    }
    return acc * grid_.dx * grid_.dy;
}

double SampledField::second_moment_radius() const {
    double num = 0.0;
    double den = 0.0;
    for (int iy = 0; iy < grid_.ny; ++iy) {
        const double y = grid_.y(iy) - grid_.center_y;
        for (int ix = 0; ix < grid_.nx; ++ix) {
            const double x = grid_.x(ix) - grid_.center_x;
            const double w = std::norm(at(ix, iy));
            num += (x * x + y * y) * w;
            den += w;
        }
    }
    return std::sqrt(2.0 * num / den);
}

AngularSpectrum::AngularSpectrum(GridSpec source_grid, double z, double wavenumber, std::vector<complex> values)
    : grid_(source_grid), z_(z), k_(wavenumber), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != static_cast<std::size_t>(grid_.nx) * grid_.ny) {
        throw ConfigError("spectrum sample count does not match grid");
    }
}

double AngularSpectrum::norm() const {
    double acc = 0.0;
    for (const auto& v : values_) {
        acc += std::norm(v);
    }
    return acc * dkx() * dky();
}

SampledField sample_field(const GridSpec& grid, double z, double wavenumber,
                          const std::function<complex(double, double)>& field) {
    grid.validate();
    std::vector<complex> values(static_cast<std::size_t>(grid.nx) * grid.ny);
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y(iy);
        for (int ix = 0; ix < grid.nx; ++ix) {
            values[static_cast<std::size_t>(iy) * grid.nx + ix] = field(grid.x(ix), y);
        }
    }
    return SampledField(grid, z, wavenumber, std::move(values));
}

SampledField sample_lg(const LGModeSpec& mode, double z, const GridSpec& grid) {
    if (mode.ell != 0) {
        throw ConfigError("only radial (ell = 0) LG modes can be sampled");
    }
    return sample_field(grid, z, mode.beam.wavenumber(), [&](double x, double y) {
        return lg_field(mode, std::hypot(x, y), z);
    });
}

SampledField sample_hg(const HGModeSpec& mode, double z, const GridSpec& grid) {
    return sample_field(grid, z, mode.beam.wavenumber(), [&](double x, double y) { return hg_field(mode, x, y, z); });
}

double lg_second_moment_radius(const LGModeSpec& mode, double z) {
    return beam_radius(mode.beam, z) * std::sqrt(static_cast<double>(mode.order()));
}

double hg_second_moment_radius(const HGModeSpec& mode, double z) {
    return beam_radius(mode.beam, z) * std::sqrt(mode.order() + 1.0);
}

AngularSpectrum to_angular_spectrum(const SampledField& field) {
    const GridSpec& g = field.grid();
    std::vector<complex> data = roll_half(field.values(), g.nx, g.ny);
    fft2d(data, g.nx, g.ny, FFTW_FORWARD);
    const double scale = g.dx * g.dy / (2.0 * pi);
    const double dkx = 2.0 * pi / (g.nx * g.dx);
    const double dky = 2.0 * pi / (g.ny * g.dy);
    const bool shifted = g.center_x != 0.0 || g.center_y != 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        const double ky = dky * (iy < g.ny / 2 ? iy : iy - g.ny);
        for (int ix = 0; ix < g.nx; ++ix) {
            auto& v = data[static_cast<std::size_t>(iy) * g.nx + ix];
            v *= scale;
            if (shifted) {
                const double kx = dkx * (ix < g.nx / 2 ? ix : ix - g.nx);
                const double ph = -(kx * g.center_x + ky * g.center_y);
                v *= complex(std::cos(ph), std::sin(ph));
            }
        }
    }
    return AngularSpectrum(g, field.z(), field.wavenumber(), std::move(data));
}

SampledField from_angular_spectrum(const AngularSpectrum& spectrum) {
    const GridSpec& g = spectrum.source_grid();
    std::vector<complex> data = spectrum.values();
    const bool shifted = g.center_x != 0.0 || g.center_y != 0.0;
    const double scale = 2.0 * pi / (g.dx * g.dy) / (static_cast<double>(g.nx) * g.ny);
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            auto& v = data[static_cast<std::size_t>(iy) * g.nx + ix];
            v *= scale;
            if (shifted) {
                const double ph = spectrum.kx(ix) * g.center_x + spectrum.ky(iy) * g.center_y;
                v *= complex(std::cos(ph), std::sin(ph));
            }
        }
    }
    fft2d(data, g.nx, g.ny, FFTW_BACKWARD);
    // Inverse of roll_half is roll_half for even sizes.
    return SampledField(g, spectrum.z(), spectrum.wavenumber(), roll_half(data, g.nx, g.ny));
}

double kz(double kappa_sq, double k, KzModel model) {
    return k + kz_offset(kappa_sq, k, model);
}

double kz_offset(double kappa_sq, double k, KzModel model) {
    if (model == KzModel::paraxial) {
        return -kappa_sq / (2.0 * k);
    }
    if (kappa_sq > k * k) {
        throw NumericalError("evanescent component: kappa^2 > k^2 in exact kz model");
    }
    return -kappa_sq / (k + std::sqrt(k * k - kappa_sq));
}

namespace {

SampledField propagate_impl(const SampledField& field, double dz, KzModel model, bool carrier,
                            PropagationDiagnostics* diagnostics) {
    if (dz == 0.0) {
        if (diagnostics != nullptr) {
            *diagnostics = {};
        }
        return field;
    }
    AngularSpectrum spectrum = to_angular_spectrum(field);
    const double k = field.wavenumber();
    std::vector<complex> values = spectrum.values();
    double total = 0.0;
    double discarded = 0.0;
    for (int iy = 0; iy < spectrum.ny(); ++iy) {
        const double ky = spectrum.ky(iy);
        for (int ix = 0; ix < spectrum.nx(); ++ix) {
            const double kx = spectrum.kx(ix);
            const double kappa_sq = kx * kx + ky * ky;
            auto& v = values[static_cast<std::size_t>(iy) * spectrum.nx() + ix];
            const double e = std::norm(v);
            total += e;
            if (model == KzModel::exact && kappa_sq > k * k) {
                discarded += e;
                v = 0.0;
                continue;
            }
            const double phase = kz_offset(kappa_sq, k, model) * dz;
            v *= complex(std::cos(phase), std::sin(phase));
        }
    }
    const double discarded_fraction = total > 0.0 ? discarded / total : 0.0;
    if (discarded_fraction > 1e-6) {
        std::ostringstream msg;
        msg << "evanescent mask discarded " << discarded_fraction << " of the field energy";
        throw NumericalError(msg.str());
    }
    AngularSpectrum propagated(spectrum.source_grid(), field.z() + dz, k, std::move(values));
    SampledField out = from_angular_spectrum(propagated);
    if (carrier) {
        const double ph = std::fmod(k * dz, 2.0 * pi);
        const complex c(std::cos(ph), std::sin(ph));
        std::vector<complex> v = out.values();
        for (auto& x : v) {
            x *= c;
        }
        out = SampledField(out.grid(), out.z(), k, std::move(v));
    }
    if (diagnostics != nullptr) {
        diagnostics->discarded_energy_fraction = discarded_fraction;
        const GridSpec& g = field.grid();
        const double w_in = field.second_moment_radius();
        const double w_out = out.second_moment_radius();
        const double window = std::min(g.window_x(), g.window_y());
        const double pitch = std::max(g.dx, g.dy);
        diagnostics->under_resolved =
            std::min(w_in, w_out) < 4.0 * pitch || window < 6.0 * std::max(w_in, w_out);
        if (diagnostics->under_resolved) {
            std::ostringstream msg;
            msg << "grid may be under-resolved: beam radius " << std::min(w_in, w_out) << " m vs pitch " << pitch
                << " m, window " << window << " m vs beam radius " << std::max(w_in, w_out) << " m";
            diagnostics->warning = msg.str();
        }
    }
    return out;
}

} // namespace

SampledField asm_propagate(const SampledField& field, double dz, KzModel model, PropagationDiagnostics* diagnostics) {
    return propagate_impl(field, dz, model, true, diagnostics);
}

SampledField asm_propagate_envelope(const SampledField& field, double dz, KzModel model,
                                    PropagationDiagnostics* diagnostics) {
    return propagate_impl(field, dz, model, false, diagnostics);
}

KzMoments kz_moments(const AngularSpectrum& spectrum, KzModel model) {
    const double n = spectrum.norm();
    if (std::abs(n - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "kz_moments requires a unit-norm spectrum (norm = " << n << ")";
        throw ConfigError(msg.str());
    }
    const double k = spectrum.wavenumber();
    const double cell = spectrum.dkx() * spectrum.dky();
    // Work with kz - k throughout: <kz> differences are ~1e-4 of k.
    double weight = 0.0;
    double first = 0.0;
    for (int iy = 0; iy < spectrum.ny(); ++iy) {
        const double ky = spectrum.ky(iy);
        for (int ix = 0; ix < spectrum.nx(); ++ix) {
            const double kx = spectrum.kx(ix);
            const double kappa_sq = kx * kx + ky * ky;
            const double w = std::norm(spectrum.at(ix, iy)) * cell;
            if (w == 0.0) {
                continue;
            }
            if (model == KzModel::exact && kappa_sq > k * k) {
                if (w > 1e-12) {
                    throw NumericalError("spectrum carries evanescent energy; use the paraxial model or a finer grid");
                }
                continue;
            }
            weight += w;
            first += w * kz_offset(kappa_sq, k, model);
        }
    }
    const double mean_offset = first / weight;
    double central = 0.0;
    for (int iy = 0; iy < spectrum.ny(); ++iy) {
        const double ky = spectrum.ky(iy);
        for (int ix = 0; ix < spectrum.nx(); ++ix) {
            const double kx = spectrum.kx(ix);
            const double kappa_sq = kx * kx + ky * ky;
            if (model == KzModel::exact && kappa_sq > k * k) {
                continue;
            }
            const double w = std::norm(spectrum.at(ix, iy)) * cell;
            const double d = kz_offset(kappa_sq, k, model) - mean_offset;
            central += w * d * d;
        }
    }
    KzMoments m;
    m.mean_offset = mean_offset;
    m.mean = k + mean_offset;
    m.variance = central / weight;
    m.second_moment = m.variance + m.mean * m.mean;
    return m;
}

void write_field_csv(std::ostream& out, const SampledField& field, const std::string& comment) {
    if (!comment.empty()) {
        out << comment << '\n';
    }
    out << "x_m,y_m,re,im\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    const GridSpec& g = field.grid();
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const complex v = field.at(ix, iy);
            out << g.x(ix) << ',' << g.y(iy) << ',' << v.real() << ',' << v.imag() << '\n';
        }
    }
}

std::string field_metadata_json(const SampledField& field) {
    const GridSpec& g = field.grid();
    nlohmann::ordered_json j;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    j["dx_m"] = g.dx;
    j["dy_m"] = g.dy;
    j["center_x_m"] = g.center_x;
    j["center_y_m"] = g.center_y;
    j["z_m"] = field.z();
    j["wavenumber_per_m"] = field.wavenumber();
    j["norm"] = field.norm();
    j["columns"] = {"x_m", "y_m", "re", "im"};
    return j.dump(2);
}

} // namespace gouysim
