#include "gouysim/interference.hpp"

#include <algorithm>
#include <cmath>

#include "gouysim/coupling.hpp"
#include "gouysim/errors.hpp"
#include "gouysim/parallel.hpp"

namespace gouysim {

namespace {

struct OverlapPair {
    complex a;       // A_p
    complex b;       // A_p'
};

OverlapPair overlaps(const NoonConfig& cfg, double z) {
    return {overlap_analytic(cfg.p, cfg.beam, cfg.fiber, z), overlap_analytic(cfg.p_prime, cfg.beam, cfg.fiber, z)};
}

complex phase_factor(double angle) { return {std::cos(angle), std::sin(angle)}; }

DensityMap evaluate_map(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::function<double(double, double)>& f) {
    if (xs.empty() || ys.empty()) {
        throw ConfigError("density grid must be non-empty");
    }
    DensityMap map{xs, ys, std::vector<double>(xs.size() * ys.size())};
    double peak = 0.0;
    for (std::size_t iy = 0; iy < ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < xs.size(); ++ix) {
            const double v = f(xs[ix], ys[iy]);
            map.values[iy * xs.size() + ix] = v;
            peak = std::max(peak, v);
        }
    }
    if (peak > 0.0) {
        for (auto& v : map.values) {
            v /= peak;
        }
    }
    return map;
}

} // namespace

void NoonConfig::validate() const {
    if (photons < 1) {
        throw ConfigError("photon number N must be >= 1");
    }
    if (p < 0 || p_prime < 0) {
        throw ConfigError("radial indices must be >= 0");
    }
    if (p == p_prime) {
        throw ConfigError("p and p_prime must differ");
    }
    if (!std::isfinite(theta)) {
        throw ConfigError("theta must be finite");
    }
}

double classical_signal(const NoonConfig& cfg, double z) {
    const auto [a, b] = overlaps(cfg, z);
    return std::norm(a - phase_factor(-cfg.theta) * b);
}

double noon_signal(const NoonConfig& cfg, double z) {
    const auto [a, b] = overlaps(cfg, z);
    return 0.5 * std::norm(std::pow(a, cfg.photons) - phase_factor(-cfg.theta) * std::pow(b, cfg.photons));
}

double distinguishable_pair_signal(const NoonConfig& cfg, double z) {
    if (cfg.photons != 2) {
        throw ConfigError("distinguishable pair baseline requires N = 2");
    }
    return 0.5 * noon_signal(cfg, z);
}

double classical_envelope(const NoonConfig& cfg, double z) {
    const auto [a, b] = overlaps(cfg, z);
    const double s = std::abs(a) + std::abs(b);
    return s * s;
}

double noon_envelope(const NoonConfig& cfg, double z) {
    const auto [a, b] = overlaps(cfg, z);
    const double s = std::pow(std::abs(a), cfg.photons) + std::pow(std::abs(b), cfg.photons);
    return 0.5 * s * s;
}

double fringe_term(const NoonConfig& cfg, int n, double z) {
    const auto [a, b] = overlaps(cfg, z);
    const complex lhs = std::pow(a, n);
    const complex rhs = phase_factor(-cfg.theta) * std::pow(b, n);
    const double mag = std::abs(lhs) * std::abs(rhs);
    if (mag == 0.0) {
        return 0.0;
    }
    return (lhs * std::conj(rhs)).real() / mag;
}

std::vector<double> linspace(double first, double last, std::size_t count) {
    if (count < 2) {
        throw ConfigError("linspace needs at least two samples");
    }
    std::vector<double> out(count);
    const double step = (last - first) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = first + step * static_cast<double>(i);
    }
    out.back() = last;
    return out;
}

Curve sample_curve(const std::function<double(double)>& f, const std::vector<double>& zs, int threads) {
    if (!std::is_sorted(zs.begin(), zs.end())) {
        throw ConfigError("z grid must be ascending");
    }
    Curve curve(zs.size());
    parallel_for(zs.size(), threads, [&](std::size_t i) { curve[i] = {zs[i], f(zs[i])}; });
    return curve;
}

std::vector<Extremum> find_extrema(const Curve& curve) {
    std::vector<Extremum> out;
    if (curve.size() < 3) {
        return out;
    }
    // Walk the sign of successive differences, skipping exact plateaus.
    int last_sign = 0;
    std::size_t last_change = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double d = curve[i].value - curve[i - 1].value;
        const int s = (d > 0.0) - (d < 0.0);
        if (s == 0) {
            continue;
        }
        if (last_sign != 0 && s != last_sign) {
            // Turning point at sample i - 1 (or the middle of a plateau).
            const std::size_t c = (last_change + i - 1) / 2;
            Extremum e{curve[c].z, curve[c].value, last_sign > 0};
            if (c > 0 && c + 1 < curve.size()) {
                const double y0 = curve[c - 1].value;
                const double y1 = curve[c].value;
                const double y2 = curve[c + 1].value;
                const double den = y0 - 2.0 * y1 + y2;
                if (den != 0.0) {
                    const double off = std::clamp(0.5 * (y0 - y2) / den, -1.0, 1.0);
                    const double h = off >= 0.0 ? curve[c + 1].z - curve[c].z : curve[c].z - curve[c - 1].z;
                    e.z = curve[c].z + off * h;
                    e.value = y1 - 0.25 * (y0 - y2) * off;
                }
            }
            out.push_back(e);
        }
        if (s != last_sign) {
            last_sign = s;
        }
        last_change = i;
    }
    return out;
}

double twophoton_samepos_density_raw(const NoonConfig& cfg, double x, double y, double z) {
    const double r = std::hypot(x, y);
    const complex up = lg_field(LGModeSpec(0, cfg.p, cfg.beam), r, z);
    const complex upp = lg_field(LGModeSpec(0, cfg.p_prime, cfg.beam), r, z);
    return 0.5 * std::norm(up * up - phase_factor(cfg.theta) * upp * upp);
}

DensityMap twophoton_samepos_density(const NoonConfig& cfg, const std::vector<double>& xs,
                                     const std::vector<double>& ys, double z) {
    if (cfg.photons != 2) {
        throw ConfigError("same-position density is defined for N = 2");
    }
    return evaluate_map(xs, ys, [&](double x, double y) { return twophoton_samepos_density_raw(cfg, x, y, z); });
}

DensityMap classical_intensity_map(const NoonConfig& cfg, const std::vector<double>& xs,
                                   const std::vector<double>& ys, double z) {
    const LGModeSpec mp(0, cfg.p, cfg.beam);
    const LGModeSpec mpp(0, cfg.p_prime, cfg.beam);
    return evaluate_map(xs, ys, [&](double x, double y) {
        const double r = std::hypot(x, y);
        return 0.5 * std::norm(lg_field(mp, r, z) - phase_factor(cfg.theta) * lg_field(mpp, r, z));
    });
}

double transverse_second_moment(const DensityMap& map) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t iy = 0; iy < map.ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
            const double v = map.at(ix, iy);
            num += (map.xs[ix] * map.xs[ix] + map.ys[iy] * map.ys[iy]) * v;
            den += v;
        }
    }
    if (!(den > 0.0)) {
        throw NumericalError("density map is identically zero");
    }
    return num / den;
}

DeBroglieScenario parse_debroglie_scenario(std::string_view tag) {
    if (tag == "matched_lens_radius" || tag == "matched-lens") {
        return DeBroglieScenario::matched_lens_radius;
    }
    if (tag == "matched_rayleigh_doubled_order" || tag == "matched-rayleigh") {
        return DeBroglieScenario::matched_rayleigh_doubled_order;
    }
    throw ConfigError("unknown de Broglie scenario '" + std::string(tag) + "'");
}

std::string_view to_string(DeBroglieScenario scenario) {
    switch (scenario) {
    case DeBroglieScenario::matched_lens_radius:
        return "matched_lens_radius";
    case DeBroglieScenario::matched_rayleigh_doubled_order:
        return "matched_rayleigh_doubled_order";
    }
    return "unknown";
}

NoonConfig debroglie_config(const NoonConfig& cfg, DeBroglieScenario scenario) {
    if (cfg.photons != 2) {
        throw ConfigError("de Broglie comparison is defined for N = 2");
    }
    NoonConfig out = cfg;
    out.photons = 1;
    const double half_wavelength = 0.5 * cfg.beam.wavelength();
    // Fiber radius follows the waist ratio in both scenarios.
    double waist_ratio = 1.0;
    switch (scenario) {
    case DeBroglieScenario::matched_lens_radius:
        // Same beam radius at the lens with half the wavelength focuses to half the waist.
        waist_ratio = 0.5;
        break;
    case DeBroglieScenario::matched_rayleigh_doubled_order:
        // z_R = pi w0^2 / lambda stays fixed when w0 -> w0 / sqrt(2).
        waist_ratio = 1.0 / std::sqrt(2.0);
        out.p = 2 * cfg.p;
        out.p_prime = 2 * cfg.p_prime;
        break;
    }
    out.beam = BeamParams(half_wavelength, cfg.beam.waist() * waist_ratio, cfg.beam.focal_position());
    out.fiber = FiberMode(cfg.fiber.mode_radius() * waist_ratio);
    return out;
}

LabeledCurve debroglie_comparison(const NoonConfig& cfg, DeBroglieScenario scenario, const std::vector<double>& z_grid,
                                  int threads) {
    const NoonConfig classical = debroglie_config(cfg, scenario);
    LabeledCurve out{std::string(to_string(scenario)), classical, {}};
    out.curve = sample_curve([&](double z) { return classical_signal(classical, z); }, z_grid, threads);
    return out;
}

} // namespace gouysim
