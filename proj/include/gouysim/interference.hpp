#pragma once

// On-axis coupling probabilities for classical superpositions and radial-mode
// N00N states, two-photon same-position densities and the lambda/N comparison.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "gouysim/beamgeom.hpp"

namespace gouysim {

/// (|N,0> - e^{i theta} |0,N>) / sqrt(2) in radial modes p and p_prime.
struct NoonConfig {
    int photons = 2;
    int p = 0;
    int p_prime = 4;
    double theta = 0.0;
    BeamParams beam{810e-9, 25e-6, 0.0};
    FiberMode fiber{2.5e-6};

    void validate() const;
    NoonConfig with_photons(int n) const {
        NoonConfig c = *this;
        c.photons = n;
        return c;
    }
};

struct CurveSample {
    double z = 0.0;
    double value = 0.0;
};
using Curve = std::vector<CurveSample>;

/// |A_p - e^{-i theta} A_p'|^2 (photon number ignored).
double classical_signal(const NoonConfig& cfg, double z);
/// (1/2) |A_p^N - e^{-i theta} A_p'^N|^2
double noon_signal(const NoonConfig& cfg, double z);
/// Unbunched pair baseline, half the N = 2 probability. Requires photons == 2.
double distinguishable_pair_signal(const NoonConfig& cfg, double z);

/// (|A_p| + |A_p'|)^2, the upper envelope of classical_signal.
double classical_envelope(const NoonConfig& cfg, double z);
/// (1/2)(|A_p|^N + |A_p'|^N)^2, the upper envelope of noon_signal.
double noon_envelope(const NoonConfig& cfg, double z);

/// cos of the interference phase between A_p^n and e^{-i theta} A_p'^n, i.e.
/// the envelope-free fringe term. n = 1 gives the classical fringe.
double fringe_term(const NoonConfig& cfg, int n, double z);

std::vector<double> linspace(double first, double last, std::size_t count);

/// Evaluates f on the grid, in ascending z, using up to `threads` workers.
Curve sample_curve(const std::function<double(double)>& f, const std::vector<double>& zs, int threads = 1);

struct Extremum {
    double z = 0.0;
    double value = 0.0;
    bool is_max = false;
};

/// Strict interior local extrema of a sampled curve, positions refined by a
/// three-point parabola. Flat plateaus count once.
std::vector<Extremum> find_extrema(const Curve& curve);

/// Row-major (y major) map over xs x ys.
struct DensityMap {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> values;
    double at(std::size_t ix, std::size_t iy) const { return values[iy * xs.size() + ix]; }
};

/// (1/2)|u_p^2 - e^{i theta} u_p'^2|^2 at one point, unnormalized.
double twophoton_samepos_density_raw(const NoonConfig& cfg, double x, double y, double z);
/// Same-position two-photon density over a grid, scaled to max 1.
DensityMap twophoton_samepos_density(const NoonConfig& cfg, const std::vector<double>& xs,
                                     const std::vector<double>& ys, double z);
/// Classical intensity (1/2)|u_p - e^{i theta} u_p'|^2 over a grid, scaled to max 1.
DensityMap classical_intensity_map(const NoonConfig& cfg, const std::vector<double>& xs,
                                   const std::vector<double>& ys, double z);
/// <r^2> of a map about the origin.
double transverse_second_moment(const DensityMap& map);

enum class DeBroglieScenario { matched_lens_radius, matched_rayleigh_doubled_order };

DeBroglieScenario parse_debroglie_scenario(std::string_view tag);
std::string_view to_string(DeBroglieScenario scenario);

/// Classical lambda/2 configuration that stands in for the N = 2 state.
NoonConfig debroglie_config(const NoonConfig& cfg, DeBroglieScenario scenario);

struct LabeledCurve {
    std::string label;
    NoonConfig config;
    Curve curve;
};

/// classical_signal of the lambda/2 configuration sampled on z_grid.
LabeledCurve debroglie_comparison(const NoonConfig& cfg, DeBroglieScenario scenario, const std::vector<double>& z_grid,
                                  int threads = 1);

} // namespace gouysim
