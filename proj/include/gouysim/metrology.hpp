#pragma once

// Quantum and classical Fisher information for longitudinal displacement.
// All Fisher quantities are in m^-2.

#include "gouysim/beamgeom.hpp"
#include "gouysim/propagation.hpp"

namespace gouysim {

struct QfiBreakdown {
    double sql_term = 0.0;        ///< proportional to N
    double heisenberg_term = 0.0; ///< proportional to N^2
    double total = 0.0;
};

struct HgKzStats {
    double mean_kz = 0.0;
    double var_kz = 0.0;
};

HgKzStats kz_stats_hg(const HGModeSpec& mode);

/// Closed form for a HG pair; both modes must share the beam.
QfiBreakdown qfi_noon_hg(int photons, const HGModeSpec& a, const HGModeSpec& b);

/// 2N (Var_a + Var_b) + N^2 (<kz>_a - <kz>_b)^2.
QfiBreakdown qfi_from_moments(int photons, const KzMoments& a, const KzMoments& b);
QfiBreakdown qfi_from_spectra(int photons, const AngularSpectrum& a, const AngularSpectrum& b,
                              KzModel model = KzModel::paraxial);

struct QfiGridOptions {
    int samples = 1024;
    /// Full window width; 0 selects 8x the larger mode's second-moment radius.
    double window = 0.0;
    KzModel model = KzModel::paraxial;
};

/// QFI for radial LG modes from sampled angular spectra at the focus.
QfiBreakdown qfi_noon_numeric(int photons, int p, int p_prime, const BeamParams& beam, const QfiGridOptions& options = {});

/// Same for HG modes, used to cross-check against qfi_noon_hg.
QfiBreakdown qfi_noon_numeric_hg(int photons, const HGModeSpec& a, const HGModeSpec& b,
                                 const QfiGridOptions& options = {});

/// N^2 term for radial modes: (N^2 / 4) (2 delta_p / z_R)^2.
double heisenberg_term_lg(int photons, int delta_p, const BeamParams& beam);

/// Classical Fisher information of the N-photon fiber projection under the
/// constant-|A| approximation; delta_p = p' - p, p_max = 2 A^{2N} in (0, 1].
double cfi_curve(int photons, int delta_p, double p_max, const BeamParams& beam, double z);

} // namespace gouysim
