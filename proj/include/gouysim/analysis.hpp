#pragma once

// Scan data handling and four-parameter least-squares fits
// (scale, waist, focal position, phase offset).

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gouysim/beamgeom.hpp"

namespace gouysim {

struct ScanPoint {
    double z = 0.0;
    double signal = 0.0;
    double sigma = 0.0;
};

struct ScanMeta {
    std::string label;
    int photons = 1;
    int p = 0;
    int p_prime = 1;
    std::optional<double> integration_time_s;
    bool has_sigma = false;
    std::size_t clamped_points = 0; ///< points clamped to zero by accidental correction
};

struct ScanCurve {
    std::vector<ScanPoint> points;
    ScanMeta meta;

    /// z strictly increasing, sigma >= 0, all values finite.
    void validate() const;
};

struct AccidentalResult {
    double value = 0.0;
    bool clamped = false;
};

/// coincidences - singles_1 * singles_2 * tau, clamped at zero.
AccidentalResult accidental_correct(double coincidences, double singles_1, double singles_2, double tau = 1e-9);

inline constexpr double kDefaultPiezoStep = 20e-9;

double steps_to_position(long long steps, double step_size = kDefaultPiezoStep);

enum class ModelKind { classical, noon };

struct FitModel {
    ModelKind kind = ModelKind::classical;
    int photons = 1;
    int p = 0;
    int p_prime = 1;
    FiberMode fiber{2.5e-6};
    double wavelength = 810e-9;

    /// Unscaled model value for the given waist, focus and phase offset.
    double evaluate(double z, double w0, double z0, double theta) const;
};

struct FitParams {
    double scale = 1.0;
    double w0 = 25e-6;
    double z0 = 0.0;
    double theta = 0.0;
};

enum class Weighting {
    unweighted, ///< w_i = 1
    sigma,      ///< w_i = 1 / sigma_i^2, or 1 where sigma_i == 0
    poisson,    ///< sigma_i = sqrt(max(signal_i, 1))
};

struct FitOptions {
    Weighting weighting = Weighting::unweighted;
    std::optional<FitParams> seed;
    double nominal_waist = 25e-6;
    int max_iterations = 500;
    double step_tolerance = 1e-10;
    double cost_tolerance = 1e-10;
};

struct FitResult {
    double scale = 0.0;
    double w0 = 0.0;
    double z0 = 0.0;
    double theta = 0.0; ///< wrapped to (-pi, pi]
    double adjusted_r2 = 0.0;
    double residual_norm = 0.0;
    std::array<std::array<double, 4>, 4> covariance{};
    bool converged = false;
    bool rank_deficient = false;
    int iterations = 0;
    Weighting weighting = Weighting::unweighted;
    std::string message;
    std::vector<double> residuals;    ///< signal - fitted model (unweighted)
    std::vector<double> cost_history; ///< cost after each accepted step, starting with the initial cost
};

/// Damped least-squares fit of scale * model(z; w0, z0, theta). Requires at
/// least 8 points. Non-convergence is reported through `converged`.
FitResult fit_scan(const ScanCurve& curve, const FitModel& model, const FitOptions& options = {});

/// 1 - (1 - R^2)(n - 1)/(n - n_params - 1).
double adjusted_r2(std::span<const double> residuals, std::span<const double> signals, int n_params = 4);

double wrap_angle(double angle);

} // namespace gouysim
