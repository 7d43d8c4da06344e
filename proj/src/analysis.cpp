#include "gouysim/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gouysim/errors.hpp"
#include "gouysim/interference.hpp"

namespace gouysim {

namespace {

constexpr int kParams = 4;
constexpr std::size_t kMinPoints = 8;

using Vec4 = Eigen::Matrix<double, kParams, 1>;
using Mat4 = Eigen::Matrix<double, kParams, kParams>;

// Parameters are optimized in units where each is O(1):
// u = (scale / scale_unit, w0 / w0_unit, z0 / z_unit, theta).
struct Units {
    double scale = 1.0;
    double w0 = 25e-6;
    double z = 1e-3;

    Vec4 to_internal(const FitParams& p) const { return {p.scale / scale, p.w0 / w0, p.z0 / z, p.theta}; }
    FitParams to_params(const Vec4& u) const { return {u[0] * scale, u[1] * w0, u[2] * z, u[3]}; }
    Vec4 diag() const { return {scale, w0, z, 1.0}; }
};

class Problem {
public:
    Problem(const ScanCurve& curve, const FitModel& model, const Units& units, std::vector<double> weights)
        : curve_(curve), model_(model), units_(units), sqrt_w_(std::move(weights)) {
        for (auto& w : sqrt_w_) {
            w = std::sqrt(w);
        }
    }

    std::size_t size() const { return curve_.points.size(); }

    /// Weighted residuals r_i = sqrt(w_i) (y_i - f_i); false if parameters are invalid.
    bool residuals(const Vec4& u, Eigen::VectorXd& r) const {
        const FitParams p = units_.to_params(u);
        if (!(p.w0 > 0.0) || !std::isfinite(p.w0) || !std::isfinite(p.z0) || !std::isfinite(p.theta)) {
            return false;
        }
        r.resize(static_cast<Eigen::Index>(size()));
        for (std::size_t i = 0; i < size(); ++i) {
            const auto& pt = curve_.points[i];
            const double f = p.scale * model_.evaluate(pt.z, p.w0, p.z0, p.theta);
            r[static_cast<Eigen::Index>(i)] = sqrt_w_[i] * (pt.signal - f);
        }
        return r.allFinite();
    }

    /// Jacobian of the model (not the residual) by central differences.
    bool jacobian(const Vec4& u, Eigen::MatrixXd& jac) const {
        jac.resize(static_cast<Eigen::Index>(size()), kParams);
        Eigen::VectorXd rp;
        Eigen::VectorXd rm;
        for (int k = 0; k < kParams; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(u[k]));
            Vec4 up = u;
            Vec4 um = u;
            up[k] += h;
            um[k] -= h;
            if (!residuals(up, rp) || !residuals(um, rm)) {
                return false;
            }
            // r = sqrt(w)(y - f)  =>  d(sqrt(w) f)/du = -(r+ - r-)/(2h)
            jac.col(k) = -(rp - rm) / (2.0 * h);
        }
        return true;
    }

private:
    const ScanCurve& curve_;
    const FitModel& model_;
    Units units_;
    std::vector<double> sqrt_w_;
};

std::vector<double> fit_weights(const ScanCurve& curve, Weighting weighting) {
    std::vector<double> w(curve.points.size(), 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& pt = curve.points[i];
        switch (weighting) {
        case Weighting::unweighted:
            break;
        case Weighting::sigma:
            if (pt.sigma > 0.0) {
                w[i] = 1.0 / (pt.sigma * pt.sigma);
            }
            break;
        case Weighting::poisson:
            w[i] = 1.0 / std::max(pt.signal, 1.0);
            break;
        }
    }
    return w;
}

// Least-squares optimal scale for fixed shape parameters.
double best_scale(const ScanCurve& curve, const FitModel& model, const std::vector<double>& w, double w0, double z0,
                  double theta, double* cost) {
    double num = 0.0;
    double den = 0.0;
    std::vector<double> f(curve.points.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = model.evaluate(curve.points[i].z, w0, z0, theta);
        num += w[i] * f[i] * curve.points[i].signal;
        den += w[i] * f[i] * f[i];
    }
    const double scale = den > 0.0 ? num / den : 1.0;
    if (cost != nullptr) {
        double c = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double r = curve.points[i].signal - scale * f[i];
            c += w[i] * r * r;
        }
        *cost = c;
    }
    return scale;
}

FitParams initial_guess(const ScanCurve& curve, const FitModel& model, const FitOptions& options,
                        const std::vector<double>& w) {
    if (options.seed) {
        return *options.seed;
    }
    const auto& pts = curve.points;
    // z0 at the maximum of a 5-point moving average.
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t lo = i >= 2 ? i - 2 : 0;
        const std::size_t hi = std::min(pts.size() - 1, i + 2);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            acc += pts[j].signal;
        }
        acc /= static_cast<double>(hi - lo + 1);
        if (acc > best_val) {
            best_val = acc;
            best = i;
        }
    }
    FitParams guess;
    guess.w0 = options.nominal_waist;
    guess.z0 = pts[best].z;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const double theta : {0.0, 0.5 * pi, -0.5 * pi, pi}) {
        double cost = 0.0;
        const double scale = best_scale(curve, model, w, guess.w0, guess.z0, theta, &cost);
        if (cost < best_cost) {
            best_cost = cost;
            guess.theta = theta;
            guess.scale = scale;
        }
    }
    return guess;
}

} // namespace

void ScanCurve::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        if (!std::isfinite(pt.z) || !std::isfinite(pt.signal) || !std::isfinite(pt.sigma)) {
            throw ConfigError("scan point " + std::to_string(i) + " is not finite");
        }
        if (pt.sigma < 0.0) {
            throw ConfigError("scan point " + std::to_string(i) + " has negative sigma");
        }
        if (i > 0 && !(pt.z > points[i - 1].z)) {
            throw ConfigError("scan z values must be strictly increasing (point " + std::to_string(i) + ")");
        }
    }
}

AccidentalResult accidental_correct(double coincidences, double singles_1, double singles_2, double tau) {
    if (coincidences < 0.0 || singles_1 < 0.0 || singles_2 < 0.0 || tau < 0.0) {
        throw ConfigError("accidental correction inputs must be non-negative");
    }
    const double corrected = coincidences - singles_1 * singles_2 * tau;
    if (corrected < 0.0) {
        return {0.0, true};
    }
    return {corrected, false};
}

double steps_to_position(long long steps, double step_size) { return static_cast<double>(steps) * step_size; }

double FitModel::evaluate(double z, double w0, double z0, double theta) const {
    NoonConfig cfg;
    cfg.photons = photons;
    cfg.p = p;
    cfg.p_prime = p_prime;
    cfg.theta = theta;
    cfg.beam = BeamParams(wavelength, w0, z0);
    cfg.fiber = fiber;
    return kind == ModelKind::classical ? classical_signal(cfg, z) : noon_signal(cfg, z);
}

double wrap_angle(double angle) {
    double a = std::remainder(angle, 2.0 * pi);
    if (a <= -pi) {
        a += 2.0 * pi;
    }
    return a;
}

double adjusted_r2(std::span<const double> residuals, std::span<const double> signals, int n_params) {
    const std::size_t n = signals.size();
    if (residuals.size() != n) {
        throw ConfigError("residual and signal counts differ");
    }
    if (n <= static_cast<std::size_t>(n_params) + 1) {
        throw ConfigError("adjusted R^2 needs more points than parameters + 1");
    }
    const double mean = std::accumulate(signals.begin(), signals.end(), 0.0) / static_cast<double>(n);
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss_tot += (signals[i] - mean) * (signals[i] - mean);
        ss_res += residuals[i] * residuals[i];
    }
    if (ss_tot == 0.0) {
        throw NumericalError("adjusted R^2 undefined: signal has zero variance");
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - static_cast<std::size_t>(n_params) - 1);
}

FitResult fit_scan(const ScanCurve& curve, const FitModel& model, const FitOptions& options) {
    if (curve.points.size() < kMinPoints) {
        throw ConfigError("fit needs at least 8 points");
    }
    curve.validate();
    if (model.kind == ModelKind::noon && model.photons < 1) {
        throw ConfigError("noon model needs N >= 1");
    }
    if (model.p == model.p_prime) {
        throw ConfigError("fit model needs p != p_prime");
    }

    const std::vector<double> weights = fit_weights(curve, options.weighting);
    const FitParams guess = initial_guess(curve, model, options, weights);

    Units units;
    units.scale = std::abs(guess.scale) > 0.0 ? std::abs(guess.scale) : 1.0;
    units.w0 = options.nominal_waist;
    units.z = 0.5 * (2.0 * pi / model.wavelength) * units.w0 * units.w0;

    const Problem problem(curve, model, units, weights);
    Vec4 u = units.to_internal(guess);
    Eigen::VectorXd r;
    if (!problem.residuals(u, r)) {
        throw ConfigError("initial fit parameters are invalid");
    }
    double cost = r.squaredNorm();

    FitResult result;
    result.weighting = options.weighting;
    result.cost_history.push_back(cost);

    double lambda = 1e-3;
    Eigen::MatrixXd jac;
    bool have_jac = false;
    std::string stop_reason = "maximum iterations reached";
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (!have_jac) {
            if (!problem.jacobian(u, jac)) {
                stop_reason = "Jacobian evaluation failed";
                break;
            }
            have_jac = true;
        }
        const Mat4 jtj = jac.transpose() * jac;
        const Vec4 jtr = jac.transpose() * r;
        if (jtr.cwiseAbs().maxCoeff() <= 1e-15 * std::max(cost, 1e-300)) {
            result.converged = true;
            stop_reason = "gradient vanished";
            break;
        }
        Mat4 damped = jtj;
        for (int k = 0; k < kParams; ++k) {
            damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
        }
        const Vec4 step = damped.ldlt().solve(jtr);
        const Vec4 trial = u + step;
        Eigen::VectorXd r_trial;
        const bool ok = step.allFinite() && problem.residuals(trial, r_trial);
        const double trial_cost = ok ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
        if (trial_cost < cost) {
            const double rel_cost = (cost - trial_cost) / std::max(cost, 1e-300);
            const double rel_step = step.norm() / (u.norm() + 1e-12);
            u = trial;
            r = std::move(r_trial);
            cost = trial_cost;
            result.cost_history.push_back(cost);
            have_jac = false;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel_step < options.step_tolerance || rel_cost < options.cost_tolerance) {
                result.converged = true;
                stop_reason = rel_step < options.step_tolerance ? "relative step below tolerance"
                                                                : "relative cost change below tolerance";
                ++it;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                // No descent direction left at working precision.
                result.converged = true;
                stop_reason = "no further decrease at working precision";
                ++it;
                break;
            }
        }
    }
    result.iterations = it;
    result.message = stop_reason;

    FitParams best = units.to_params(u);
    result.scale = best.scale;
    result.w0 = best.w0;
    result.z0 = best.z0;
    result.theta = wrap_angle(best.theta);
    result.residual_norm = std::sqrt(cost);

    result.residuals.resize(curve.points.size());
    std::vector<double> signals(curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& pt = curve.points[i];
        signals[i] = pt.signal;
        result.residuals[i] = pt.signal - best.scale * model.evaluate(pt.z, best.w0, best.z0, best.theta);
    }
    result.adjusted_r2 = adjusted_r2(result.residuals, signals, kParams);

    if (!problem.jacobian(u, jac)) {
        result.rank_deficient = true;
        result.message += "; covariance unavailable";
        return result;
    }
    const Mat4 jtj = jac.transpose() * jac;
    Eigen::SelfAdjointEigenSolver<Mat4> eig(jtj);
    const auto& ev = eig.eigenvalues();
    const double max_ev = ev.cwiseAbs().maxCoeff();
    Mat4 inv = Mat4::Zero();
    for (int k = 0; k < kParams; ++k) {
        if (ev[k] > 1e-14 * max_ev) {
            inv += eig.eigenvectors().col(k) * eig.eigenvectors().col(k).transpose() / ev[k];
        } else {
            result.rank_deficient = true;
        }
    }
    if (result.rank_deficient) {
        result.message += "; rank-deficient Jacobian (pseudo-inverse covariance)";
    }
    // Without error bars the residual variance sets the noise scale.
    if (options.weighting == Weighting::unweighted) {
        inv *= cost / static_cast<double>(curve.points.size() - kParams);
    }
    const Vec4 d = units.diag();
    for (int a = 0; a < kParams; ++a) {
        for (int b = 0; b < kParams; ++b) {
            result.covariance[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = inv(a, b) * d[a] * d[b];
        }
    }
    return result;
}

} // namespace gouysim
