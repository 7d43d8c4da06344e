#include "gouysim/coupling.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

#include "gouysim/errors.hpp"

namespace gouysim {

namespace {

constexpr int kCompensatedSumMaxOrder = 10;
constexpr double kQuadratureTolerance = 1e-9;

// Neumaier variant of Kahan summation, applied per component.
class CompensatedSum {
public:
    void add(complex x) {
        add_component(sum_re_, c_re_, x.real());
        add_component(sum_im_, c_im_, x.imag());
    }
    complex value() const { return {sum_re_ + c_re_, sum_im_ + c_im_}; }

private:
    static void add_component(double& sum, double& comp, double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double sum_re_ = 0.0, c_re_ = 0.0;
    double sum_im_ = 0.0, c_im_ = 0.0;
};

} // namespace

complex overlap_c_factor(const BeamParams& beam, const FiberMode& fiber, double z) {
    const double w = beam_radius(beam, z);
    const double wf = fiber.mode_radius();
    const complex inner(1.0 / (wf * wf) + 1.0 / (w * w), 0.5 * beam.wavenumber() * inverse_curvature(beam, z));
    return 0.5 * w * w * inner;
}

complex overlap_analytic(int p, const BeamParams& beam, const FiberMode& fiber, double z) {
    if (p < 0) {
        throw ConfigError("radial index p must be >= 0");
    }
    const double w = beam_radius(beam, z);
    const double t = (z - beam.focal_position()) / beam.rayleigh_length();
    const double gouy = (2.0 * p + 1.0) * std::atan(t);
    const complex b = (w / fiber.mode_radius()) * complex(std::cos(gouy), std::sin(gouy));
    const complex c = overlap_c_factor(beam, fiber, z);
    const complex inv_c = 1.0 / c;

    if (p > kCompensatedSumMaxOrder) {
        // Binomial theorem collapses the alternating sum to (1/C)(1 - 1/C)^p.
        return b * inv_c * std::pow(1.0 - inv_c, p);
    }
    CompensatedSum sum;
    double binom = 1.0;
    complex power = inv_c;
    for (int j = 0; j <= p; ++j) {
        sum.add(((j % 2 == 0) ? binom : -binom) * power);
        binom = binom * (p - j) / (j + 1.0);
        power *= inv_c;
    }
    return b * sum.value();
}

complex overlap_analytic(const OverlapConfig& cfg) {
    if (cfg.mode.ell != 0) {
        throw ConfigError("overlap is defined for radial modes (ell = 0) only");
    }
    return overlap_analytic(cfg.mode.p, cfg.mode.beam, cfg.fiber, cfg.z);
}

complex overlap_numeric(const OverlapConfig& cfg, double* error_estimate) {
    if (cfg.mode.ell != 0) {
        throw ConfigError("overlap is defined for radial modes (ell = 0) only");
    }
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double w = beam_radius(cfg.mode.beam, cfg.z);
    const double wf = cfg.fiber.mode_radius();
    // The integrand carries exp(-r^2 / w_eff^2); 15 w_eff leaves < 1e-90.
    const double w_eff = 1.0 / std::sqrt(1.0 / (wf * wf) + 1.0 / (w * w));
    const double upper = 15.0 * w_eff;

    auto integrand = [&](double r) { return 2.0 * pi * r * std::conj(lg_field(cfg.mode, r, cfg.z)) * fiber_field(cfg.fiber, r); };
    double err = 0.0;
    const complex value = Integrator::integrate(integrand, 0.0, upper, 8, 1e-12, &err);
    // Boost accumulates |K - G| on the reference interval [-1, 1]; every
    // subinterval has half-width <= upper / 2, which bounds the absolute error.
    const double abs_err = err * 0.5 * upper;
    if (error_estimate != nullptr) {
        *error_estimate = abs_err;
    }
    if (!(abs_err <= kQuadratureTolerance) || !std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        std::ostringstream msg;
        msg << "overlap quadrature did not converge (error estimate " << abs_err << ")";
        throw NumericalError(msg.str());
    }
    return value;
}

} // namespace gouysim
