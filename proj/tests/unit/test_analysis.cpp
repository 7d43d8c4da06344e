#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gouysim/analysis.hpp"
#include "gouysim/errors.hpp"
#include "gouysim/interference.hpp"

using namespace gouysim;

namespace {

FitModel classical_model() {
    FitModel m;
    m.kind = ModelKind::classical;
    m.p = 0;
    m.p_prime = 4;
    m.fiber = FiberMode::from_mfd(5e-6);
    return m;
}

ScanCurve synth(const FitModel& model, const FitParams& t, std::size_t n = 201, double half = 10e-3) {
    ScanCurve s;
    for (const double z : linspace(-half, half, n)) {
        s.points.push_back({z, t.scale * model.evaluate(z, t.w0, t.z0, t.theta), 0.0});
    }
    return s;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("Accidental correction") {
    const AccidentalResult r = accidental_correct(100.0, 1000.0, 1000.0, 1e-9);
    CHECK(r.value == 100.0 - 1000.0 * 1000.0 * 1e-9);
    CHECK(r.value == doctest::Approx(99.999));
    CHECK_FALSE(r.clamped);
    CHECK(accidental_correct(42.0, 0.0, 5000.0).value == 42.0);
    CHECK(accidental_correct(42.0, 5000.0, 0.0).value == 42.0);
    const AccidentalResult c = accidental_correct(1.0, 1e5, 1e5);
    CHECK(c.value == 0.0);
    CHECK(c.clamped);
    CHECK_THROWS_AS(accidental_correct(-1.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(accidental_correct(1.0, -1.0, 1.0), ConfigError);
    // Linear in the coincidences above the clamp region.
    const double a = accidental_correct(200.0, 3e4, 2e4).value;
    const double b = accidental_correct(300.0, 3e4, 2e4).value;
    CHECK(b - a == doctest::Approx(100.0));
}

TEST_CASE("Piezo steps") {
    CHECK(steps_to_position(0) == 0.0);
    CHECK(steps_to_position(50000) == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(steps_to_position(50000, 24e-9) == doctest::Approx(1.2e-3).epsilon(1e-14));
    CHECK(steps_to_position(-10) == doctest::Approx(-200e-9));
}

TEST_CASE("Adjusted R^2") {
    const std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8};
    const std::vector<double> zero(8, 0.0);
    CHECK(adjusted_r2(zero, y) == 1.0);
    std::vector<double> mean_only(8);
    for (std::size_t i = 0; i < 8; ++i) {
        mean_only[i] = y[i] - 4.5;
    }
    CHECK(adjusted_r2(mean_only, y) <= 0.0);
    CHECK_THROWS_AS(adjusted_r2(std::vector<double>(5, 0.0), std::vector<double>{1, 2, 3, 4, 5}), ConfigError);
    CHECK_THROWS_AS(adjusted_r2(zero, std::vector<double>(8, 2.0)), NumericalError);
}

TEST_CASE("Angle wrapping") {
    CHECK(wrap_angle(0.3) == doctest::Approx(0.3));
    CHECK(wrap_angle(0.3 + 2.0 * pi) == doctest::Approx(0.3));
    CHECK(wrap_angle(pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-0.5 - 4.0 * pi) == doctest::Approx(-0.5));
}

TEST_CASE("Noiseless classical round trip") {
    const FitModel m = classical_model();
    const FitParams truth{0.8, 25e-6, 0.0, 0.3};
    const FitResult r = fit_scan(synth(m, truth), m);
    CHECK(r.converged);
    CHECK(r.scale == doctest::Approx(0.8).epsilon(1e-3));
    CHECK(r.w0 == doctest::Approx(25e-6).epsilon(1e-3));
    CHECK(std::abs(r.z0) < 1e-3 * 25e-6);
    CHECK(r.theta == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(r.adjusted_r2 >= 0.9999);
    for (std::size_t i = 1; i < r.cost_history.size(); ++i) {
        CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
    }
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            CHECK(r.covariance[a][b] == doctest::Approx(r.covariance[b][a]).epsilon(1e-9).scale(1e-300));
        }
    }
}

TEST_CASE("Shifted focus and rescaled signals") {
    const FitModel m = classical_model();
    const FitParams truth{1.3, 27e-6, 1.5e-3, -1.1};
    ScanCurve s = synth(m, truth);
    const FitResult r1 = fit_scan(s, m);
    CHECK(r1.w0 == doctest::Approx(27e-6).epsilon(1e-4));
    CHECK(r1.z0 == doctest::Approx(1.5e-3).epsilon(1e-4));
    CHECK(r1.theta == doctest::Approx(-1.1).epsilon(1e-4));
    for (auto& pt : s.points) {
        pt.signal *= 250.0;
    }
    const FitResult r2 = fit_scan(s, m);
    CHECK(r2.scale == doctest::Approx(250.0 * r1.scale).epsilon(1e-6));
    CHECK(r2.w0 == doctest::Approx(r1.w0).epsilon(1e-6));
    CHECK(r2.z0 == doctest::Approx(r1.z0).epsilon(1e-6));
    CHECK(r2.theta == doctest::Approx(r1.theta).epsilon(1e-6));
}

TEST_CASE("Seeds at theta and theta + 2 pi converge to the same wrapped value") {
    const FitModel m = classical_model();
    const ScanCurve s = synth(m, {0.8, 25e-6, 0.0, 0.3});
    FitOptions o1;
    o1.seed = FitParams{0.7, 24e-6, 1e-4, 0.2};
    FitOptions o2 = o1;
    o2.seed->theta += 2.0 * pi;
    const FitResult r1 = fit_scan(s, m, o1);
    const FitResult r2 = fit_scan(s, m, o2);
    CHECK(r1.theta == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(r2.theta == doctest::Approx(r1.theta).epsilon(1e-6));
}

TEST_CASE("N=2 fit with noise and sigma weighting") {
    FitModel m = classical_model();
    m.kind = ModelKind::noon;
    m.photons = 2;
    const FitParams truth{0.8, 25e-6, 0.0, 0.3};
    ScanCurve s = synth(m, truth);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& pt : s.points) {
        pt.sigma = 0.05 * pt.signal + 1e-6;
        pt.signal += pt.sigma * g(rng);
    }
    FitOptions opt;
    opt.weighting = Weighting::sigma;
    const FitResult r = fit_scan(s, m, opt);
    CHECK(r.converged);
    CHECK(r.weighting == Weighting::sigma);
    CHECK(r.w0 == doctest::Approx(25e-6).epsilon(0.01));
    CHECK(r.covariance[1][1] > 0.0);
    CHECK(std::sqrt(r.covariance[1][1]) < 1e-6);
}

TEST_CASE("Rank deficiency is reported") {
    // With the p' arm carrying no light the phase offset is unidentifiable.
    FitModel m = classical_model();
    m.fiber = FiberMode(25e-6);
    m.p_prime = 1;
    ScanCurve s;
    for (const double z : linspace(-1e-9, 1e-9, 9)) {
        s.points.push_back({z, m.evaluate(z, 25e-6, 0.0, 0.0), 0.0});
    }
    FitOptions o;
    o.seed = FitParams{1.0, 25e-6, 0.0, 0.0};
    const FitResult r = fit_scan(s, m, o);
    CHECK(r.rank_deficient);
}

TEST_CASE("Fit input validation") {
    const FitModel m = classical_model();
    ScanCurve small = synth(m, {1.0, 25e-6, 0.0, 0.0}, 7);
    CHECK_THROWS_AS(fit_scan(small, m), ConfigError);
    ScanCurve unordered = synth(m, {1.0, 25e-6, 0.0, 0.0}, 20);
    std::swap(unordered.points[3], unordered.points[4]);
    CHECK_THROWS_AS(fit_scan(unordered, m), ConfigError);
    FitModel bad = m;
    bad.p_prime = bad.p;
    CHECK_THROWS_AS(fit_scan(synth(m, {1.0, 25e-6, 0.0, 0.0}, 20), bad), ConfigError);
}

TEST_CASE("Fitted waists under mode contamination stay in a plausible band") {
    // Surrogate data: a few percent of the p' = 5 mode leaks into the p' arm.
    const FitModel m = classical_model();
    FitModel leak = m;
    leak.p_prime = 5;
    for (const double frac : {0.0, 0.02, 0.05}) {
        ScanCurve s;
        for (const double z : linspace(-10e-3, 10e-3, 201)) {
            s.points.push_back({z, (1.0 - frac) * m.evaluate(z, 25e-6, 0.0, 0.3) + frac * leak.evaluate(z, 25e-6, 0.0, 0.3), 0.0});
        }
        const FitResult r = fit_scan(s, m);
        CHECK(r.w0 > 24.0e-6);
        CHECK(r.w0 < 27.5e-6);
    }
}

}
