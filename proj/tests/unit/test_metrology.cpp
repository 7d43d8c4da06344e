#include <doctest.h>

#include <cmath>

#include "gouysim/errors.hpp"
#include "gouysim/metrology.hpp"

using namespace gouysim;

namespace {

const BeamParams beam(810e-9, 25e-6, 0.0);

}

TEST_SUITE("metrology") {

TEST_CASE("HG closed-form kz statistics") {
    const double zr = beam.rayleigh_length();
    const HgKzStats s00 = kz_stats_hg(HGModeSpec(0, 0, beam));
    CHECK(s00.var_kz == doctest::Approx(1.0 / (4.0 * zr * zr)).epsilon(1e-14));
    CHECK(s00.mean_kz == doctest::Approx(beam.wavenumber() - 1.0 / (2.0 * zr)).epsilon(1e-15));
    CHECK(kz_stats_hg(HGModeSpec(1, 1, beam)).var_kz == doctest::Approx(6.0 / (8.0 * zr * zr)).epsilon(1e-14));
}

TEST_CASE("Sampled HG spectra reproduce the closed-form moments") {
    for (const auto& [m, n] : {std::pair{0, 0}, {1, 1}, {3, 0}, {2, 5}}) {
        const HGModeSpec mode(m, n, beam);
        const SampledField f = sample_hg(mode, 0.0, default_grid(hg_second_moment_radius(mode, 0.0)));
        const KzMoments km = kz_moments(to_angular_spectrum(f));
        const HgKzStats ref = kz_stats_hg(mode);
        CHECK(km.variance == doctest::Approx(ref.var_kz).epsilon(1e-6));
        CHECK(km.mean_offset == doctest::Approx(ref.mean_kz - beam.wavenumber()).epsilon(1e-6));
    }
}

TEST_CASE("QFI closed form: structure") {
    const double zr = beam.rayleigh_length();
    const HGModeSpec a(0, 0, beam);
    const HGModeSpec b(8, 0, beam);
    const QfiBreakdown q2 = qfi_noon_hg(2, a, b);
    CHECK(q2.heisenberg_term == doctest::Approx(64.0 / (zr * zr)).epsilon(1e-14));
    CHECK(q2.total == doctest::Approx(q2.sql_term + q2.heisenberg_term));
    const QfiBreakdown q4 = qfi_noon_hg(4, a, b);
    CHECK(q4.heisenberg_term == doctest::Approx(4.0 * q2.heisenberg_term).epsilon(1e-14));
    CHECK(q4.sql_term == doctest::Approx(2.0 * q2.sql_term).epsilon(1e-14));
    CHECK(qfi_noon_hg(2, a, a).heisenberg_term == 0.0);
    CHECK_THROWS_AS(qfi_noon_hg(2, a, HGModeSpec(1, 0, beam.with_waist(30e-6))), ConfigError);
    CHECK_THROWS_AS(qfi_noon_hg(0, a, b), ConfigError);
}

TEST_CASE("QFI from moments matches the closed form for HG inputs") {
    const HGModeSpec a(0, 0, beam);
    const HGModeSpec b(8, 0, beam);
    const QfiBreakdown closed = qfi_noon_hg(2, a, b);
    const QfiBreakdown numeric = qfi_noon_numeric_hg(2, a, b);
    CHECK(numeric.total == doctest::Approx(closed.total).epsilon(1e-6));
    CHECK(numeric.heisenberg_term == doctest::Approx(closed.heisenberg_term).epsilon(1e-6));
}

TEST_CASE("Radial LG Heisenberg term") {
    const double zr = beam.rayleigh_length();
    CHECK(heisenberg_term_lg(2, 4, beam) == doctest::Approx(64.0 / (zr * zr)).epsilon(1e-14));
    const QfiBreakdown same = qfi_noon_numeric(2, 1, 1, beam);
    CHECK(same.heisenberg_term < 1e-12 * same.sql_term);
    const QfiBreakdown lg = qfi_noon_numeric(2, 0, 4, beam);
    CHECK(lg.heisenberg_term == doctest::Approx(64.0 / (zr * zr)).epsilon(1e-8));
}

TEST_CASE("CFI curve") {
    const double fq = heisenberg_term_lg(2, 4, beam);
    CHECK(cfi_curve(2, 4, 0.3, beam, 0.0) == doctest::Approx(4.0 * 0.3 * fq).epsilon(1e-15));
    CHECK(cfi_curve(2, 4, 1.0, beam, 0.0) == doctest::Approx(4.0 * fq).epsilon(1e-15));
    // N dp atan(t) = pi / 2
    const double z = beam.rayleigh_length() * std::tan(pi / 16.0);
    CHECK(cfi_curve(2, 4, 0.5, beam, z) < 1e-12 * fq);
    for (const double zz : {-5e-3, -1e-3, 2e-4, 7e-3}) {
        const double f = cfi_curve(2, 4, 0.6, beam, zz);
        CHECK(f >= 0.0);
        CHECK(f <= 4.0 * fq * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(cfi_curve(2, 4, 0.0, beam, 0.0), ConfigError);
    CHECK_THROWS_AS(cfi_curve(2, 4, 1.5, beam, 0.0), ConfigError);
}

}
