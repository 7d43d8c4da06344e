// Acceptance checks. Prints one PASS/FAIL line per criterion followed by
// indented detail lines. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gouysim/analysis.hpp"
#include "gouysim/coupling.hpp"
#include "gouysim/interference.hpp"
#include "gouysim/io.hpp"
#include "gouysim/metrology.hpp"
#include "gouysim/propagation.hpp"

#ifndef GOUYSIM_TEST_DATA_DIR
#define GOUYSIM_TEST_DATA_DIR "tests/data"
#endif

using namespace gouysim;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { details.push_back("info " + what); }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... Args>
std::string fmtn(const char* f, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const BeamParams kBeam(810e-9, 25e-6, 0.0);

// 1. Closed-form overlaps against adaptive quadrature.
Outcome overlaps() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const double zr = kBeam.rayleigh_length();
    const auto zs = linspace(-4.0 * zr, 4.0 * zr, 201);
    double worst = 0.0;
    for (int p = 0; p <= 4; ++p) {
        for (const double wf : {2.5e-6, 12.5e-6, 25e-6}) {
            for (const double z : zs) {
                const OverlapConfig cfg{LGModeSpec(0, p, kBeam), FiberMode(wf), z};
                worst = std::max(worst, std::abs(overlap_analytic(cfg) - overlap_numeric(cfg)));
            }
        }
    }
    const double t = seconds_since(t0);
    out.check(worst < 1e-6, fmt("max |analytic - numeric| = %.3e (< 1e-6)", worst));
    out.check(t < 10.0, fmt("runtime %.2f s (< 10 s)", t));
    return out;
}

// 2. Angular-spectrum propagation against the closed-form field.
Outcome asm_fidelity() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const double zr = kBeam.rayleigh_length();
    for (int p = 0; p <= 4; ++p) {
        const LGModeSpec mode(0, p, kBeam);
        const double radius = std::max(lg_second_moment_radius(mode, 0.0), lg_second_moment_radius(mode, zr));
        const GridSpec grid = default_grid(radius, 1024);
        const SampledField in = sample_lg(mode, 0.0, grid);
        const SampledField prop = asm_propagate_envelope(in, zr);
        const SampledField ref = sample_lg(mode, zr, grid);
        double max_err = 0.0;
        double peak = 0.0;
        for (std::size_t i = 0; i < ref.values().size(); ++i) {
            max_err = std::max(max_err, std::abs(prop.values()[i] - ref.values()[i]));
            peak = std::max(peak, std::abs(ref.values()[i]));
        }
        const double rel = max_err / peak;
        const double drift = std::abs(prop.norm() - in.norm()) / in.norm();
        out.check(rel < 1e-3, fmtn("p=%d max relative field error %.3e (< 1e-3)", p, rel));
        out.check(drift < 1e-10, fmtn("p=%d energy drift %.3e (< 1e-10)", p, drift));
    }
    const double t = seconds_since(t0);
    out.check(t < 60.0, fmt("runtime %.2f s (< 60 s)", t));
    return out;
}

// 3. Extremum counts and positions, classical versus N = 2.
Outcome gouy_speedup() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const double zr = kBeam.rayleigh_length();
    const auto zs = linspace(-10.0 * zr, 10.0 * zr, 40001);
    for (int pp = 1; pp <= 4; ++pp) {
        NoonConfig cfg;
        cfg.p = 0;
        cfg.p_prime = pp;
        cfg.theta = 0.0;
        cfg.beam = kBeam;
        cfg.fiber = FiberMode(kBeam.waist() / 10.0);
        const NoonConfig classical_cfg = cfg.with_photons(1);

        const auto classical = find_extrema(sample_curve([&](double z) { return classical_signal(classical_cfg, z); }, zs));
        const auto quantum = find_extrema(sample_curve([&](double z) { return noon_signal(cfg, z); }, zs));
        out.check(quantum.size() == 2 * classical.size(),
                  fmtn("p'=%d signal extrema: classical %zu, N=2 %zu (need exactly 2x)", pp, classical.size(),
                       quantum.size()));

        // Positions: classical fringe extrema mapped through atan(t) -> atan(t)/N.
        const auto fc = find_extrema(sample_curve([&](double z) { return fringe_term(cfg, 1, z); }, zs));
        const auto fq = find_extrema(sample_curve([&](double z) { return fringe_term(cfg, 2, z); }, zs));
        double worst = 0.0;
        for (const auto& e : fc) {
            const double aq = std::atan(e.z / zr) / 2.0;
            const double predicted = zr * std::tan(aq);
            const double period = 2.0 * pi * zr / (2.0 * 2.0 * pp) / (std::cos(aq) * std::cos(aq));
            double nearest = 1e300;
            for (const auto& q : fq) {
                nearest = std::min(nearest, std::abs(q.z - predicted));
            }
            worst = std::max(worst, nearest / period);
        }
        out.check(!fc.empty() && worst < 0.02,
                  fmtn("p'=%d fringe extremum positions: worst offset %.2e of local period over %zu extrema (< 2%%)",
                       pp, worst, fc.size()));
        out.note(fmtn("p'=%d fringe-term extrema: classical %zu, N=2 %zu", pp, fc.size(), fq.size()));
    }
    const double t = seconds_since(t0);
    out.check(t < 5.0, fmt("runtime %.2f s (< 5 s)", t));
    return out;
}

// 4. QFI: numerical spectra against closed forms, Heisenberg term, z-invariance.
Outcome qfi() {
    Outcome out;
    const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> pairs = {
        {{0, 0}, {1, 0}}, {{0, 0}, {2, 2}}, {{1, 1}, {0, 3}}, {{0, 0}, {8, 0}},
        {{3, 5}, {2, 1}}, {{4, 4}, {0, 1}}, {{0, 8}, {8, 0}}, {{2, 3}, {6, 1}},
    };
    double worst = 0.0;
    for (const auto& [a, b] : pairs) {
        const HGModeSpec ma(a.first, a.second, kBeam);
        const HGModeSpec mb(b.first, b.second, kBeam);
        const QfiBreakdown closed = qfi_noon_hg(2, ma, mb);
        const QfiBreakdown numeric = qfi_noon_numeric_hg(2, ma, mb);
        const double rel = std::abs(numeric.total - closed.total) / closed.total;
        worst = std::max(worst, rel);
    }
    out.check(worst < 1e-6, fmtn("HG pairs (S, S' <= 8): worst relative QFI difference %.3e over %zu pairs (< 1e-6)",
                                 worst, pairs.size()));

    const double zr = kBeam.rayleigh_length();
    const double target = 64.0 / (zr * zr);
    const double closed = heisenberg_term_lg(2, 4, kBeam);
    const double numeric = qfi_noon_numeric(2, 0, 4, kBeam).heisenberg_term;
    out.check(std::abs(closed - target) / target < 1e-8,
              fmt("closed-form Heisenberg term N=2, 0<->4: relative error %.3e (< 1e-8)",
                  std::abs(closed - target) / target));
    out.check(std::abs(numeric - target) / target < 1e-8,
              fmt("spectral Heisenberg term N=2, 0<->4: relative error %.3e (< 1e-8)",
                  std::abs(numeric - target) / target));

    // Propagate both modes by 2 z_R and recompute from the new spectra.
    const LGModeSpec m0(0, 0, kBeam);
    const LGModeSpec m4(0, 4, kBeam);
    const double radius = lg_second_moment_radius(m4, 2.0 * zr);
    const GridSpec grid = default_grid(radius, 1024);
    auto unit = [](const SampledField& f) {
        const AngularSpectrum s = to_angular_spectrum(f);
        std::vector<complex> v = s.values();
        const double scale = 1.0 / std::sqrt(s.norm());
        for (auto& x : v) {
            x *= scale;
        }
        return AngularSpectrum(s.source_grid(), s.z(), s.wavenumber(), std::move(v));
    };
    const SampledField f0 = sample_lg(m0, 0.0, grid);
    const SampledField f4 = sample_lg(m4, 0.0, grid);
    const QfiBreakdown at_focus = qfi_from_spectra(2, unit(f0), unit(f4));
    const QfiBreakdown moved =
        qfi_from_spectra(2, unit(asm_propagate(f0, 2.0 * zr)), unit(asm_propagate(f4, 2.0 * zr)));
    const double drift = std::abs(moved.total - at_focus.total) / at_focus.total;
    out.check(drift < 1e-8, fmt("QFI change after propagating 2 z_R: relative %.3e (< 1e-8)", drift));
    return out;
}

// 5. CFI at the focus.
Outcome cfi_focus() {
    Outcome out;
    double worst = 0.0;
    for (const int n : {1, 2, 3}) {
        for (const int dp : {1, 2, 4}) {
            for (const double pmax : {0.1, 0.5, 0.9, 1.0}) {
                const double fq = heisenberg_term_lg(n, dp, kBeam);
                const double f0 = cfi_curve(n, dp, pmax, kBeam, kBeam.focal_position());
                worst = std::max(worst, std::abs(f0 - 4.0 * pmax * fq) / (4.0 * pmax * fq));
            }
        }
    }
    out.check(worst < 1e-12, fmt("F(z0) vs 4 P_max F_Q: worst relative error %.3e (< 1e-12)", worst));
    return out;
}

ScanCurve synthetic_scan(const FitModel& model, const FitParams& truth, const std::vector<double>& zs) {
    ScanCurve scan;
    for (const double z : zs) {
        scan.points.push_back({z, truth.scale * model.evaluate(z, truth.w0, truth.z0, truth.theta), 0.0});
    }
    return scan;
}

void add_relative_noise(ScanCurve& scan, double level, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& pt : scan.points) {
        pt.signal *= 1.0 + level * g(rng);
    }
}

// 6. Fit recovery.
Outcome fit_recovery() {
    Outcome out;
    const auto zs = linspace(-10e-3, 10e-3, 201);
    const FitParams truth{0.8, 25e-6, 0.0, 0.3};

    FitModel classical;
    classical.kind = ModelKind::classical;
    classical.p = 0;
    classical.p_prime = 4;
    classical.fiber = FiberMode::from_mfd(5e-6);
    const FitResult clean = fit_scan(synthetic_scan(classical, truth, zs), classical);
    const double e_scale = std::abs(clean.scale / truth.scale - 1.0);
    const double e_w0 = std::abs(clean.w0 / truth.w0 - 1.0);
    const double e_z0 = std::abs(clean.z0 - truth.z0) / truth.w0; // z0 = 0: compare against the waist scale
    const double e_theta = std::abs(clean.theta / truth.theta - 1.0);
    out.check(clean.converged && std::max({e_scale, e_w0, e_z0, e_theta}) < 1e-3,
              fmtn("noiseless classical: rel. errors scale %.1e, w0 %.1e, z0 %.1e (of w0), theta %.1e (< 0.1%%)",
                   e_scale, e_w0, e_z0, e_theta));
    out.check(clean.adjusted_r2 >= 0.9999, fmt("noiseless classical adjusted R^2 = %.8f (>= 0.9999)", clean.adjusted_r2));

    FitModel noon = classical;
    noon.kind = ModelKind::noon;
    noon.photons = 2;
    int within = 0;
    double r2_sum = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        ScanCurve scan = synthetic_scan(noon, truth, zs);
        add_relative_noise(scan, 0.05, rng);
        const FitResult fit = fit_scan(scan, noon);
        within += std::abs(fit.w0 / truth.w0 - 1.0) < 0.01 ? 1 : 0;
        r2_sum += fit.adjusted_r2;
    }
    out.check(within >= 95, fmtn("N=2 with 5%% noise: w0 within 1%% in %d/100 seeded trials (>= 95)", within));
    out.check(r2_sum / 100.0 >= 0.95, fmt("N=2 with 5%% noise: mean adjusted R^2 = %.4f (>= 0.95)", r2_sum / 100.0));

    // Fit-quality thresholds evaluated on synthetic surrogates.
    double r2_classical = 0.0;
    double r2_quantum = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(seed));
        ScanCurve c = synthetic_scan(classical, truth, zs);
        add_relative_noise(c, 0.05, rng);
        r2_classical += fit_scan(c, classical).adjusted_r2 / 20.0;
        ScanCurve q = synthetic_scan(noon, truth, zs);
        add_relative_noise(q, 0.05, rng);
        r2_quantum += fit_scan(q, noon).adjusted_r2 / 20.0;
    }
    out.check(r2_classical >= 0.986, fmt("synthetic classical surrogate mean adjusted R^2 = %.4f (>= 0.986)", r2_classical));
    out.check(r2_quantum >= 0.951, fmt("synthetic N=2 surrogate mean adjusted R^2 = %.4f (>= 0.951)", r2_quantum));
    out.note("R^2 thresholds are property checks on synthetic data, not a reproduction of measured scans");
    return out;
}

// Interference phase of the N-photon term, arg(A_p^N conj(e^{-i theta} A_p'^N)).
double fringe_phase(const NoonConfig& cfg, int n, double z) {
    const complex a = std::pow(overlap_analytic(cfg.p, cfg.beam, cfg.fiber, z), n);
    const complex b = std::pow(overlap_analytic(cfg.p_prime, cfg.beam, cfg.fiber, z), n) *
                      complex(std::cos(cfg.theta), -std::sin(cfg.theta));
    return std::arg(a * std::conj(b));
}

// 7. lambda/2 classical stand-ins for the N = 2 state.
Outcome debroglie() {
    Outcome out;
    const double zr = kBeam.rayleigh_length();
    for (int pp = 1; pp <= 4; ++pp) {
        NoonConfig cfg;
        cfg.p = 0;
        cfg.p_prime = pp;
        cfg.beam = kBeam;
        cfg.fiber = FiberMode::from_mfd(5e-6);
        const NoonConfig rayleigh = debroglie_config(cfg, DeBroglieScenario::matched_rayleigh_doubled_order);
        const NoonConfig lens = debroglie_config(cfg, DeBroglieScenario::matched_lens_radius);

        double worst = 0.0;
        for (const double z : linspace(-zr, zr, 401)) {
            const double d = std::remainder(fringe_phase(rayleigh, 1, z) - fringe_phase(cfg, 2, z), 2.0 * pi);
            worst = std::max(worst, std::abs(d) / (2.0 * pi));
        }
        out.check(worst < 0.01, fmtn("p'=%d matched-Rayleigh fringe phase vs N=2 within |z-z0| <= z_R: %.2e of a period "
                                     "(< 1%%)",
                                     pp, worst));

        const double env_c = classical_envelope(rayleigh, 3.0 * zr) / classical_envelope(rayleigh, 0.0);
        const double env_q = noon_envelope(cfg, 3.0 * zr) / noon_envelope(cfg, 0.0);
        out.check(env_c > env_q,
                  fmtn("p'=%d envelope at 3 z_R relative to focus: matched-Rayleigh %.4e > N=2 %.4e", pp, env_c, env_q));

        const auto zs = linspace(-10.0 * zr, 10.0 * zr, 40001);
        const auto nq = find_extrema(sample_curve([&](double z) { return noon_signal(cfg, z); }, zs)).size();
        const auto nl = find_extrema(sample_curve([&](double z) { return classical_signal(lens, z); }, zs)).size();
        // Counts are compared at p' = 3 and 4 only; at lower orders they are reported.
        const std::string line = fmtn("p'=%d matched-lens extrema %zu vs N=2 extrema %zu%s", pp, nl, nq, pp >= 3 ? " (must differ)" : " (not checked)");
        if (pp >= 3) {
            out.check(nq != nl, line);
        } else {
            out.note(line);
        }
    }
    return out;
}

// 8. Two-photon same-position density is tighter than the classical intensity.
Outcome confinement() {
    Outcome out;
    NoonConfig cfg;
    cfg.p = 0;
    cfg.p_prime = 4;
    cfg.theta = 0.0;
    cfg.beam = kBeam;
    const double half = 5.0 * kBeam.waist();
    const auto xs = linspace(-half, half, 301);
    const double m2 = transverse_second_moment(twophoton_samepos_density(cfg, xs, xs, 0.0));
    const double m1 = transverse_second_moment(classical_intensity_map(cfg, xs, xs, 0.0));
    out.check(m2 < m1, fmtn("<r^2>: two-photon %.4e m^2 < classical %.4e m^2 (ratio %.3f)", m2, m1, m2 / m1));
    return out;
}

// 9. Raw counts through the ingestion path against independently computed values.
Outcome pipeline() {
    Outcome out;
    const std::string dir = GOUYSIM_TEST_DATA_DIR;
    const ScanCurve scan = read_raw_counts_csv_file(dir + "/raw_counts.csv");
    std::ifstream expected_file(dir + "/raw_counts_expected.csv");
    const ScanCurve expected = read_scan_csv(expected_file);
    bool same_size = scan.points.size() == expected.points.size() && !scan.points.empty();
    out.check(same_size, fmtn("rows: ingested %zu, expected %zu", scan.points.size(), expected.points.size()));
    if (!same_size) {
        return out;
    }
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        if (scan.points[i].z != expected.points[i].z || scan.points[i].signal != expected.points[i].signal) {
            ++mismatches;
        }
    }
    out.check(mismatches == 0, fmtn("bit-exact z and corrected counts: %zu mismatching rows", mismatches));
    out.note(fmtn("%zu row(s) clamped at zero", scan.meta.clamped_points));
    return out;
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {1, "overlap closed form matches quadrature", overlaps},
        {2, "angular-spectrum propagation fidelity", asm_fidelity},
        {3, "N=2 Gouy speed-up in extremum count and position", gouy_speedup},
        {4, "QFI cross-checks", qfi},
        {5, "CFI focal value", cfi_focus},
        {6, "fit recovery", fit_recovery},
        {7, "de Broglie comparison", debroglie},
        {8, "two-photon transverse confinement", confinement},
        {9, "raw-count ingestion", pipeline},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title);
        for (const auto& d : o.details) {
            std::printf("    %s\n", d.c_str());
        }
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
