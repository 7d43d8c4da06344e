// gouysim: scenario simulation, scan fitting, Fisher-information reports and
// field propagation dumps.
//
// Exit codes: 0 success, 2 configuration error, 3 input parse error,
// 4 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gouysim/analysis.hpp"
#include "gouysim/coupling.hpp"
#include "gouysim/errors.hpp"
#include "gouysim/interference.hpp"
#include "gouysim/io.hpp"
#include "gouysim/metrology.hpp"
#include "gouysim/parallel.hpp"
#include "gouysim/propagation.hpp"

using namespace gouysim;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kParse = 3, kNumerical = 4 };

// Scenario parameters in boundary units (nm, um, mm).
struct Scenario {
    double wavelength_nm = 810.0;
    double waist_um = 25.0;
    double z0_mm = 0.0;
    double fiber_mfd_um = 5.0;
    int photons = 2;
    int p = 0;
    int p_prime = 2;
    double theta_rad = 0.0;
    double z_min_mm = -10.0;
    double z_max_mm = 10.0;
    int samples = 401;

    BeamParams beam() const { return {wavelength_nm * 1e-9, waist_um * 1e-6, z0_mm * 1e-3}; }
    FiberMode fiber() const { return FiberMode::from_mfd(fiber_mfd_um * 1e-6); }

    NoonConfig noon() const {
        NoonConfig c;
        c.photons = photons;
        c.p = p;
        c.p_prime = p_prime;
        c.theta = theta_rad;
        c.beam = beam();
        c.fiber = fiber();
        return c;
    }

    std::vector<double> z_grid() const { return linspace(z_min_mm * 1e-3, z_max_mm * 1e-3, samples); }

    json to_json() const {
        // nlohmann::json keeps keys sorted, which makes the dump canonical.
        return {{"wavelength_nm", wavelength_nm}, {"waist_um", waist_um},
                {"z0_mm", z0_mm},                 {"fiber_mfd_um", fiber_mfd_um},
                {"N", photons},                   {"p", p},
                {"p_prime", p_prime},             {"theta_rad", theta_rad},
                {"z_range_mm", {z_min_mm, z_max_mm}}, {"samples", samples}};
    }
};

// Error tied to a config key, reported with its source location.
struct KeyedError {
    std::string key;
    std::string message;
};

// Where each setting came from, so validation messages can point at it.
class ConfigSource {
public:
    void load(const std::string& path) {
        path_ = path;
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("config: cannot open '" + path + "'");
        }
        std::stringstream buf;
        buf << in.rdbuf();
        text_ = buf.str();
        try {
            doc_ = json::parse(text_);
        } catch (const json::parse_error& e) {
            throw ConfigError("config " + path + ": " + e.what());
        }
        if (!doc_.is_object()) {
            throw ConfigError("config " + path + " (line 1): top level must be a JSON object");
        }
    }

    const json& doc() const { return doc_; }
    bool loaded() const { return !path_.empty(); }

    void mark_flag(const std::string& key, const std::string& flag) { flags_[key] = flag; }

    std::string where(const std::string& key) const {
        if (auto it = flags_.find(key); it != flags_.end()) {
            return "flag " + it->second;
        }
        if (loaded()) {
            const auto pos = text_.find("\"" + key + "\"");
            if (pos != std::string::npos) {
                const auto line = 1 + std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
                return path_ + " line " + std::to_string(line);
            }
            return path_;
        }
        return "default";
    }

    [[noreturn]] void fail(const KeyedError& e) const {
        throw ConfigError("config error (" + where(e.key) + "): " + e.message);
    }

private:
    std::string path_;
    std::string text_;
    json doc_ = json::object();
    std::map<std::string, std::string> flags_;
};

struct ScenarioOptions {
    std::string config_path;
    std::optional<double> wavelength_nm, waist_um, z0_mm, fiber_mfd_um, theta_rad, z_min_mm, z_max_mm;
    std::optional<int> photons, p, p_prime, samples;
};

void add_scenario_options(CLI::App* app, ScenarioOptions& o) {
    app->add_option("-c,--config", o.config_path, "JSON scenario config");
    app->add_option("--wavelength-nm", o.wavelength_nm, "wavelength [nm]");
    app->add_option("--waist-um", o.waist_um, "beam waist radius [um]");
    app->add_option("--z0-mm", o.z0_mm, "focal position [mm]");
    app->add_option("--fiber-mfd-um", o.fiber_mfd_um, "fiber mode-field diameter [um]");
    app->add_option("-N,--photons", o.photons, "photon number N");
    app->add_option("--p", o.p, "radial index p");
    app->add_option("--p-prime", o.p_prime, "radial index p'");
    app->add_option("--theta", o.theta_rad, "relative phase [rad]");
    app->add_option("--z-min-mm", o.z_min_mm, "scan start [mm]");
    app->add_option("--z-max-mm", o.z_max_mm, "scan end [mm]");
    app->add_option("--samples", o.samples, "number of z samples");
}

template <class T>
void read_key(const ConfigSource& src, const char* key, T& target) {
    const json& d = src.doc();
    if (!d.contains(key)) {
        return;
    }
    const json& v = d.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            src.fail({key, std::string(key) + " must be an integer"});
        }
    } else if (!v.is_number()) {
        src.fail({key, std::string(key) + " must be a number"});
    }
    target = v.get<T>();
}

Scenario resolve_scenario(const ScenarioOptions& o, ConfigSource& src) {
    Scenario s;
    if (!o.config_path.empty()) {
        src.load(o.config_path);
        static const std::vector<std::string> known = {"wavelength_nm", "waist_um", "z0_mm", "fiber_mfd_um", "N",
                                                       "p", "p_prime", "theta_rad", "z_range_mm", "samples"};
        for (const auto& [key, value] : src.doc().items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                src.fail({key, "unknown key '" + key + "'"});
            }
        }
        read_key(src, "wavelength_nm", s.wavelength_nm);
        read_key(src, "waist_um", s.waist_um);
        read_key(src, "z0_mm", s.z0_mm);
        read_key(src, "fiber_mfd_um", s.fiber_mfd_um);
        read_key(src, "N", s.photons);
        read_key(src, "p", s.p);
        read_key(src, "p_prime", s.p_prime);
        read_key(src, "theta_rad", s.theta_rad);
        read_key(src, "samples", s.samples);
        if (src.doc().contains("z_range_mm")) {
            const json& r = src.doc().at("z_range_mm");
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
                src.fail({"z_range_mm", "z_range_mm must be [min, max]"});
            }
            s.z_min_mm = r[0].get<double>();
            s.z_max_mm = r[1].get<double>();
        }
    }
    auto apply = [&](const auto& opt, auto& field, const char* key, const char* flag) {
        if (opt) {
            field = *opt;
            src.mark_flag(key, flag);
        }
    };
    apply(o.wavelength_nm, s.wavelength_nm, "wavelength_nm", "--wavelength-nm");
    apply(o.waist_um, s.waist_um, "waist_um", "--waist-um");
    apply(o.z0_mm, s.z0_mm, "z0_mm", "--z0-mm");
    apply(o.fiber_mfd_um, s.fiber_mfd_um, "fiber_mfd_um", "--fiber-mfd-um");
    apply(o.photons, s.photons, "N", "--photons");
    apply(o.p, s.p, "p", "--p");
    apply(o.p_prime, s.p_prime, "p_prime", "--p-prime");
    apply(o.theta_rad, s.theta_rad, "theta_rad", "--theta");
    apply(o.z_min_mm, s.z_min_mm, "z_range_mm", "--z-min-mm");
    apply(o.z_max_mm, s.z_max_mm, "z_range_mm", "--z-max-mm");
    apply(o.samples, s.samples, "samples", "--samples");

    auto positive = [&](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            src.fail({key, std::string(key) + " must be positive"});
        }
    };
    positive(s.wavelength_nm, "wavelength_nm");
    positive(s.waist_um, "waist_um");
    positive(s.fiber_mfd_um, "fiber_mfd_um");
    if (!std::isfinite(s.z0_mm)) {
        src.fail({"z0_mm", "z0_mm must be finite"});
    }
    if (s.photons < 1) {
        src.fail({"N", "N must be >= 1"});
    }
    if (s.p < 0) {
        src.fail({"p", "p must be >= 0"});
    }
    if (s.p_prime < 0) {
        src.fail({"p_prime", "p_prime must be >= 0"});
    }
    if (!std::isfinite(s.theta_rad)) {
        src.fail({"theta_rad", "theta_rad must be finite"});
    }
    if (s.samples < 2) {
        src.fail({"samples", "samples must be >= 2"});
    }
    if (!(s.z_min_mm < s.z_max_mm) || !std::isfinite(s.z_min_mm) || !std::isfinite(s.z_max_mm)) {
        src.fail({"z_range_mm", "z_range_mm must satisfy min < max"});
    }
    return s;
}

void require_distinct_modes(const Scenario& s, const ConfigSource& src) {
    if (s.p == s.p_prime) {
        src.fail({"p_prime", "p and p_prime must differ"});
    }
}

// Writes to --out when given, otherwise to stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw ConfigError("cannot write '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string canonical(const json& j) { return j.dump(); }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    ScenarioOptions scenario;
    std::string kind = "noon";
    std::string out;
    int threads = 0;
    double noise_rel = 0.0;
    std::optional<unsigned long long> noise_seed;
    int density_points = 101;
    double density_half_width_um = 0.0;
    double density_z_mm = std::nan("");
};

int run_simulate(const SimulateArgs& a) {
    ConfigSource src;
    const Scenario s = resolve_scenario(a.scenario, src);
    const int threads = resolve_threads(a.threads);
    json cfg = s.to_json();
    cfg["command"] = "simulate";
    cfg["kind"] = a.kind;

    if (a.noise_rel < 0.0) {
        throw ConfigError("config error (flag --noise-rel): must be >= 0");
    }
    if (a.noise_rel > 0.0 && !a.noise_seed) {
        throw ConfigError("config error (flag --noise-rel): noise requires --noise-seed for reproducibility");
    }
    if (a.noise_rel > 0.0) {
        cfg["noise_rel"] = a.noise_rel;
        cfg["noise_seed"] = *a.noise_seed;
    }
    auto add_noise = [&](Curve& curve) {
        if (a.noise_rel <= 0.0) {
            return;
        }
        std::mt19937_64 rng(*a.noise_seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto& pt : curve) {
            pt.value *= 1.0 + a.noise_rel * g(rng);
        }
    };

    if (a.kind == "compare-debroglie") {
        require_distinct_modes(s, src);
        if (s.photons != 2) {
            src.fail({"N", "compare-debroglie requires N = 2"});
        }
        const NoonConfig c = s.noon();
        const auto zs = s.z_grid();
        const std::string prefix = a.out.empty() ? "debroglie" : a.out;
        struct Item {
            std::string suffix;
            std::string label;
            Curve curve;
        };
        std::vector<Item> items;
        items.push_back({"quantum", "noon_N2", sample_curve([&](double z) { return noon_signal(c, z); }, zs, threads)});
        for (const auto sc : {DeBroglieScenario::matched_lens_radius, DeBroglieScenario::matched_rayleigh_doubled_order}) {
            LabeledCurve lc = debroglie_comparison(c, sc, zs, threads);
            items.push_back({sc == DeBroglieScenario::matched_lens_radius ? "matched_lens" : "matched_rayleigh", lc.label,
                             std::move(lc.curve)});
        }
        for (auto& item : items) {
            add_noise(item.curve);
            json file_cfg = cfg;
            file_cfg["label"] = item.label;
            const std::string path = prefix + "_" + item.suffix + ".csv";
            Output out(path);
            write_curve_csv(out.stream(), item.curve, canonical(file_cfg));
            std::cerr << "wrote " << path << '\n';
        }
        return kOk;
    }

    if (a.kind == "density") {
        require_distinct_modes(s, src);
        if (s.photons != 2) {
            src.fail({"N", "density maps are defined for N = 2"});
        }
        if (a.density_points < 2) {
            throw ConfigError("config error (flag --density-points): must be >= 2");
        }
        const NoonConfig c = s.noon();
        const double z = std::isnan(a.density_z_mm) ? c.beam.focal_position() : a.density_z_mm * 1e-3;
        const double half = a.density_half_width_um > 0.0
                                ? a.density_half_width_um * 1e-6
                                : 2.0 * beam_radius(c.beam, z) * std::sqrt(2.0 * std::max(c.p, c.p_prime) + 1.0);
        const auto xs = linspace(-half, half, static_cast<std::size_t>(a.density_points));
        cfg["density_z_m"] = z;
        cfg["density_half_width_m"] = half;
        cfg["density_points"] = a.density_points;
        Output out(a.out);
        write_density_csv(out.stream(), twophoton_samepos_density(c, xs, xs, z), canonical(cfg));
        return kOk;
    }

    std::function<double(double)> f;
    const NoonConfig c = s.noon();
    if (a.kind == "classical") {
        require_distinct_modes(s, src);
        f = [c](double z) { return classical_signal(c, z); };
    } else if (a.kind == "noon") {
        require_distinct_modes(s, src);
        f = [c](double z) { return noon_signal(c, z); };
    } else if (a.kind == "distinguishable") {
        require_distinct_modes(s, src);
        if (s.photons != 2) {
            src.fail({"N", "the distinguishable-pair baseline requires N = 2"});
        }
        f = [c](double z) { return distinguishable_pair_signal(c, z); };
    } else {
        throw ConfigError("config error (flag --kind): unknown kind '" + a.kind + "'");
    }
    Curve curve = sample_curve(f, s.z_grid(), threads);
    add_noise(curve);
    Output out(a.out);
    write_curve_csv(out.stream(), curve, canonical(cfg));
    return kOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    ScenarioOptions scenario;
    std::string data;
    std::string model = "noon";
    bool raw_counts = false;
    double tau_ns = 1.0;
    double step_nm = 20.0;
    bool weighted = false;
    bool poisson = false;
    std::string residuals;
    std::string out;
    std::optional<double> seed_w0_um, seed_z0_mm, seed_theta, seed_scale;
};

int run_fit(const FitArgs& a) {
    ConfigSource src;
    const Scenario s = resolve_scenario(a.scenario, src);
    require_distinct_modes(s, src);
    if (a.weighted && a.poisson) {
        throw ConfigError("config error (flags --weighted/--poisson): choose one weighting");
    }
    if (!(a.tau_ns >= 0.0) || !(a.step_nm > 0.0)) {
        throw ConfigError("config error (flags --tau-ns/--step-nm): tau must be >= 0 and step > 0");
    }

    ScanCurve scan;
    if (a.raw_counts) {
        scan = read_raw_counts_csv_file(a.data, {a.tau_ns * 1e-9, a.step_nm * 1e-9});
    } else {
        scan = read_scan_csv_file(a.data);
    }

    FitModel model;
    if (a.model == "classical") {
        model.kind = ModelKind::classical;
        model.photons = 1;
    } else if (a.model == "noon") {
        model.kind = ModelKind::noon;
        model.photons = s.photons;
    } else {
        throw ConfigError("config error (flag --model): unknown model '" + a.model + "'");
    }
    model.p = s.p;
    model.p_prime = s.p_prime;
    model.fiber = s.fiber();
    model.wavelength = s.wavelength_nm * 1e-9;

    FitOptions opt;
    opt.nominal_waist = s.waist_um * 1e-6;
    if (a.weighted) {
        if (!scan.meta.has_sigma) {
            throw ConfigError("config error (flag --weighted): input has no sigma column");
        }
        opt.weighting = Weighting::sigma;
    } else if (a.poisson) {
        opt.weighting = Weighting::poisson;
    }
    if (a.seed_w0_um || a.seed_z0_mm || a.seed_theta || a.seed_scale) {
        FitParams seed;
        seed.w0 = a.seed_w0_um.value_or(s.waist_um) * 1e-6;
        seed.z0 = a.seed_z0_mm.value_or(s.z0_mm) * 1e-3;
        seed.theta = a.seed_theta.value_or(s.theta_rad);
        seed.scale = a.seed_scale.value_or(1.0);
        opt.seed = seed;
    }

    json cfg = s.to_json();
    cfg["command"] = "fit";
    cfg["model"] = a.model;
    cfg["weighting"] = to_string(opt.weighting);
    if (a.raw_counts) {
        cfg["tau_ns"] = a.tau_ns;
        cfg["step_nm"] = a.step_nm;
    }

    nlohmann::ordered_json report;
    int code = kOk;
    FitResult result;
    bool have_result = false;
    try {
        result = fit_scan(scan, model, opt);
        have_result = true;
        report = to_json(result);
        if (!result.converged) {
            code = kNumerical;
        }
    } catch (const NumericalError& e) {
        report["converged"] = false;
        report["message"] = e.what();
        code = kNumerical;
    }
    report["model"] = a.model;
    report["photons"] = model.photons;
    report["points"] = scan.points.size();
    report["sigma_column"] = scan.meta.has_sigma;
    if (!a.weighted && !a.poisson) {
        report["weighting_note"] = scan.meta.has_sigma ? "sigma column present but ignored; pass --weighted to use it"
                                                       : "no sigma column; unweighted fit";
    }
    if (a.raw_counts) {
        report["clamped_points"] = scan.meta.clamped_points;
    }
    report["config"] = cfg;

    Output out(a.out);
    out.stream() << report.dump(2) << '\n';
    if (have_result && !a.residuals.empty()) {
        Output res(a.residuals);
        write_residuals_csv(res.stream(), scan, result, canonical(cfg));
    }
    return code;
}

// --------------------------------------------------------------------- qfi

struct QfiArgs {
    ScenarioOptions scenario;
    std::optional<double> p_max;
    int grid = 512;
    std::string cfi_out;
    std::string out;
};

int run_qfi(const QfiArgs& a) {
    ConfigSource src;
    const Scenario s = resolve_scenario(a.scenario, src);
    const BeamParams beam = s.beam();
    const FiberMode fiber = s.fiber();
    QfiGridOptions grid;
    grid.samples = a.grid;
    GridSpec::square(a.grid, 1.0).validate();

    const QfiBreakdown q = qfi_noon_numeric(s.photons, s.p, s.p_prime, beam, grid);
    const int delta_p = s.p_prime - s.p;
    const double fq = heisenberg_term_lg(s.photons, std::abs(delta_p), beam);

    double p_max = 0.0;
    if (a.p_max) {
        p_max = *a.p_max;
    } else {
        // Constant-|A| estimate from the focal overlaps.
        const double z0 = beam.focal_position();
        const double amp = std::sqrt(std::abs(overlap_analytic(s.p, beam, fiber, z0)) *
                                     std::abs(overlap_analytic(s.p_prime, beam, fiber, z0)));
        p_max = 2.0 * std::pow(amp, 2 * s.photons);
    }

    json cfg = s.to_json();
    cfg["command"] = "qfi";
    cfg["grid"] = a.grid;
    cfg["p_max"] = p_max;

    nlohmann::ordered_json report;
    report["qfi"] = to_json(q);
    report["heisenberg_closed_form"] = fq;
    report["p_max"] = p_max;
    if (p_max > 0.0) {
        Curve cfi;
        for (const double z : s.z_grid()) {
            cfi.push_back({z, cfi_curve(s.photons, std::abs(delta_p), p_max, beam, z)});
        }
        report["cfi_focus"] = cfi_curve(s.photons, std::abs(delta_p), p_max, beam, beam.focal_position());
        report["cfi_focus_expected"] = 4.0 * p_max * fq;
        nlohmann::ordered_json zs = nlohmann::ordered_json::array();
        nlohmann::ordered_json vs = nlohmann::ordered_json::array();
        for (const auto& pt : cfi) {
            zs.push_back(pt.z);
            vs.push_back(pt.value);
        }
        report["cfi_samples"] = {{"z_m", zs}, {"cfi_per_m2", vs}};
        if (!a.cfi_out.empty()) {
            Output c(a.cfi_out);
            write_cfi_csv(c.stream(), cfi, canonical(cfg));
        }
    } else {
        report["cfi_focus"] = nullptr;
        report["cfi_note"] = "P_max is zero for this fiber; no CFI curve";
    }
    report["units"] = "m^-2";
    report["config"] = cfg;
    Output out(a.out);
    out.stream() << report.dump(2) << '\n';
    return kOk;
}

// --------------------------------------------------------------- propagate

struct PropagateArgs {
    ScenarioOptions scenario;
    std::string mode = "lg:0";
    double dz_mm = 0.0;
    int grid = 256;
    double window_um = 0.0;
    bool carrier = false;
    bool exact = false;
    std::string out;
};

struct ParsedMode {
    bool lg = true;
    int a = 0;
    int b = 0;
};

ParsedMode parse_mode(const std::string& spec) {
    auto bad = [&]() -> ConfigError { return ConfigError("config error (flag --mode): cannot parse '" + spec + "'; use lg:p or hg:m,n"); };
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw bad();
    }
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    ParsedMode m;
    try {
        std::size_t used = 0;
        if (kind == "lg") {
            m.a = std::stoi(rest, &used);
            if (used != rest.size()) {
                throw bad();
            }
        } else if (kind == "hg") {
            m.lg = false;
            const auto comma = rest.find(',');
            if (comma == std::string::npos) {
                throw bad();
            }
            m.a = std::stoi(rest.substr(0, comma), &used);
            if (used != comma) {
                throw bad();
            }
            const std::string second = rest.substr(comma + 1);
            m.b = std::stoi(second, &used);
            if (used != second.size()) {
                throw bad();
            }
        } else {
            throw bad();
        }
    } catch (const std::logic_error&) {
        throw bad();
    }
    if (m.a < 0 || m.b < 0) {
        throw ConfigError("config error (flag --mode): mode indices must be >= 0");
    }
    return m;
}

int run_propagate(const PropagateArgs& a) {
    ConfigSource src;
    const Scenario s = resolve_scenario(a.scenario, src);
    const ParsedMode pm = parse_mode(a.mode);
    if (a.grid < 64) {
        throw ConfigError("config error (flag --grid): grid " + std::to_string(a.grid) + " is below the minimum of 64");
    }
    const BeamParams beam = s.beam();
    const double z0 = beam.focal_position();
    const double dz = a.dz_mm * 1e-3;

    std::function<SampledField(const GridSpec&)> sample;
    double radius = 0.0;
    if (pm.lg) {
        const LGModeSpec mode(0, pm.a, beam);
        radius = std::max(lg_second_moment_radius(mode, z0), lg_second_moment_radius(mode, z0 + dz));
        sample = [mode, z0](const GridSpec& g) { return sample_lg(mode, z0, g); };
    } else {
        const HGModeSpec mode(pm.a, pm.b, beam);
        radius = std::max(hg_second_moment_radius(mode, z0), hg_second_moment_radius(mode, z0 + dz));
        sample = [mode, z0](const GridSpec& g) { return sample_hg(mode, z0, g); };
    }
    const GridSpec grid = a.window_um > 0.0 ? GridSpec::square(a.grid, a.window_um * 1e-6) : default_grid(radius, a.grid);
    grid.validate();

    const SampledField input = sample(grid);
    const KzModel model = a.exact ? KzModel::exact : KzModel::paraxial;
    PropagationDiagnostics diag;
    const SampledField field = a.carrier ? asm_propagate(input, dz, model, &diag)
                                         : asm_propagate_envelope(input, dz, model, &diag);
    if (diag.under_resolved) {
        std::cerr << "warning: " << diag.warning << '\n';
    }

    json cfg = s.to_json();
    cfg["command"] = "propagate";
    cfg["mode"] = a.mode;
    cfg["dz_mm"] = a.dz_mm;
    cfg["grid"] = a.grid;
    cfg["window_m"] = grid.window_x();
    cfg["carrier"] = a.carrier;
    cfg["kz_model"] = a.exact ? "exact" : "paraxial";

    Output out(a.out);
    write_field_csv(out.stream(), field, "# gouysim-config: " + canonical(cfg));
    if (!a.out.empty()) {
        json meta = json::parse(field_metadata_json(field));
        meta["input_norm"] = input.norm();
        meta["under_resolved"] = diag.under_resolved;
        meta["config"] = cfg;
        std::ofstream side(a.out + ".json");
        if (!side) {
            throw ConfigError("cannot write '" + a.out + ".json'");
        }
        side << meta.dump(2) << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gouysim: Gouy-phase interference simulation, fitting and Fisher information"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: GOUYSIM_THREADS or all cores)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "sample classical or N-photon curves, density maps or lambda/N comparisons");
    add_scenario_options(simulate, sim.scenario);
    simulate->add_option("--kind", sim.kind, "classical | noon | distinguishable | density | compare-debroglie");
    simulate->add_option("-o,--out", sim.out, "output file (prefix for compare-debroglie)");
    simulate->add_option("--noise-rel", sim.noise_rel, "relative Gaussian noise level");
    simulate->add_option("--noise-seed", sim.noise_seed, "RNG seed for noise");
    simulate->add_option("--density-points", sim.density_points, "grid points per axis for density maps");
    simulate->add_option("--density-half-width-um", sim.density_half_width_um, "half width of the density map [um]");
    simulate->add_option("--density-z-mm", sim.density_z_mm, "plane of the density map [mm] (default: focus)");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "fit a focal scan with the four-parameter model");
    add_scenario_options(fitc, fit.scenario);
    fitc->add_option("data", fit.data, "scan CSV (z_m,signal[,sigma]) or raw counts with --raw-counts")->required();
    fitc->add_option("--model", fit.model, "classical | noon");
    fitc->add_flag("--raw-counts", fit.raw_counts, "input is steps,coincidences,singles1,singles2");
    fitc->add_option("--tau-ns", fit.tau_ns, "coincidence window [ns]");
    fitc->add_option("--step-nm", fit.step_nm, "piezo step size [nm]");
    fitc->add_flag("--weighted", fit.weighted, "weight by 1/sigma^2 from the sigma column");
    fitc->add_flag("--poisson", fit.poisson, "weight by Poisson sigma = sqrt(max(signal, 1))");
    fitc->add_option("--residuals", fit.residuals, "write residuals CSV");
    fitc->add_option("-o,--out", fit.out, "write the JSON report here instead of stdout");
    fitc->add_option("--seed-w0-um", fit.seed_w0_um, "initial waist [um]");
    fitc->add_option("--seed-z0-mm", fit.seed_z0_mm, "initial focus [mm]");
    fitc->add_option("--seed-theta", fit.seed_theta, "initial phase [rad]");
    fitc->add_option("--seed-scale", fit.seed_scale, "initial scale");

    QfiArgs qfi;
    auto* qfic = app.add_subcommand("qfi", "quantum and classical Fisher information report");
    add_scenario_options(qfic, qfi.scenario);
    qfic->add_option("--p-max", qfi.p_max, "fringe maximum P_max in (0, 1] (default: from focal overlaps)");
    qfic->add_option("--grid", qfi.grid, "samples per axis for the spectral QFI");
    qfic->add_option("--cfi-out", qfi.cfi_out, "write the CFI curve CSV");
    qfic->add_option("-o,--out", qfi.out, "write the JSON report here instead of stdout");

    PropagateArgs prop;
    auto* propc = app.add_subcommand("propagate", "dump a propagated mode field");
    add_scenario_options(propc, prop.scenario);
    propc->add_option("--mode", prop.mode, "lg:p or hg:m,n");
    propc->add_option("--dz", prop.dz_mm, "propagation distance [mm]");
    propc->add_option("--grid", prop.grid, "samples per axis (power of two, >= 64)");
    propc->add_option("--window", prop.window_um, "full window width [um] (default: 8 second-moment radii)");
    propc->add_flag("--carrier", prop.carrier, "keep the exp(i k dz) carrier");
    propc->add_flag("--exact", prop.exact, "use the exact kz model");
    propc->add_option("-o,--out", prop.out, "output CSV; a .json sidecar is written next to it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        sim.threads = threads;
        if (*simulate) {
            return run_simulate(sim);
        }
        if (*fitc) {
            return run_fit(fit);
        }
        if (*qfic) {
            return run_qfi(qfi);
        }
        if (*propc) {
            return run_propagate(prop);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfig;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
