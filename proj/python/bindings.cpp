#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gouysim/analysis.hpp"
#include "gouysim/coupling.hpp"
#include "gouysim/errors.hpp"
#include "gouysim/interference.hpp"
#include "gouysim/io.hpp"
#include "gouysim/metrology.hpp"
#include "gouysim/parallel.hpp"
#include "gouysim/propagation.hpp"

namespace py = pybind11;
using namespace gouysim;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& a) {
    if (a.ndim() != 1) {
        throw ConfigError("expected a one-dimensional array");
    }
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> curve_values(const Curve& curve) {
    py::array_t<double> out(static_cast<py::ssize_t>(curve.size()));
    auto v = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < curve.size(); ++i) {
        v(static_cast<py::ssize_t>(i)) = curve[i].value;
    }
    return out;
}

py::array_t<complex> field_array(const SampledField& f) {
    const auto& g = f.grid();
    py::array_t<complex> out({g.ny, g.nx});
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

NoonConfig make_config(int photons, int p, int p_prime, double theta, const BeamParams& beam, const FiberMode& fiber) {
    NoonConfig c;
    c.photons = photons;
    c.p = p;
    c.p_prime = p_prime;
    c.theta = theta;
    c.beam = beam;
    c.fiber = fiber;
    c.validate();
    return c;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gouy-phase interference of radial Laguerre-Gauss modes: fields, overlaps, N-photon fringes, "
              "Fisher information and scan fitting. Lengths are in metres.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<BeamParams>(m, "BeamParams")
        .def(py::init<double, double, double>(), py::arg("wavelength"), py::arg("waist"), py::arg("focal_position") = 0.0)
        .def_property_readonly("wavelength", &BeamParams::wavelength)
        .def_property_readonly("waist", &BeamParams::waist)
        .def_property_readonly("focal_position", &BeamParams::focal_position)
        .def_property_readonly("wavenumber", &BeamParams::wavenumber)
        .def_property_readonly("rayleigh_length", &BeamParams::rayleigh_length)
        .def("__repr__", [](const BeamParams& b) {
            return "BeamParams(wavelength=" + std::to_string(b.wavelength()) + ", waist=" + std::to_string(b.waist()) +
                   ", focal_position=" + std::to_string(b.focal_position()) + ")";
        });

    py::class_<FiberMode>(m, "FiberMode")
        .def(py::init<double>(), py::arg("mode_radius"))
        .def_static("from_mfd", &FiberMode::from_mfd, py::arg("mode_field_diameter"))
        .def_property_readonly("mode_radius", &FiberMode::mode_radius);

    py::class_<LGModeSpec>(m, "LGMode")
        .def(py::init<int, int, BeamParams>(), py::arg("ell"), py::arg("p"), py::arg("beam"))
        .def_readonly("ell", &LGModeSpec::ell)
        .def_readonly("p", &LGModeSpec::p)
        .def_readonly("beam", &LGModeSpec::beam)
        .def("order", &LGModeSpec::order);

    py::class_<HGModeSpec>(m, "HGMode")
        .def(py::init<int, int, BeamParams>(), py::arg("m"), py::arg("n"), py::arg("beam"))
        .def_readonly("m", &HGModeSpec::m)
        .def_readonly("n", &HGModeSpec::n)
        .def_readonly("beam", &HGModeSpec::beam);

    m.def("laguerre", &laguerre_poly, py::arg("p"), py::arg("x"));
    m.def("beam_radius", &beam_radius, py::arg("beam"), py::arg("z"));
    m.def("gouy_phase", &gouy_phase, py::arg("mode"), py::arg("z"));
    m.def("lg_field", &lg_field, py::arg("mode"), py::arg("r"), py::arg("z"));
    m.def("hg_field", &hg_field, py::arg("mode"), py::arg("x"), py::arg("y"), py::arg("z"));

    m.def(
        "overlap",
        [](int p, const BeamParams& beam, const FiberMode& fiber, double z, bool numeric) {
            if (numeric) {
                return overlap_numeric({LGModeSpec(0, p, beam), fiber, z});
            }
            return overlap_analytic(p, beam, fiber, z);
        },
        py::arg("p"), py::arg("beam"), py::arg("fiber"), py::arg("z"), py::arg("numeric") = false,
        "Complex fiber-coupling amplitude of LG_{0p} at z (closed form, or quadrature with numeric=True).");

    py::class_<NoonConfig>(m, "NoonConfig")
        .def(py::init(&make_config), py::arg("photons") = 2, py::arg("p") = 0, py::arg("p_prime") = 2,
             py::arg("theta") = 0.0, py::arg("beam") = BeamParams(810e-9, 25e-6, 0.0),
             py::arg("fiber") = FiberMode::from_mfd(5e-6))
        .def_readonly("photons", &NoonConfig::photons)
        .def_readonly("p", &NoonConfig::p)
        .def_readonly("p_prime", &NoonConfig::p_prime)
        .def_readonly("theta", &NoonConfig::theta)
        .def_readonly("beam", &NoonConfig::beam)
        .def_readonly("fiber", &NoonConfig::fiber);

    auto curve_fn = [](double (*f)(const NoonConfig&, double)) {
        return [f](const NoonConfig& cfg, const DoubleArray& z, int threads) {
            const auto zs = to_vector(z);
            Curve c;
            {
                py::gil_scoped_release release;
                c = sample_curve([&](double zz) { return f(cfg, zz); }, zs, resolve_threads(threads));
            }
            return curve_values(c);
        };
    };
    m.def("classical_signal", curve_fn(&classical_signal), py::arg("config"), py::arg("z"), py::arg("threads") = 1);
    m.def("noon_signal", curve_fn(&noon_signal), py::arg("config"), py::arg("z"), py::arg("threads") = 1);
    m.def("distinguishable_pair_signal", curve_fn(&distinguishable_pair_signal), py::arg("config"), py::arg("z"),
          py::arg("threads") = 1);

    m.def(
        "find_extrema",
        [](const DoubleArray& z, const DoubleArray& values) {
            const auto zs = to_vector(z);
            const auto vs = to_vector(values);
            if (zs.size() != vs.size()) {
                throw ConfigError("z and values must have the same length");
            }
            Curve c;
            for (std::size_t i = 0; i < zs.size(); ++i) {
                c.push_back({zs[i], vs[i]});
            }
            py::list out;
            for (const auto& e : find_extrema(c)) {
                out.append(py::make_tuple(e.z, e.value, e.is_max));
            }
            return out;
        },
        py::arg("z"), py::arg("values"), "List of (z, value, is_max) tuples.");

    m.def(
        "samepos_density",
        [](const NoonConfig& cfg, const DoubleArray& xs, const DoubleArray& ys, double z) {
            const DensityMap d = twophoton_samepos_density(cfg, to_vector(xs), to_vector(ys), z);
            py::array_t<double> out({static_cast<py::ssize_t>(d.ys.size()), static_cast<py::ssize_t>(d.xs.size())});
            std::copy(d.values.begin(), d.values.end(), out.mutable_data());
            return out;
        },
        py::arg("config"), py::arg("xs"), py::arg("ys"), py::arg("z"),
        "Normalized two-photon same-position density, indexed [iy, ix].");

    m.def(
        "debroglie_comparison",
        [](const NoonConfig& cfg, const std::string& scenario, const DoubleArray& z) {
            const LabeledCurve lc = debroglie_comparison(cfg, parse_debroglie_scenario(scenario), to_vector(z));
            return py::make_tuple(lc.label, curve_values(lc.curve));
        },
        py::arg("config"), py::arg("scenario"), py::arg("z"));

    py::class_<QfiBreakdown>(m, "QfiBreakdown")
        .def_readonly("sql_term", &QfiBreakdown::sql_term)
        .def_readonly("heisenberg_term", &QfiBreakdown::heisenberg_term)
        .def_readonly("total", &QfiBreakdown::total)
        .def("__repr__", [](const QfiBreakdown& q) { return "QfiBreakdown(" + to_json(q).dump() + ")"; });

    m.def(
        "qfi_noon",
        [](int photons, int p, int p_prime, const BeamParams& beam, int samples) {
            QfiGridOptions opt;
            opt.samples = samples;
            py::gil_scoped_release release;
            return qfi_noon_numeric(photons, p, p_prime, beam, opt);
        },
        py::arg("photons"), py::arg("p"), py::arg("p_prime"), py::arg("beam"), py::arg("samples") = 512,
        "Quantum Fisher information [1/m^2] from sampled angular spectra.");
    m.def("qfi_noon_hg", &qfi_noon_hg, py::arg("photons"), py::arg("a"), py::arg("b"));
    m.def("heisenberg_term_lg", &heisenberg_term_lg, py::arg("photons"), py::arg("delta_p"), py::arg("beam"));
    m.def("cfi", &cfi_curve, py::arg("photons"), py::arg("delta_p"), py::arg("p_max"), py::arg("beam"), py::arg("z"));

    m.def(
        "propagate",
        [](const std::string& kind, int a, int b, const BeamParams& beam, double dz, int grid, double window,
           bool envelope) {
            const double z0 = beam.focal_position();
            double radius = 0.0;
            std::function<SampledField(const GridSpec&)> sample;
            if (kind == "lg") {
                const LGModeSpec mode(0, a, beam);
                radius = std::max(lg_second_moment_radius(mode, z0), lg_second_moment_radius(mode, z0 + dz));
                sample = [mode, z0](const GridSpec& g) { return sample_lg(mode, z0, g); };
            } else if (kind == "hg") {
                const HGModeSpec mode(a, b, beam);
                radius = std::max(hg_second_moment_radius(mode, z0), hg_second_moment_radius(mode, z0 + dz));
                sample = [mode, z0](const GridSpec& g) { return sample_hg(mode, z0, g); };
            } else {
                throw ConfigError("mode kind must be 'lg' or 'hg'");
            }
            const GridSpec g = window > 0.0 ? GridSpec::square(grid, window) : default_grid(radius, grid);
            g.validate();
            PropagationDiagnostics diag;
            SampledField out = [&] {
                py::gil_scoped_release release;
                const SampledField in = sample(g);
                return envelope ? asm_propagate_envelope(in, dz, KzModel::paraxial, &diag)
                                : asm_propagate(in, dz, KzModel::paraxial, &diag);
            }();
            py::dict info;
            info["dx"] = g.dx;
            info["window"] = g.window_x();
            info["under_resolved"] = diag.under_resolved;
            info["norm"] = out.norm();
            return py::make_tuple(field_array(out), info);
        },
        py::arg("kind"), py::arg("a"), py::arg("b") = 0, py::arg("beam"), py::arg("dz"), py::arg("grid") = 256,
        py::arg("window") = 0.0, py::arg("envelope") = true,
        "Sample an LG_{0a} or HG_{ab} mode at focus and propagate it by dz. Returns (field[iy, ix], info).");

    py::enum_<Weighting>(m, "Weighting")
        .value("unweighted", Weighting::unweighted)
        .value("sigma", Weighting::sigma)
        .value("poisson", Weighting::poisson);

    m.def(
        "fit_scan",
        [](const DoubleArray& z, const DoubleArray& signal, const std::optional<DoubleArray>& sigma,
           const std::string& model, int photons, int p, int p_prime, const FiberMode& fiber, double wavelength,
           double nominal_waist, Weighting weighting) {
            ScanCurve scan;
            const auto zs = to_vector(z);
            const auto ss = to_vector(signal);
            std::vector<double> sg;
            if (sigma) {
                sg = to_vector(*sigma);
                scan.meta.has_sigma = true;
            }
            if (ss.size() != zs.size() || (sigma && sg.size() != zs.size())) {
                throw ConfigError("z, signal and sigma must have the same length");
            }
            for (std::size_t i = 0; i < zs.size(); ++i) {
                scan.points.push_back({zs[i], ss[i], sigma ? sg[i] : 0.0});
            }
            FitModel fm;
            if (model == "classical") {
                fm.kind = ModelKind::classical;
                fm.photons = 1;
            } else if (model == "noon") {
                fm.kind = ModelKind::noon;
                fm.photons = photons;
            } else {
                throw ConfigError("model must be 'classical' or 'noon'");
            }
            fm.p = p;
            fm.p_prime = p_prime;
            fm.fiber = fiber;
            fm.wavelength = wavelength;
            FitOptions opt;
            opt.weighting = weighting;
            opt.nominal_waist = nominal_waist;
            FitResult r;
            {
                py::gil_scoped_release release;
                r = fit_scan(scan, fm, opt);
            }
            py::dict out = py::module_::import("json").attr("loads")(to_json(r).dump());
            out["residuals"] = py::array_t<double>(static_cast<py::ssize_t>(r.residuals.size()), r.residuals.data());
            return out;
        },
        py::arg("z"), py::arg("signal"), py::arg("sigma") = py::none(), py::arg("model") = "noon",
        py::arg("photons") = 2, py::arg("p") = 0, py::arg("p_prime") = 2, py::arg("fiber") = FiberMode::from_mfd(5e-6),
        py::arg("wavelength") = 810e-9, py::arg("nominal_waist") = 25e-6, py::arg("weighting") = Weighting::unweighted,
        "Four-parameter (scale, w0, z0, theta) fit of a focal scan; returns the report as a dict.");

    m.def(
        "accidental_correct",
        [](double c, double s1, double s2, double tau) {
            const auto r = accidental_correct(c, s1, s2, tau);
            return py::make_tuple(r.value, r.clamped);
        },
        py::arg("coincidences"), py::arg("singles1"), py::arg("singles2"), py::arg("tau") = 1e-9);
    m.def("read_scan_csv", [](const std::string& path) {
        const ScanCurve s = read_scan_csv_file(path);
        std::vector<double> z, v, sg;
        for (const auto& pt : s.points) {
            z.push_back(pt.z);
            v.push_back(pt.signal);
            sg.push_back(pt.sigma);
        }
        return py::make_tuple(py::array_t<double>(z.size(), z.data()), py::array_t<double>(v.size(), v.data()),
                              s.meta.has_sigma ? py::object(py::array_t<double>(sg.size(), sg.data())) : py::none());
    }, py::arg("path"), "Returns (z, signal, sigma or None).");
}
