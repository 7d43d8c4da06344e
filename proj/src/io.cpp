#include "gouysim/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>
#include <vector>

#include "gouysim/errors.hpp"

namespace gouysim {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* name) {
    T value{};
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    if (!field.empty() && field.front() == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        fail(line_no, std::string("cannot parse ") + name + " '" + std::string(field) + "'");
    }
    return value;
}

struct CsvRows {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

CsvRows read_rows(std::istream& in) {
    CsvRows out;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        std::vector<std::string> fields;
        for (auto f : split(t)) {
            fields.emplace_back(f);
        }
        if (!have_header) {
            out.header = std::move(fields);
            have_header = true;
        } else {
            out.rows.emplace_back(line_no, std::move(fields));
        }
    }
    if (!have_header) {
        throw ParseError("input has no header line");
    }
    return out;
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want) {
    if (got != want) {
        std::string g;
        for (const auto& s : got) {
            g += (g.empty() ? "" : ",") + s;
        }
        std::string w;
        for (const auto& s : want) {
            w += (w.empty() ? "" : ",") + s;
        }
        throw ParseError("unexpected header '" + g + "', expected '" + w + "'");
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    return in;
}

void full_precision(std::ostream& out) { out << std::setprecision(std::numeric_limits<double>::max_digits10); }

} // namespace

ScanCurve read_scan_csv(std::istream& in) {
    const CsvRows csv = read_rows(in);
    const bool has_sigma = csv.header.size() == 3;
    if (has_sigma) {
        expect_header(csv.header, {"z_m", "signal", "sigma"});
    } else if (csv.header != std::vector<std::string>{"z_m", "value"}) {
        // Curve exports (z_m,value) are accepted as unweighted scans.
        expect_header(csv.header, {"z_m", "signal"});
    }
    ScanCurve curve;
    curve.meta.has_sigma = has_sigma;
    for (const auto& [line_no, f] : csv.rows) {
        if (f.size() != csv.header.size()) {
            fail(line_no, "expected " + std::to_string(csv.header.size()) + " fields, got " + std::to_string(f.size()));
        }
        ScanPoint pt;
        pt.z = parse_number<double>(f[0], line_no, "z_m");
        pt.signal = parse_number<double>(f[1], line_no, "signal");
        if (has_sigma) {
            pt.sigma = parse_number<double>(f[2], line_no, "sigma");
            if (pt.sigma < 0.0) {
                fail(line_no, "sigma must be >= 0");
            }
        }
        if (!curve.points.empty() && !(pt.z > curve.points.back().z)) {
            fail(line_no, "z_m must be strictly increasing");
        }
        curve.points.push_back(pt);
    }
    return curve;
}

ScanCurve read_scan_csv_file(const std::string& path) {
    auto in = open_input(path);
    return read_scan_csv(in);
}

ScanCurve read_raw_counts_csv(std::istream& in, const RawCountsOptions& options) {
    const CsvRows csv = read_rows(in);
    expect_header(csv.header, {"steps", "coincidences", "singles1", "singles2"});
    ScanCurve curve;
    std::vector<long long> steps;
    for (const auto& [line_no, f] : csv.rows) {
        if (f.size() != 4) {
            fail(line_no, "expected 4 fields, got " + std::to_string(f.size()));
        }
        const auto s = parse_number<long long>(f[0], line_no, "steps");
        const double c = parse_number<double>(f[1], line_no, "coincidences");
        const double s1 = parse_number<double>(f[2], line_no, "singles1");
        const double s2 = parse_number<double>(f[3], line_no, "singles2");
        if (c < 0.0 || s1 < 0.0 || s2 < 0.0) {
            fail(line_no, "counts must be non-negative");
        }
        const AccidentalResult corrected = accidental_correct(c, s1, s2, options.tau);
        if (corrected.clamped) {
            ++curve.meta.clamped_points;
        }
        steps.push_back(s);
        curve.points.push_back({steps_to_position(s, options.step_size), corrected.value, 0.0});
    }
    const bool descending = std::is_sorted(steps.begin(), steps.end(), std::greater<>());
    if (descending && steps.size() > 1) {
        std::reverse(curve.points.begin(), curve.points.end());
        std::reverse(steps.begin(), steps.end());
    }
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (steps[i] <= steps[i - 1]) {
            fail(csv.rows[descending ? steps.size() - 1 - i : i].first, "steps must be strictly monotone");
        }
    }
    return curve;
}

ScanCurve read_raw_counts_csv_file(const std::string& path, const RawCountsOptions& options) {
    auto in = open_input(path);
    return read_raw_counts_csv(in, options);
}

void write_config_comment(std::ostream& out, const std::string& config) {
    if (!config.empty()) {
        out << "# gouysim-config: " << config << '\n';
    }
}

void write_curve_csv(std::ostream& out, const Curve& curve, const std::string& config) {
    write_config_comment(out, config);
    full_precision(out);
    out << "z_m,value\n";
    for (const auto& s : curve) {
        out << s.z << ',' << s.value << '\n';
    }
}

void write_density_csv(std::ostream& out, const DensityMap& map, const std::string& config) {
    write_config_comment(out, config);
    full_precision(out);
    out << "x_m,y_m,value\n";
    for (std::size_t iy = 0; iy < map.ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
            out << map.xs[ix] << ',' << map.ys[iy] << ',' << map.at(ix, iy) << '\n';
        }
    }
}

void write_cfi_csv(std::ostream& out, const Curve& curve, const std::string& config) {
    write_config_comment(out, config);
    full_precision(out);
    out << "z_m,cfi_per_m2\n";
    for (const auto& s : curve) {
        out << s.z << ',' << s.value << '\n';
    }
}

void write_residuals_csv(std::ostream& out, const ScanCurve& scan, const FitResult& fit, const std::string& config) {
    if (fit.residuals.size() != scan.points.size()) {
        throw ConfigError("residual count does not match the scan");
    }
    write_config_comment(out, config);
    full_precision(out);
    out << "z_m,signal,fitted,residual\n";
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        const auto& pt = scan.points[i];
        out << pt.z << ',' << pt.signal << ',' << pt.signal - fit.residuals[i] << ',' << fit.residuals[i] << '\n';
    }
}

std::string to_string(Weighting weighting) {
    switch (weighting) {
    case Weighting::unweighted:
        return "unweighted";
    case Weighting::sigma:
        return "sigma";
    case Weighting::poisson:
        return "poisson";
    }
    return "unknown";
}

nlohmann::ordered_json to_json(const FitResult& fit) {
    nlohmann::ordered_json j;
    j["scale"] = fit.scale;
    j["w0_m"] = fit.w0;
    j["z0_m"] = fit.z0;
    j["theta_rad"] = fit.theta;
    j["adjusted_r2"] = fit.adjusted_r2;
    j["residual_norm"] = fit.residual_norm;
    nlohmann::ordered_json cov = nlohmann::ordered_json::array();
    for (const auto& row : fit.covariance) {
        cov.push_back(row);
    }
    j["covariance"] = cov;
    j["converged"] = fit.converged;
    j["rank_deficient"] = fit.rank_deficient;
    j["iterations"] = fit.iterations;
    j["weighting"] = to_string(fit.weighting);
    j["message"] = fit.message;
    return j;
}

nlohmann::ordered_json to_json(const QfiBreakdown& qfi) {
    return {{"sql_term", qfi.sql_term}, {"heisenberg_term", qfi.heisenberg_term}, {"total", qfi.total}, {"units", "m^-2"}};
}

} // namespace gouysim
