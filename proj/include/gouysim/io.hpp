#pragma once

// Text formats: scan and raw-count CSV input, curve/density/CFI CSV output,
// JSON reports for fits and Fisher information.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "gouysim/analysis.hpp"
#include "gouysim/interference.hpp"
#include "gouysim/metrology.hpp"

namespace gouysim {

/// Reads `z_m,signal[,sigma]` (or a `z_m,value` curve export). Lines starting with '#' and blank lines are
/// skipped. Throws ParseError naming the offending line.
ScanCurve read_scan_csv(std::istream& in);
ScanCurve read_scan_csv_file(const std::string& path);

struct RawCountsOptions {
    double tau = 1e-9;
    double step_size = kDefaultPiezoStep;
};

/// Reads `steps,coincidences,singles1,singles2`, applying the accidental
/// correction and the step calibration. Descending step order is reversed.
ScanCurve read_raw_counts_csv(std::istream& in, const RawCountsOptions& options = {});
ScanCurve read_raw_counts_csv_file(const std::string& path, const RawCountsOptions& options = {});

/// Writes a `# gouysim-config: ...` line when `config` is non-empty.
void write_config_comment(std::ostream& out, const std::string& config);

void write_curve_csv(std::ostream& out, const Curve& curve, const std::string& config = {});
void write_density_csv(std::ostream& out, const DensityMap& map, const std::string& config = {});
void write_cfi_csv(std::ostream& out, const Curve& curve, const std::string& config = {});
void write_residuals_csv(std::ostream& out, const ScanCurve& scan, const FitResult& fit,
                         const std::string& config = {});

nlohmann::ordered_json to_json(const FitResult& fit);
nlohmann::ordered_json to_json(const QfiBreakdown& qfi);

std::string to_string(Weighting weighting);

} // namespace gouysim
