#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "biphoton.hpp"
#include "interference.hpp"
#include "optics.hpp"
#include "zernike.hpp"

namespace spdc {

// Thrown for any configuration problem: JSON syntax, schema violations,
// value constraints, unwritable output paths. Messages carry the source
// name plus a line number (syntax) or a field path (semantics).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// One aberration mode as configured: exactly one of pv_um (mirror surface
// peak-to-valley, micrometers) or coeff_rad (phase coefficient, radians).
struct AberrationSpec {
    int n = 0;
    int m = 0;
    std::optional<double> pv_um;
    std::optional<double> coeff_rad;
};

struct SweepSpec {
    int n = 0;
    int m = 0;
    std::vector<double> pv_um;
};

struct ScenarioConfig {
    CrystalParams crystal;
    SetupGeometry geometry;
    std::vector<AberrationSpec> aberration;
    DipModel model = DipModel::InfiniteAperture;
    int tau_points = 201;
    int grid_order = 0;  // 0 means auto
    std::string output = "spdc_run";

    // Optional embedded sweep section so a sweep's metadata sidecar can be
    // re-run as-is.
    std::optional<SweepSpec> sweep;
};

// The measurement scenario from the reference experiment: 405 nm pump,
// 1.5 mm crystal, 200 mm focal length, 12 mm mirror and 8 mm pinhole
// diameters, pinhole 330 mm from the focal plane, infinite-aperture model,
// 201 delay samples, automatic grid order.
ScenarioConfig default_config();

// Renders a config as schema-shaped JSON (the same shape parse_config
// accepts). All numbers are canonicalized to 12 significant digits.
std::string render_config_json(const ScenarioConfig& cfg);

// Parses either a bare config object or a metadata sidecar (an object with
// the config nested under "config"). Unknown keys inside the config are
// rejected; sidecar-only sections (resolved, diagnostics, outputs) are
// ignored. source_name seeds the diagnostics, e.g. a file path.
ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& source_name);

// Everything derived from a config before any kernel evaluation: finalized
// parameter sets (rounded to 12 significant digits so metadata round-trips
// bit-exactly), the mode list as coefficients, the delay grid, and the
// resolved quadrature order.
struct ResolvedScenario {
    CrystalParams crystal;
    SetupGeometry geometry;
    AberrationPhase aberration;
    std::vector<double> coeff_rad;  // per configured mode, after rounding
    std::vector<double> tau;
    GridSpec grid;
    bool grid_order_auto = false;
    DipModel model = DipModel::InfiniteAperture;
};

ResolvedScenario resolve_scenario(const ScenarioConfig& cfg);

struct RunResult {
    std::vector<std::string> files;  // in write order; [0] is the main CSV
    std::vector<std::string> warnings;
};

// Writes <output>_dip.csv plus <output>_dip_meta.json. The sidecar echoes
// the fully resolved config (re-runnable through parse_config) together
// with derived quantities and kernel diagnostics.
RunResult run_dip(const ScenarioConfig& cfg);

// Sweeps a single mode across the given surface peak-to-valley amplitudes.
// The config's own aberration list must be empty. Writes one curve CSV per
// amplitude, an <output>_summary.csv with header
// pv_um,visibility,residual_vs_flat, and a metadata sidecar embedding the
// sweep section.
RunResult run_sweep(const ScenarioConfig& cfg, int n, int m,
                    const std::vector<double>& pv_list_um);

// As above but reading the mode and amplitudes from cfg.sweep.
RunResult run_sweep(const ScenarioConfig& cfg);

struct BatteryRow {
    int n = 0;
    int m = 0;
    bool expect_cancel = false;
};

// Modes the parity argument says must cancel, then the odd modes that must
// visibly distort the dip.
std::vector<BatteryRow> default_battery();

struct CancellationRow {
    BatteryRow mode;
    double residual = 0.0;
    // "pass", "fail", or "inconclusive"
    std::string verdict;
};

struct CancellationOutcome {
    bool failed = false;         // any row conclusively violated
    bool inconclusive = false;   // some effect row below measurability
    std::vector<CancellationRow> rows;
    std::string report;          // the plain-text pass/fail table
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

inline constexpr double kCancelThreshold = 1e-6;
inline constexpr double kEffectThreshold = 1e-3;

// Runs the battery at the given surface peak-to-valley amplitude on the
// infinite-aperture kernel (the regime the parity identity addresses),
// writes <output>_cancel.txt and a metadata sidecar, and reports per-row
// verdicts. An effect row whose residual falls under kEffectThreshold while
// the walk-off phase range across the pupil stays under 2*pi is marked
// "inconclusive: pupil too small" rather than failed.
CancellationOutcome run_cancellation(const ScenarioConfig& cfg,
                                     const std::vector<BatteryRow>& battery =
                                         default_battery(),
                                     double pv_um = 0.5);

// Radial polynomial coefficient table, one line per azimuthal order of the
// same parity as n (or the single given m), integer coefficients from the
// highest power rho^n downward in steps of two.
std::string zernike_table_text(int n, std::optional<int> m);

}  // namespace spdc
