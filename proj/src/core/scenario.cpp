#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "quadrature.hpp"
#include "util.hpp"

namespace spdc {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& src, const std::string& path,
                       const std::string& what) {
    throw ConfigError(src + ": " + path + ": " + what);
}

double take_number(const ojson& v, const std::string& src,
                   const std::string& path) {
    if (!v.is_number()) fail(src, path, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(src, path, "must be finite");
    return round_sig12(d);
}

long long take_integer(const ojson& v, const std::string& src,
                       const std::string& path) {
    if (!v.is_number_integer()) fail(src, path, "expected an integer");
    return v.get<long long>();
}

int take_small_int(const ojson& v, const std::string& src,
                   const std::string& path, long long lo, long long hi) {
    long long x = take_integer(v, src, path);
    if (x < lo || x > hi) {
        fail(src, path,
             "must be between " + std::to_string(lo) + " and " +
                 std::to_string(hi));
    }
    return static_cast<int>(x);
}

void check_keys(const ojson& obj, const std::set<std::string>& allowed,
                const std::string& src, const std::string& path) {
    for (const auto& item : obj.items()) {
        if (allowed.find(item.key()) == allowed.end()) {
            fail(src, path.empty() ? item.key() : path + "." + item.key(),
                 "unknown key");
        }
    }
}

void parse_crystal(const ojson& j, CrystalParams& c, const std::string& src) {
    check_keys(j,
               {"L_mm", "D_ps_per_mm", "M", "lambda_p_nm", "lambda_0_nm",
                "k_p_rad_per_mm", "omega0_rad_per_ps"},
               src, "crystal");
    if (j.contains("L_mm")) c.L = take_number(j["L_mm"], src, "crystal.L_mm");
    if (j.contains("D_ps_per_mm"))
        c.D = take_number(j["D_ps_per_mm"], src, "crystal.D_ps_per_mm");
    if (j.contains("M")) c.M = take_number(j["M"], src, "crystal.M");
    if (j.contains("lambda_p_nm"))
        c.lambda_p = take_number(j["lambda_p_nm"], src, "crystal.lambda_p_nm");
    if (j.contains("lambda_0_nm"))
        c.lambda_0 = take_number(j["lambda_0_nm"], src, "crystal.lambda_0_nm");
    if (j.contains("k_p_rad_per_mm"))
        c.k_p = take_number(j["k_p_rad_per_mm"], src, "crystal.k_p_rad_per_mm");
    if (j.contains("omega0_rad_per_ps"))
        c.Omega0 =
            take_number(j["omega0_rad_per_ps"], src, "crystal.omega0_rad_per_ps");
}

void parse_geometry(const ojson& j, SetupGeometry& g, const std::string& src) {
    check_keys(j,
               {"f_mm", "mirror_radius_mm", "aperture_radius_mm", "d1_mm",
                "k0_rad_per_mm"},
               src, "geometry");
    if (j.contains("f_mm")) g.f = take_number(j["f_mm"], src, "geometry.f_mm");
    if (j.contains("mirror_radius_mm"))
        g.mirror_radius =
            take_number(j["mirror_radius_mm"], src, "geometry.mirror_radius_mm");
    if (j.contains("aperture_radius_mm"))
        g.aperture_radius = take_number(j["aperture_radius_mm"], src,
                                        "geometry.aperture_radius_mm");
    if (j.contains("d1_mm"))
        g.d1 = take_number(j["d1_mm"], src, "geometry.d1_mm");
    if (j.contains("k0_rad_per_mm"))
        g.k0 = take_number(j["k0_rad_per_mm"], src, "geometry.k0_rad_per_mm");
}

AberrationSpec parse_mode(const ojson& j, const std::string& src,
                          const std::string& path) {
    if (!j.is_object()) fail(src, path, "expected an object");
    check_keys(j, {"n", "m", "pv_um", "coeff_rad"}, src, path);
    AberrationSpec spec;
    if (!j.contains("n") || !j.contains("m")) {
        fail(src, path, "mode needs integer fields n and m");
    }
    spec.n = take_small_int(j["n"], src, path + ".n", 0, 1000);
    spec.m = take_small_int(j["m"], src, path + ".m", -1000, 1000);
    if (!zernike_index_valid(spec.n, spec.m)) {
        fail(src, path,
             "invalid Zernike index pair (n=" + std::to_string(spec.n) +
                 ", m=" + std::to_string(spec.m) +
                 "): need |m| <= n, n - |m| even, n within the supported "
                 "order range");
    }
    bool has_pv = j.contains("pv_um");
    bool has_coeff = j.contains("coeff_rad");
    if (has_pv == has_coeff) {
        fail(src, path, "exactly one of pv_um and coeff_rad is required");
    }
    if (has_pv) {
        double pv = take_number(j["pv_um"], src, path + ".pv_um");
        if (pv < 0.0) fail(src, path + ".pv_um", "must be >= 0");
        spec.pv_um = pv;
    } else {
        spec.coeff_rad = take_number(j["coeff_rad"], src, path + ".coeff_rad");
    }
    return spec;
}

SweepSpec parse_sweep(const ojson& j, const std::string& src) {
    if (!j.is_object()) fail(src, "sweep", "expected an object");
    check_keys(j, {"n", "m", "pv_um"}, src, "sweep");
    if (!j.contains("n") || !j.contains("m") || !j.contains("pv_um")) {
        fail(src, "sweep", "needs fields n, m and pv_um");
    }
    SweepSpec s;
    s.n = take_small_int(j["n"], src, "sweep.n", 0, 1000);
    s.m = take_small_int(j["m"], src, "sweep.m", -1000, 1000);
    if (!zernike_index_valid(s.n, s.m)) {
        fail(src, "sweep", "invalid Zernike index pair");
    }
    const ojson& arr = j["pv_um"];
    if (!arr.is_array() || arr.empty()) {
        fail(src, "sweep.pv_um", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        double pv = take_number(arr[i], src,
                                "sweep.pv_um[" + std::to_string(i) + "]");
        if (pv < 0.0) {
            fail(src, "sweep.pv_um[" + std::to_string(i) + "]",
                 "must be >= 0");
        }
        s.pv_um.push_back(pv);
    }
    return s;
}

ojson config_to_json(const ScenarioConfig& cfg) {
    ojson j;
    j["crystal"] = ojson{{"L_mm", round_sig12(cfg.crystal.L)},
                         {"D_ps_per_mm", round_sig12(cfg.crystal.D)},
                         {"M", round_sig12(cfg.crystal.M)},
                         {"lambda_p_nm", round_sig12(cfg.crystal.lambda_p)},
                         {"lambda_0_nm", round_sig12(cfg.crystal.lambda_0)},
                         {"k_p_rad_per_mm", round_sig12(cfg.crystal.k_p)},
                         {"omega0_rad_per_ps", round_sig12(cfg.crystal.Omega0)}};
    j["geometry"] =
        ojson{{"f_mm", round_sig12(cfg.geometry.f)},
              {"mirror_radius_mm", round_sig12(cfg.geometry.mirror_radius)},
              {"aperture_radius_mm", round_sig12(cfg.geometry.aperture_radius)},
              {"d1_mm", round_sig12(cfg.geometry.d1)},
              {"k0_rad_per_mm", round_sig12(cfg.geometry.k0)}};
    ojson modes = ojson::array();
    for (const AberrationSpec& s : cfg.aberration) {
        ojson m;
        m["n"] = s.n;
        m["m"] = s.m;
        if (s.pv_um) m["pv_um"] = round_sig12(*s.pv_um);
        if (s.coeff_rad) m["coeff_rad"] = round_sig12(*s.coeff_rad);
        modes.push_back(m);
    }
    j["aberration"] = modes;
    j["model"] =
        cfg.model == DipModel::FiniteAperture ? "finite" : "infinite";
    j["tau_points"] = cfg.tau_points;
    if (cfg.grid_order == 0) {
        j["grid_order"] = "auto";
    } else {
        j["grid_order"] = cfg.grid_order;
    }
    j["output"] = cfg.output;
    if (cfg.sweep) {
        ojson s;
        s["n"] = cfg.sweep->n;
        s["m"] = cfg.sweep->m;
        ojson pv = ojson::array();
        for (double v : cfg.sweep->pv_um) pv.push_back(round_sig12(v));
        s["pv_um"] = pv;
        j["sweep"] = s;
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << body;
    out.flush();
    if (!out) throw ConfigError("failed writing output file: " + path);
}

std::string curve_csv(const DipCurve& curve) {
    std::string body = "tau_ps,rate,rate_normalized\n";
    for (std::size_t i = 0; i < curve.tau.size(); ++i) {
        body += format_sig12(curve.tau[i]);
        body += ',';
        body += format_sig12(curve.rate[i]);
        body += ',';
        body += format_sig12(curve.rate[i] / curve.r0);
        body += '\n';
    }
    return body;
}

ojson diag_to_json(const KernelDiagnostics& diag, DipModel model) {
    ojson d;
    d["im_w_max"] = round_sig12(diag.im_w_max);
    d["grid_order"] = diag.grid_order;
    d["min_order_required"] = diag.min_order_required;
    d["warnings"] = diag.warnings;
    if (model == DipModel::FiniteAperture) {
        d["radial_nodes"] = diag.radial_nodes;
        d["angular_nodes"] = diag.angular_nodes;
        d["chord_order"] = diag.chord_order;
        d["u_max_rad_per_mm"] = round_sig12(diag.u_max);
    }
    return d;
}

// The config echoed into metadata carries every derived quantity filled in,
// so running the sidecar through parse_config reproduces the run exactly.
ScenarioConfig echo_config(const ScenarioConfig& cfg,
                           const ResolvedScenario& rs) {
    ScenarioConfig echo = cfg;
    echo.crystal = rs.crystal;
    echo.geometry = rs.geometry;
    echo.grid_order = rs.grid.order;
    return echo;
}

ojson resolved_to_json(const ResolvedScenario& rs) {
    ojson r;
    r["grid_order"] = rs.grid.order;
    r["grid_order_source"] = rs.grid_order_auto ? "auto" : "config";
    r["scheme"] = "gauss-legendre";
    r["domain_radius_rad_per_mm"] = round_sig12(rs.grid.radius);
    r["pupil_wavevector_rad_per_mm"] =
        round_sig12(rs.geometry.pupil_wavevector());
    r["k_p_rad_per_mm"] = round_sig12(rs.crystal.k_p);
    r["omega0_rad_per_ps"] = round_sig12(rs.crystal.Omega0);
    r["k0_rad_per_mm"] = round_sig12(rs.geometry.k0);
    r["dip_width_ps"] = round_sig12(rs.crystal.dip_width());
    r["tau_points"] = static_cast<int>(rs.tau.size());
    ojson coeffs = ojson::array();
    for (double c : rs.coeff_rad) coeffs.push_back(round_sig12(c));
    r["coeff_rad"] = coeffs;
    return r;
}

void merge_warnings(std::vector<std::string>& into,
                    const std::vector<std::string>& from) {
    for (const std::string& w : from) {
        bool seen = false;
        for (const std::string& have : into) {
            if (have == w) {
                seen = true;
                break;
            }
        }
        if (!seen) into.push_back(w);
    }
}

std::string mode_label(int n, int m) {
    return "(" + std::to_string(n) + "," + std::to_string(m) + ")";
}

}  // namespace

ScenarioConfig default_config() { return ScenarioConfig{}; }

std::string render_config_json(const ScenarioConfig& cfg) {
    return config_to_json(cfg).dump(2) + "\n";
}

ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& source_name) {
    const std::string& src = source_name;
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(src + ": " + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError(src + ": top level must be a JSON object");
    }
    // A metadata sidecar nests the config; sibling sections are informative
    // only and are skipped here.
    if (root.contains("config")) {
        if (!root["config"].is_object()) {
            throw ConfigError(src + ": config: expected an object");
        }
        root = root["config"];
    }
    check_keys(root,
               {"crystal", "geometry", "aberration", "model", "tau_points",
                "grid_order", "output", "sweep"},
               src, "");

    ScenarioConfig cfg;
    if (root.contains("crystal")) {
        if (!root["crystal"].is_object()) {
            fail(src, "crystal", "expected an object");
        }
        parse_crystal(root["crystal"], cfg.crystal, src);
    }
    if (root.contains("geometry")) {
        if (!root["geometry"].is_object()) {
            fail(src, "geometry", "expected an object");
        }
        parse_geometry(root["geometry"], cfg.geometry, src);
    }
    if (root.contains("aberration")) {
        const ojson& arr = root["aberration"];
        if (!arr.is_array()) fail(src, "aberration", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg.aberration.push_back(parse_mode(
                arr[i], src, "aberration[" + std::to_string(i) + "]"));
        }
    }
    if (root.contains("model")) {
        if (!root["model"].is_string()) {
            fail(src, "model", "expected \"finite\" or \"infinite\"");
        }
        std::string m = root["model"].get<std::string>();
        if (m == "finite") {
            cfg.model = DipModel::FiniteAperture;
        } else if (m == "infinite") {
            cfg.model = DipModel::InfiniteAperture;
        } else {
            fail(src, "model", "expected \"finite\" or \"infinite\"");
        }
    }
    if (root.contains("tau_points")) {
        cfg.tau_points =
            take_small_int(root["tau_points"], src, "tau_points", 3, 10000000);
    }
    if (root.contains("grid_order")) {
        const ojson& go = root["grid_order"];
        if (go.is_string()) {
            if (go.get<std::string>() != "auto") {
                fail(src, "grid_order", "expected \"auto\" or an integer >= 8");
            }
            cfg.grid_order = 0;
        } else {
            cfg.grid_order =
                take_small_int(go, src, "grid_order", 8, 1000000);
        }
    }
    if (root.contains("output")) {
        if (!root["output"].is_string() ||
            root["output"].get<std::string>().empty()) {
            fail(src, "output", "expected a nonempty string");
        }
        cfg.output = root["output"].get<std::string>();
    }
    if (root.contains("sweep")) {
        cfg.sweep = parse_sweep(root["sweep"], src);
    }

    // Cross-parameter physics constraints surface here too, so a rejected
    // config always names its defect at parse time.
    try {
        resolve_scenario(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(src + ": " + e.what());
    }
    return cfg;
}

ResolvedScenario resolve_scenario(const ScenarioConfig& cfg) {
    ResolvedScenario rs;
    try {
        rs.crystal = cfg.crystal;
        rs.crystal.finalize();
        rs.crystal.k_p = round_sig12(rs.crystal.k_p);
        rs.crystal.Omega0 = round_sig12(rs.crystal.Omega0);
        rs.crystal.validate();
        rs.geometry = cfg.geometry;
        rs.geometry.finalize(rs.crystal);
        rs.geometry.k0 = round_sig12(rs.geometry.k0);
        rs.geometry.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    }

    std::vector<ZernikeMode> modes;
    for (const AberrationSpec& s : cfg.aberration) {
        if (!zernike_index_valid(s.n, s.m)) {
            throw ConfigError("aberration: invalid Zernike index pair " +
                              mode_label(s.n, s.m));
        }
        if (s.pv_um.has_value() == s.coeff_rad.has_value()) {
            throw ConfigError("aberration: mode " + mode_label(s.n, s.m) +
                              " needs exactly one of pv_um and coeff_rad");
        }
        double coeff = 0.0;
        if (s.pv_um) {
            double pv = round_sig12(*s.pv_um);
            if (!(pv >= 0.0) || !std::isfinite(pv)) {
                throw ConfigError("aberration: pv_um must be >= 0 for mode " +
                                  mode_label(s.n, s.m));
            }
            coeff = pv_to_coeff(pv * 1e-3, s.n, s.m, rs.geometry.k0);
        } else {
            coeff = *s.coeff_rad;
            if (!std::isfinite(coeff)) {
                throw ConfigError("aberration: coeff_rad must be finite for "
                                  "mode " +
                                  mode_label(s.n, s.m));
            }
        }
        coeff = round_sig12(coeff);
        rs.coeff_rad.push_back(coeff);
        modes.push_back(ZernikeMode{s.n, s.m, coeff});
    }
    try {
        rs.aberration = AberrationPhase(modes);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("aberration: ") + e.what());
    }

    if (cfg.tau_points < 3) {
        throw ConfigError("tau_points must be >= 3");
    }
    double dl = rs.crystal.dip_width();
    rs.tau.reserve(static_cast<std::size_t>(cfg.tau_points));
    for (int i = 0; i < cfg.tau_points; ++i) {
        rs.tau.push_back(dl * static_cast<double>(i) /
                         static_cast<double>(cfg.tau_points - 1));
    }

    rs.model = cfg.model;
    double radius = default_domain_radius(rs.geometry);
    int order = cfg.grid_order;
    if (order == 0) {
        rs.grid_order_auto = true;
        if (cfg.model == DipModel::InfiniteAperture) {
            order = min_order_for(dl, rs.geometry, rs.crystal, radius);
        } else {
            // The pair-coordinate evaluator resolves its own sum-coordinate
            // grid; this order only drives the difference axes.
            order = 48;
        }
    } else if (order < 8) {
        throw ConfigError("grid_order must be >= 8 or \"auto\"");
    }
    rs.grid = GridSpec{radius, order, QuadScheme::GaussLegendre};
    try {
        rs.grid.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    return rs;
}

RunResult run_dip(const ScenarioConfig& cfg) {
    ResolvedScenario rs = resolve_scenario(cfg);
    DipCurve curve = dip_curve(rs.tau, rs.aberration, rs.geometry, rs.crystal,
                               rs.grid, rs.model);

    std::string csv_path = cfg.output + "_dip.csv";
    std::string meta_path = cfg.output + "_dip_meta.json";

    ojson meta;
    meta["config"] = config_to_json(echo_config(cfg, rs));
    meta["resolved"] = resolved_to_json(rs);
    meta["diagnostics"] = diag_to_json(curve.diag, rs.model);
    meta["outputs"] = std::vector<std::string>{csv_path};

    write_text_file(csv_path, curve_csv(curve));
    write_text_file(meta_path, meta.dump(2) + "\n");

    RunResult res;
    res.files = {csv_path, meta_path};
    res.warnings = curve.diag.warnings;
    return res;
}

RunResult run_sweep(const ScenarioConfig& cfg, int n, int m,
                    const std::vector<double>& pv_list_um) {
    if (!cfg.aberration.empty()) {
        throw ConfigError(
            "sweep: the config aberration list must be empty (the swept mode "
            "replaces it)");
    }
    if (!zernike_index_valid(n, m)) {
        throw ConfigError("sweep: invalid Zernike index pair " +
                          mode_label(n, m));
    }
    if (pv_list_um.empty()) {
        throw ConfigError("sweep: pv_um list must be nonempty");
    }
    std::vector<double> pv_list;
    for (double pv : pv_list_um) {
        if (!std::isfinite(pv) || pv < 0.0) {
            throw ConfigError("sweep: pv_um values must be >= 0");
        }
        pv_list.push_back(round_sig12(pv));
    }

    ResolvedScenario rs = resolve_scenario(cfg);
    DipCurve flat = dip_curve(rs.tau, AberrationPhase{}, rs.geometry,
                              rs.crystal, rs.grid, rs.model);

    RunResult res;
    merge_warnings(res.warnings, flat.diag.warnings);

    std::string summary = "pv_um,visibility,residual_vs_flat\n";
    ojson diags = ojson::array();
    {
        ojson d = diag_to_json(flat.diag, rs.model);
        d["curve"] = "flat";
        diags.push_back(d);
    }

    std::vector<std::string> csv_paths;
    std::vector<std::pair<std::string, std::string>> bodies;
    for (std::size_t i = 0; i < pv_list.size(); ++i) {
        double pv = pv_list[i];
        double coeff =
            round_sig12(pv_to_coeff(pv * 1e-3, n, m, rs.geometry.k0));
        AberrationPhase ab({ZernikeMode{n, m, coeff}});
        DipCurve curve = dip_curve(rs.tau, ab, rs.geometry, rs.crystal,
                                   rs.grid, rs.model);
        DipMetrics met = dip_metrics(curve, flat);

        char idx[24];
        std::snprintf(idx, sizeof(idx), "%02u", static_cast<unsigned>(i));
        std::string path = cfg.output + "_amp" + idx + ".csv";
        csv_paths.push_back(path);
        bodies.emplace_back(path, curve_csv(curve));

        summary += format_sig12(pv) + "," + format_sig12(met.visibility) +
                   "," + format_sig12(met.residual_vs_flat) + "\n";

        ojson d = diag_to_json(curve.diag, rs.model);
        d["curve"] = "pv_um " + format_sig12(pv);
        d["coeff_rad"] = round_sig12(coeff);
        diags.push_back(d);
        merge_warnings(res.warnings, curve.diag.warnings);
    }

    std::string summary_path = cfg.output + "_summary.csv";
    std::string meta_path = cfg.output + "_sweep_meta.json";

    ScenarioConfig echo = echo_config(cfg, rs);
    echo.sweep = SweepSpec{n, m, pv_list};

    ojson meta;
    meta["config"] = config_to_json(echo);
    meta["resolved"] = resolved_to_json(rs);
    meta["diagnostics"] = diags;
    std::vector<std::string> outputs = csv_paths;
    outputs.push_back(summary_path);
    meta["outputs"] = outputs;

    for (const auto& [path, body] : bodies) write_text_file(path, body);
    write_text_file(summary_path, summary);
    write_text_file(meta_path, meta.dump(2) + "\n");

    res.files = csv_paths;
    res.files.push_back(summary_path);
    res.files.push_back(meta_path);
    return res;
}

RunResult run_sweep(const ScenarioConfig& cfg) {
    if (!cfg.sweep) {
        throw ConfigError(
            "sweep: config has no sweep section and no mode was given");
    }
    return run_sweep(cfg, cfg.sweep->n, cfg.sweep->m, cfg.sweep->pv_um);
}

std::vector<BatteryRow> default_battery() {
    return {{2, 0, true},  {2, 2, true},  {2, -2, true},
            {4, 0, true},  {4, 4, true},  {1, 1, false},
            {3, 1, false}, {3, -1, false}, {3, 3, false}};
}

CancellationOutcome run_cancellation(const ScenarioConfig& cfg,
                                     const std::vector<BatteryRow>& battery,
                                     double pv_um) {
    if (!cfg.aberration.empty()) {
        throw ConfigError(
            "cancel-test: the config aberration list must be empty (battery "
            "modes replace it)");
    }
    if (battery.empty()) {
        throw ConfigError("cancel-test: battery must be nonempty");
    }
    if (!std::isfinite(pv_um) || pv_um < 0.0) {
        throw ConfigError("cancel-test: pv_um must be >= 0");
    }
    pv_um = round_sig12(pv_um);

    // The parity statement under test concerns the large-aperture kernel;
    // the battery always runs on it, whatever the config's model says.
    ScenarioConfig icfg = cfg;
    icfg.model = DipModel::InfiniteAperture;
    ResolvedScenario rs = resolve_scenario(icfg);

    DipCurve flat = dip_curve(rs.tau, AberrationPhase{}, rs.geometry,
                              rs.crystal, rs.grid, rs.model);

    CancellationOutcome out;
    merge_warnings(out.warnings, flat.diag.warnings);

    // Walk-off phase span across the integration domain at the dip center;
    // below one full cycle the kernel cannot see an odd aberration, so a
    // silent odd mode proves nothing.
    double span = (2.0 * rs.crystal.M / rs.crystal.D) *
                  (rs.crystal.dip_width() / 2.0) * (2.0 * rs.grid.radius);

    std::string table;
    std::vector<std::string> failed_modes;
    for (const BatteryRow& row : battery) {
        if (!zernike_index_valid(row.n, row.m)) {
            throw ConfigError("cancel-test: invalid Zernike index pair " +
                              mode_label(row.n, row.m));
        }
        double coeff = round_sig12(
            pv_to_coeff(pv_um * 1e-3, row.n, row.m, rs.geometry.k0));
        AberrationPhase ab({ZernikeMode{row.n, row.m, coeff}});
        DipCurve curve = dip_curve(rs.tau, ab, rs.geometry, rs.crystal,
                                   rs.grid, rs.model);
        DipMetrics met = dip_metrics(curve, flat);
        merge_warnings(out.warnings, curve.diag.warnings);

        CancellationRow r;
        r.mode = row;
        r.residual = met.residual_vs_flat;
        if (row.expect_cancel) {
            r.verdict = met.residual_vs_flat < kCancelThreshold ? "pass"
                                                                : "fail";
        } else if (met.residual_vs_flat > kEffectThreshold) {
            r.verdict = "pass";
        } else if (span < 2.0 * kPi) {
            r.verdict = "inconclusive";
            out.inconclusive = true;
            out.warnings.push_back(
                "inconclusive: pupil too small to resolve mode " +
                mode_label(row.n, row.m) + " (walk-off phase span " +
                format_sig12(span) + " rad < 2 pi)");
        } else {
            r.verdict = "fail";
        }
        if (r.verdict == "fail") {
            out.failed = true;
            failed_modes.push_back(mode_label(row.n, row.m));
        }

        table += mode_label(row.n, row.m) + "  " +
                 (row.expect_cancel ? "cancel" : "effect") + "  residual " +
                 format_sig12(met.residual_vs_flat) + "  threshold " +
                 (row.expect_cancel ? "< " + format_sig12(kCancelThreshold)
                                    : "> " + format_sig12(kEffectThreshold)) +
                 "  " + r.verdict + "\n";
        out.rows.push_back(r);
    }

    std::string report;
    report += "two-photon aberration cancellation battery\n";
    report += "pv " + format_sig12(pv_um) +
              " um, infinite-aperture kernel, grid order " +
              std::to_string(rs.grid.order) + ", " +
              std::to_string(rs.tau.size()) + " delay samples\n";
    report += "mode  expectation  residual_vs_flat  threshold  verdict\n";
    report += table;
    if (out.failed) {
        report += "result: FAIL (";
        for (std::size_t i = 0; i < failed_modes.size(); ++i) {
            if (i) report += ", ";
            report += failed_modes[i];
        }
        report += ")\n";
    } else if (out.inconclusive) {
        report += "result: PASS (inconclusive: pupil too small)\n";
    } else {
        report += "result: PASS\n";
    }
    out.report = report;

    std::string report_path = cfg.output + "_cancel.txt";
    std::string meta_path = cfg.output + "_cancel_meta.json";

    ojson meta;
    meta["config"] = config_to_json(echo_config(icfg, rs));
    meta["resolved"] = resolved_to_json(rs);
    ojson rows = ojson::array();
    for (const CancellationRow& r : out.rows) {
        rows.push_back(ojson{{"n", r.mode.n},
                             {"m", r.mode.m},
                             {"expectation",
                              r.mode.expect_cancel ? "cancel" : "effect"},
                             {"residual_vs_flat", round_sig12(r.residual)},
                             {"verdict", r.verdict}});
    }
    meta["battery"] = rows;
    meta["pv_um"] = pv_um;
    meta["warnings"] = out.warnings;
    meta["outputs"] = std::vector<std::string>{report_path};

    write_text_file(report_path, report);
    write_text_file(meta_path, meta.dump(2) + "\n");
    out.files = {report_path, meta_path};
    return out;
}

std::string zernike_table_text(int n, std::optional<int> m) {
    std::vector<int> ms;
    if (m) {
        if (!zernike_index_valid(n, *m)) {
            throw ConfigError("zernike-table: invalid index pair " +
                              mode_label(n, *m));
        }
        ms.push_back(*m);
    } else {
        if (n < 0 || !zernike_index_valid(n, n)) {
            throw ConfigError("zernike-table: invalid radial order " +
                              std::to_string(n));
        }
        for (int mm = n % 2; mm <= n; mm += 2) ms.push_back(mm);
    }
    std::string text =
        "# radial polynomial coefficients, highest power rho^n first, "
        "descending by 2\n";
    for (int mm : ms) {
        std::vector<std::int64_t> coeffs = radial_coefficients(n, mm);
        text += "n=" + std::to_string(n) + " m=" + std::to_string(mm) + ":";
        for (std::int64_t c : coeffs) {
            text += " " + std::to_string(c);
        }
        text += "\n";
    }
    return text;
}

}  // namespace spdc
