// Acceptance battery. Each criterion prints exactly one PASS/FAIL line with
// the measured numbers; the process exit status is the number of failures,
// so a zero exit means the full battery holds.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "interference.hpp"
#include "quadrature.hpp"
#include "scenario.hpp"
#include "util.hpp"
#include "zernike.hpp"

#ifndef ACCEPT_CLI_PATH
#define ACCEPT_CLI_PATH "spdcsim"
#endif

using namespace spdc;
namespace fs = std::filesystem;

namespace {

struct Setup {
    CrystalParams c;
    SetupGeometry g;
    double R = 0.0;
    double dl = 0.0;
};

Setup make_setup(double mirror_radius = 6.0, double d1 = 330.0) {
    Setup s;
    s.c.finalize();
    s.g.mirror_radius = mirror_radius;
    s.g.d1 = d1;
    s.g.finalize(s.c);
    s.R = default_domain_radius(s.g);
    s.dl = s.c.dip_width();
    return s;
}

std::vector<double> tau_grid(double dl, int n) {
    std::vector<double> tau;
    tau.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        tau.push_back(dl * static_cast<double>(i) /
                      static_cast<double>(n - 1));
    }
    return tau;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out + "}";
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Shared between criteria 1 and 2: both run on the stock scenario.
struct StockContext {
    Setup s;
    GridSpec grid;
    std::vector<double> tau;
    DipCurve flat;
    double even_max = 0.0;
};

double mode_residual(const StockContext& ctx, int n, int m, double pv_um) {
    double coeff = pv_to_coeff(pv_um * 1e-3, n, m, ctx.s.g.k0);
    AberrationPhase ab({{n, m, coeff}});
    DipCurve curve = dip_curve(ctx.tau, ab, ctx.s.g, ctx.s.c, ctx.grid,
                               DipModel::InfiniteAperture);
    return dip_metrics(curve, ctx.flat).residual_vs_flat;
}

bool criterion1(StockContext& ctx, std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    ctx.s = make_setup();
    int order = min_order_for(ctx.s.dl, ctx.s.g, ctx.s.c, ctx.s.R);
    ctx.grid = GridSpec{ctx.s.R, order, QuadScheme::GaussLegendre};
    ctx.tau = tau_grid(ctx.s.dl, 201);
    ctx.flat = dip_curve(ctx.tau, {}, ctx.s.g, ctx.s.c, ctx.grid,
                         DipModel::InfiniteAperture);

    const int modes[5][2] = {{2, 0}, {2, 2}, {2, -2}, {4, 0}, {4, 4}};
    const double pvs[4] = {0.2, 0.4, 0.6, 0.8};
    double worst = 0.0;
    for (const auto& nm : modes) {
        for (double pv : pvs) {
            worst = std::max(worst, mode_residual(ctx, nm[0], nm[1], pv));
        }
    }
    ctx.even_max = worst;
    bool pass = worst < 1e-6;
    line = "even-mode cancellation; max residual " + fmt(worst) +
           " over 5 modes x 4 amplitudes (threshold 1e-06); grid order " +
           std::to_string(ctx.grid.order) + "; " + fmt(elapsed_s(t0)) + " s";
    return pass;
}

bool criterion2(const StockContext& ctx, std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    const double pvs[4] = {0.2, 0.4, 0.6, 0.75};
    bool ratio_ok = true;
    bool increasing = true;
    std::vector<double> shown;
    for (int m : {1, -1}) {
        std::vector<double> res;
        for (double pv : pvs) res.push_back(mode_residual(ctx, 3, m, pv));
        if (m == 1) shown = res;
        if (!(res.back() > 0.0 && res.back() >= 1e3 * ctx.even_max)) {
            ratio_ok = false;
        }
        for (std::size_t i = 1; i < res.size(); ++i) {
            if (!(res[i] > res[i - 1])) increasing = false;
        }
    }
    bool pass = ratio_ok && increasing;
    line = "odd-mode distortion; coma residuals " + fmt_list(shown) +
           " over pv {0.2, 0.4, 0.6, 0.75} um; >= 1000x even max: " +
           (ratio_ok ? "yes" : "no") +
           "; strictly increasing: " + (increasing ? "yes" : "no") + "; " +
           fmt(elapsed_s(t0)) + " s";
    return pass;
}

bool criterion3(std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    Setup s = make_setup(0.5);
    int order = min_order_for(s.dl, s.g, s.c, s.R);
    GridSpec grid{s.R, order, QuadScheme::GaussLegendre};
    std::vector<double> tau = tau_grid(s.dl, 201);
    DipCurve flat =
        dip_curve(tau, {}, s.g, s.c, grid, DipModel::InfiniteAperture);

    double dev = 0.0;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        double alpha = 1.0 - 2.0 * tau[i] / s.dl;
        double tri = 1.0 - std::max(0.0, 1.0 - std::abs(alpha));
        dev = std::max(dev, std::abs(flat.rate[i] - tri));
        if (flat.rate[i] < flat.rate[argmin]) argmin = i;
    }
    double step = s.dl / 200.0;
    bool min_ok = std::abs(tau[argmin] - s.dl / 2.0) <= step;
    bool pass = dev <= 0.01 && min_ok;
    line = "narrow-pupil triangle dip; max deviation " + fmt(dev) +
           " (tolerance 0.01); minimum at " + fmt(tau[argmin]) +
           " ps (want 0.1365 within one step); grid order " +
           std::to_string(order) + "; " + fmt(elapsed_s(t0)) + " s";
    return pass;
}

bool criterion4(std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    Setup s = make_setup(6.0, 0.0);
    GridSpec grid{s.R, 24, QuadScheme::GaussLegendre};
    std::vector<double> tau = tau_grid(s.dl, 21);
    std::vector<std::complex<double>> wi =
        w_m_infinite_batch(tau, {}, s.g, s.c, grid);

    std::vector<double> dist;
    for (double ra : {1.0, 2.0, 4.0, 8.0}) {
        SetupGeometry ga = s.g;
        ga.aperture_radius = ra;
        ga.finalize(s.c);
        std::vector<std::complex<double>> wf =
            w_m_full_batch(tau, {}, ga, s.c, grid);
        double d = 0.0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            d = std::max(d, std::abs(wf[i] - wi[i]));
        }
        dist.push_back(d);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dist.size(); ++i) {
        if (!(dist[i] < dist[i - 1])) monotone = false;
    }
    bool pass = monotone && dist.back() < 0.02;
    line = "aperture-model convergence; kernel distance " + fmt_list(dist) +
           " at apertures {1, 2, 4, 8} mm; decreasing: " +
           (monotone ? "yes" : "no") + "; " + fmt(dist.back()) +
           " < 0.02 at 8 mm: " + (dist.back() < 0.02 ? "yes" : "no") + "; " +
           fmt(elapsed_s(t0)) + " s";
    return pass;
}

bool criterion5(const StockContext& ctx, std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    double worst_scheme = 0.0;
    double worst_refine = 0.0;

    std::vector<AberrationPhase> scenarios;
    scenarios.push_back(AberrationPhase{});
    scenarios.push_back(AberrationPhase(
        {{2, 2, pv_to_coeff(0.8e-3, 2, 2, ctx.s.g.k0)}}));

    GridSpec trap{ctx.grid.radius, ctx.grid.order,
                  QuadScheme::UniformTrapezoid};
    GridSpec fine{ctx.grid.radius, 2 * ctx.grid.order,
                  QuadScheme::GaussLegendre};
    for (const AberrationPhase& ab : scenarios) {
        std::vector<std::complex<double>> wg =
            w_m_infinite_batch(ctx.tau, ab, ctx.s.g, ctx.s.c, ctx.grid);
        std::vector<std::complex<double>> wt =
            w_m_infinite_batch(ctx.tau, ab, ctx.s.g, ctx.s.c, trap);
        std::vector<std::complex<double>> wf =
            w_m_infinite_batch(ctx.tau, ab, ctx.s.g, ctx.s.c, fine);
        double scale = 0.0;
        for (const auto& w : wg) scale = std::max(scale, std::abs(w));
        for (std::size_t i = 0; i < wg.size(); ++i) {
            worst_scheme =
                std::max(worst_scheme, std::abs(wg[i] - wt[i]) / scale);
            worst_refine =
                std::max(worst_refine, std::abs(wg[i] - wf[i]) / scale);
        }
    }
    bool pass = worst_scheme < 1e-6 && worst_refine < 1e-6;
    line = "quadrature scheme agreement; Gauss-Legendre vs trapezoid rel " +
           fmt(worst_scheme) + "; order doubling rel " + fmt(worst_refine) +
           " (threshold 1e-06, flat and astigmatic scenarios); " +
           fmt(elapsed_s(t0)) + " s";
    return pass;
}

bool criterion6(std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(20260816u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    std::uniform_int_distribution<int> norder(0, 12);
    std::uniform_int_distribution<int> count(1, 4);

    double parity_err = 0.0;
    const int kSamples = 1000;
    for (int trial = 0; trial < kSamples; ++trial) {
        std::vector<ZernikeMode> all;
        std::vector<ZernikeMode> odd;
        std::set<std::pair<int, int>> used;
        int k = count(rng);
        while (static_cast<int>(all.size()) < k) {
            int n = norder(rng);
            std::uniform_int_distribution<int> half(0, n / 2);
            int am = n - 2 * half(rng);
            int m = (am != 0 && unit(rng) < 0.5) ? -am : am;
            if (!used.insert({n, m}).second) continue;
            ZernikeMode mode{n, m, amp(rng)};
            all.push_back(mode);
            if (am % 2 == 1) odd.push_back(mode);
        }
        AberrationPhase full(all);
        AberrationPhase odd_part(odd);

        double r = std::sqrt(unit(rng));
        double th = 2.0 * kPi * unit(rng);
        double x = r * std::cos(th);
        double y = r * std::sin(th);
        double diff = phase_map(full, x, y, 1.0) - phase_map(full, -x, -y, 1.0);
        double want = 2.0 * phase_map(odd_part, x, y, 1.0);
        parity_err = std::max(parity_err, std::abs(diff - want));
    }

    double boundary_err = 0.0;
    std::uniform_int_distribution<int> nfull(0, 47);
    for (int trial = 0; trial < kSamples; ++trial) {
        int n = nfull(rng);
        std::uniform_int_distribution<int> half(0, n / 2);
        int am = n - 2 * half(rng);
        int m = (am != 0 && unit(rng) < 0.5) ? -am : am;
        boundary_err =
            std::max(boundary_err, std::abs(radial_poly(n, m, 1.0) - 1.0));
    }

    bool pass = parity_err <= 1e-12 && boundary_err <= 1e-12;
    line = "parity and boundary identities; " + std::to_string(kSamples) +
           " parity samples max err " + fmt(parity_err) + "; " +
           std::to_string(kSamples) + " boundary samples max err " +
           fmt(boundary_err) + " (threshold 1e-12); " + fmt(elapsed_s(t0)) +
           " s";
    return pass;
}

int run_cli(const std::string& args) {
    std::string cmd =
        std::string(ACCEPT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

bool criterion7(std::string& line) {
    auto t0 = std::chrono::steady_clock::now();
    fs::path dir = fs::temp_directory_path() / "spdc_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string base1 = (dir / "run1").string();
    std::string cfg_path = (dir / "cfg.json").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << "{\"tau_points\": 21, \"grid_order\": 64, \"output\": \""
            << base1 << "\"}\n";
    }

    bool dip1 = run_cli("dip --config " + cfg_path) == 0;
    std::string curve = read_file(base1 + "_dip.csv");
    std::string base2 = (dir / "run2").string();
    bool dip2 = run_cli("dip --config " + base1 + "_dip_meta.json --out " +
                        base2) == 0;
    bool dip_same = !curve.empty() && read_file(base2 + "_dip.csv") == curve;

    std::string sw1 = (dir / "sw1").string();
    bool sweep1 = run_cli("sweep --config " + cfg_path + " --out " + sw1 +
                          " --mode 2,2 --pv 0,0.2") == 0;
    std::string summary = read_file(sw1 + "_summary.csv");
    std::string sw2 = (dir / "sw2").string();
    bool sweep2 = run_cli("sweep --config " + sw1 + "_sweep_meta.json --out " +
                          sw2) == 0;
    bool sweep_same =
        !summary.empty() && read_file(sw2 + "_summary.csv") == summary;

    bool cancel = run_cli("cancel-test --out " + (dir / "bat").string()) == 0;

    bool pass = dip1 && dip2 && dip_same && sweep1 && sweep2 && sweep_same &&
                cancel;
    line = std::string("end-to-end determinism; dip rerun byte-identical: ") +
           (dip_same ? "yes" : "no") +
           "; sweep rerun byte-identical: " + (sweep_same ? "yes" : "no") +
           "; cancel-test exit 0: " + (cancel ? "yes" : "no") + "; " +
           fmt(elapsed_s(t0)) + " s";
    return pass;
}

}  // namespace

int main() {
    int failures = 0;
    StockContext ctx;

    struct Entry {
        int id;
        bool pass;
        std::string line;
    };
    std::vector<Entry> results;

    auto run = [&](int id, auto&& fn) {
        std::string line;
        bool pass = false;
        try {
            pass = fn(line);
        } catch (const std::exception& e) {
            line = std::string("exception: ") + e.what();
        }
        results.push_back({id, pass, line});
        if (!pass) ++failures;
        std::printf("criterion %d: %s - %s\n", id, pass ? "PASS" : "FAIL",
                    line.c_str());
        std::fflush(stdout);
    };

    run(1, [&](std::string& line) { return criterion1(ctx, line); });
    run(2, [&](std::string& line) { return criterion2(ctx, line); });
    run(3, [&](std::string& line) { return criterion3(line); });
    run(4, [&](std::string& line) { return criterion4(line); });
    run(5, [&](std::string& line) { return criterion5(ctx, line); });
    run(6, [&](std::string& line) { return criterion6(line); });
    run(7, [&](std::string& line) { return criterion7(line); });

    std::printf("%d of 7 criteria passed\n",
                static_cast<int>(results.size()) - failures);
    return failures;
}
