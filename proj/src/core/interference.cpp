#include "interference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "util.hpp"

namespace spdc {

namespace {

// Aberration phase as pure polynomials in the normalized pupil coordinates:
// R_n^m(rho) cos(m theta) = [R_n^m / rho^m](rho^2) * Re[(x + i y)^m],
// which avoids trig and sqrt in the integration hot loops.
struct PreparedMode {
    std::vector<double> poly; // radial coeffs over rho^2, highest power first
    int abs_m = 0;
    bool use_sin = false;
    double coeff = 0.0;
};

struct PreparedPhase {
    std::vector<PreparedMode> modes;

    bool empty() const { return modes.empty(); }

    double eval(double x, double y, double rho2) const {
        double phi = 0.0;
        for (const auto& m : modes) {
            double radial = 0.0;
            for (double cc : m.poly) radial = radial * rho2 + cc;
            double ang = 1.0;
            if (m.abs_m > 0) {
                double cr = x, ci = y;
                for (int k = 1; k < m.abs_m; ++k) {
                    double nr = cr * x - ci * y;
                    ci = cr * y + ci * x;
                    cr = nr;
                }
                ang = m.use_sin ? ci : cr;
            }
            phi += m.coeff * radial * ang;
        }
        return phi;
    }
};

PreparedPhase prepare(const AberrationPhase& ab) {
    PreparedPhase p;
    for (const auto& mode : ab.modes()) {
        PreparedMode pm;
        pm.abs_m = mode.m < 0 ? -mode.m : mode.m;
        pm.use_sin = mode.m < 0;
        pm.coeff = mode.coeff;
        for (std::int64_t a : radial_coefficients(mode.n, mode.m)) {
            pm.poly.push_back(static_cast<double>(a));
        }
        p.modes.push_back(std::move(pm));
    }
    return p;
}

double max_abs_tau(const std::vector<double>& tau) {
    double m = 0.0;
    for (double t : tau) m = std::max(m, std::abs(t));
    return std::max(m, 1e-9);
}

bool uniform_spacing(const std::vector<double>& tau, double* step) {
    if (tau.size() < 2) {
        *step = 0.0;
        return true;
    }
    double d = tau[1] - tau[0];
    for (std::size_t i = 1; i + 1 < tau.size(); ++i) {
        if (std::abs(tau[i + 1] - tau[i] - d) > 1e-12 * std::max(1.0, std::abs(d))) {
            return false;
        }
    }
    *step = d;
    return true;
}

// Row profile of the large-aperture kernel: the x-contracted pupil product
// per qy node, with axis weights folded in, plus the pupil mass.
struct KernelProfile {
    std::vector<double> qy;
    std::vector<std::complex<double>> gw;
    double n0 = 0.0;
};

KernelProfile build_profile(const AberrationPhase& ab, const SetupGeometry& g,
                            const GridSpec& grid) {
    Axis1D ax = make_axis(grid);
    int n = static_cast<int>(ax.nodes.size());
    PreparedPhase ph = prepare(ab);
    double inv = 1.0 / g.pupil_wavevector();

    KernelProfile prof;
    prof.qy = ax.nodes;
    prof.gw.assign(n, {0.0, 0.0});

    auto compute_row = [&](int j) -> std::pair<std::complex<double>, double> {
        double yh = ax.nodes[j] * inv;
        std::complex<double> acc{0.0, 0.0};
        double mass = 0.0;
        for (int i = 0; i < n; ++i) {
            double xh = ax.nodes[i] * inv;
            double rho2 = xh * xh + yh * yh;
            if (rho2 > 1.0) continue;
            double w = ax.weights[i];
            mass += w;
            if (ph.empty()) {
                acc += w;
            } else {
                double d = ph.eval(-xh, -yh, rho2) - ph.eval(xh, yh, rho2);
                acc += w * std::complex<double>(std::cos(d), std::sin(d));
            }
        }
        return {acc, mass};
    };

    // The grid is mirror-symmetric, so the row at -qy is the exact conjugate
    // of the row at +qy; compute half the rows and reflect.
    for (int j = 0; j < n / 2; ++j) {
        auto [acc, mass] = compute_row(j);
        int jm = n - 1 - j;
        prof.gw[j] = ax.weights[j] * acc;
        prof.gw[jm] = ax.weights[jm] * std::conj(acc);
        prof.n0 += (ax.weights[j] + ax.weights[jm]) * mass;
    }
    if (n % 2 == 1) {
        int mid = n / 2;
        auto [acc, mass] = compute_row(mid);
        prof.gw[mid] = ax.weights[mid] * acc;
        prof.n0 += ax.weights[mid] * mass;
    }
    if (!(prof.n0 > 0.0)) {
        throw std::runtime_error("empty integration region: pupil does not "
                                 "overlap the grid");
    }
    return prof;
}

int round_up8(double x) {
    int v = static_cast<int>(std::ceil(x));
    return ((v + 7) / 8) * 8;
}

}  // namespace

std::vector<std::complex<double>> w_m_infinite_batch(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    KernelDiagnostics* diag) {
    grid.validate();
    KernelProfile prof = build_profile(ab, g, grid);
    double a = 2.0 * c.M / c.D;
    double center = 0.5 * c.dip_width();

    std::vector<std::complex<double>> w(tau.size());
    double im_max = 0.0;
    int n = static_cast<int>(prof.qy.size());
    for (std::size_t t = 0; t < tau.size(); ++t) {
        double tc = tau[t] - center;
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            double th = -a * tc * prof.qy[j];
            acc += prof.gw[j] * std::complex<double>(std::cos(th), std::sin(th));
        }
        w[t] = acc / prof.n0;
        im_max = std::max(im_max, std::abs(w[t].imag()));
    }

    if (diag) {
        diag->im_w_max = std::max(diag->im_w_max, im_max);
        diag->grid_order = grid.order;
        diag->min_order_required =
            min_order_for(max_abs_tau(tau), g, c, grid.radius);
        if (grid.order < diag->min_order_required) {
            diag->warnings.push_back(
                "grid order " + std::to_string(grid.order) +
                " below resolution bound " +
                std::to_string(diag->min_order_required));
        }
    }
    return w;
}

std::complex<double> w_m_infinite(double tau, const AberrationPhase& ab,
                                  const SetupGeometry& g,
                                  const CrystalParams& c, const GridSpec& grid,
                                  KernelDiagnostics* diag) {
    return w_m_infinite_batch({tau}, ab, g, c, grid, diag)[0];
}

namespace detail {

std::vector<std::complex<double>> w_m_full_raw(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    const FullKernelOptions& opt, KernelDiagnostics* diag) {
    grid.validate();
    std::size_t nt = tau.size();
    if (nt == 0) return {};

    double qp = g.pupil_wavevector();
    double r_axis = std::min(grid.radius, qp);   // per-photon per-axis bound
    double q_ext = std::min(std::sqrt(2.0) * r_axis, qp);
    double u_geom = 2.0 * q_ext;
    double b = 2.0 * g.d1 / c.k_p;
    double md = c.M / c.D;
    double ml = c.M * c.L;
    double dl = c.dip_width();
    double center = 0.5 * dl;
    double ra = g.aperture_radius;

    std::vector<double> tc(nt), lam(nt);
    double tc_max = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        tc[t] = tau[t] - center;
        lam[t] = triangular(1.0 - 2.0 * tau[t] / dl);
        tc_max = std::max(tc_max, std::abs(tc[t]));
    }

    // Sum-coordinate reach: geometry-limited, or (with a finite aperture and
    // a propagation phase) truncated where both oscillatory factors have
    // decayed well past their first lobes.
    double u_max = u_geom;
    if (opt.include_aperture && b > 0.0) {
        double u_peak = md * tc_max / b;
        u_max = std::min(u_geom, u_peak + 6.0 * 3.8317 / ra + 20.0);
    }

    double ab_slope = 0.0;
    for (const auto& mode : ab.modes()) {
        ab_slope += mode.n * mode.n * std::abs(mode.coeff) / (2.0 * qp);
    }
    double slope_v = b * u_max + md * tc_max + ab_slope;
    int order_v = std::max({grid.order, 48,
                            static_cast<int>(std::ceil(
                                8.0 * slope_v * 4.0 * r_axis / (2.0 * kPi)))});
    bool capped_v = order_v > 256;
    if (capped_v) order_v = 256;

    double slope_r = b * u_geom;
    if (opt.include_aperture) slope_r += ra;
    if (opt.include_sinc) slope_r += ml;
    int n_r = std::max(96, static_cast<int>(std::ceil(
                               8.0 * u_max * slope_r / (2.0 * kPi))));

    double m_ang = 2.5 * (b * u_max * q_ext +
                          (opt.include_sinc ? ml * u_max : 0.0));
    int n_psi = std::min(256, std::max(64, round_up8(m_ang)));
    bool capped_psi = m_ang > 256.0;

    PreparedPhase ph = prepare(ab);
    double inv = 1.0 / qp;
    bool flat = ph.empty();

    double dtau = 0.0;
    bool uniform = uniform_spacing(tau, &dtau);

    const Axis1D& ref_v = gauss_legendre_reference(order_v);
    std::vector<double> vy(order_v), wy(order_v), vx(order_v);
    std::vector<std::complex<double>> trow(order_v);
    std::vector<std::complex<double>> vt(nt);
    std::vector<std::complex<double>> wraw(nt, {0.0, 0.0});

    auto accumulate_u_node = [&](double ux, double uy, double wu) {
        double y_half = 2.0 * r_axis - std::abs(uy);
        if (y_half <= 0.0) return;
        for (int k = 0; k < order_v; ++k) {
            vy[k] = y_half * ref_v.nodes[k];
            wy[k] = y_half * ref_v.weights[k];
        }
        for (std::size_t t = 0; t < nt; ++t) vt[t] = {0.0, 0.0};

        bool any = false;
        for (int k = 0; k < order_v; ++k) {
            double sy = uy + vy[k];
            double dy = uy - vy[k];
            double s1 = std::sqrt(std::max(0.0, 4.0 * qp * qp - sy * sy));
            double s2 = std::sqrt(std::max(0.0, 4.0 * qp * qp - dy * dy));
            double m1 = std::min(2.0 * r_axis, s1);
            double m2 = std::min(2.0 * r_axis, s2);
            double lo = std::max(-m1 - ux, ux - m2);
            double hi = std::min(m1 - ux, ux + m2);
            if (hi <= lo) {
                trow[k] = {0.0, 0.0};
                continue;
            }
            any = true;
            std::complex<double> chord{0.0, 0.0};
            if (flat && b * ux == 0.0) {
                chord = hi - lo;
            } else {
                double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
                for (int i = 0; i < order_v; ++i) {
                    double v = mid + half * ref_v.nodes[i];
                    double phase = b * ux * v;
                    if (!flat) {
                        double qxp = 0.5 * (ux + v) * inv;
                        double qyp = 0.5 * sy * inv;
                        double qxm = 0.5 * (ux - v) * inv;
                        double qym = 0.5 * dy * inv;
                        phase += ph.eval(qxp, qyp, qxp * qxp + qyp * qyp) -
                                 ph.eval(qxm, qym, qxm * qxm + qym * qym);
                    }
                    chord += (half * ref_v.weights[i]) *
                             std::complex<double>(std::cos(phase),
                                                  std::sin(phase));
                }
            }
            double hp = b * uy * vy[k];
            trow[k] = hp == 0.0
                          ? chord
                          : chord * std::complex<double>(std::cos(hp),
                                                         std::sin(hp));
        }
        if (!any) return;

        for (int k = 0; k < order_v; ++k) {
            std::complex<double> cz = wy[k] * trow[k];
            if (cz == std::complex<double>(0.0, 0.0)) continue;
            if (uniform) {
                double th0 = -md * tc[0] * vy[k];
                double ths = -md * dtau * vy[k];
                std::complex<double> z{std::cos(th0), std::sin(th0)};
                std::complex<double> st{std::cos(ths), std::sin(ths)};
                for (std::size_t t = 0; t < nt; ++t) {
                    vt[t] += cz * z;
                    z *= st;
                }
            } else {
                for (std::size_t t = 0; t < nt; ++t) {
                    double th = -md * tc[t] * vy[k];
                    vt[t] += cz * std::complex<double>(std::cos(th),
                                                       std::sin(th));
                }
            }
        }

        double pa = opt.include_aperture ? jinc(ra * std::hypot(ux, uy)) : 1.0;
        for (std::size_t t = 0; t < nt; ++t) {
            double s = opt.include_sinc ? sinc(ml * uy * lam[t]) : 1.0;
            wraw[t] += (wu * pa * s) * vt[t];
        }
    };

    if (opt.tensor_u) {
        // Composite per-axis grid split at zero, where the chord extents kink.
        int half_n = std::max(4, opt.tensor_u_order / 2);
        const Axis1D& ref_u = gauss_legendre_reference(half_n);
        double lim = 2.0 * r_axis;
        std::vector<double> un, uw;
        for (int s = 0; s < 2; ++s) {
            double a0 = s == 0 ? -lim : 0.0;
            double b0 = s == 0 ? 0.0 : lim;
            double mid = 0.5 * (a0 + b0), half = 0.5 * (b0 - a0);
            for (int i = 0; i < half_n; ++i) {
                un.push_back(mid + half * ref_u.nodes[i]);
                uw.push_back(half * ref_u.weights[i]);
            }
        }
        for (std::size_t jy = 0; jy < un.size(); ++jy) {
            for (std::size_t jx = 0; jx < un.size(); ++jx) {
                accumulate_u_node(un[jx], un[jy], uw[jx] * uw[jy]);
            }
        }
    } else {
        const Axis1D& ref_r = gauss_legendre_reference(n_r);
        double wpsi = 2.0 * kPi / n_psi;
        for (int ir = 0; ir < n_r; ++ir) {
            double ur = 0.5 * u_max * (ref_r.nodes[ir] + 1.0);
            double wr = 0.5 * u_max * ref_r.weights[ir] * ur;
            for (int ip = 0; ip < n_psi; ++ip) {
                double psi = (ip + 0.5) * wpsi;
                accumulate_u_node(ur * std::cos(psi), ur * std::sin(psi),
                                  wr * wpsi);
            }
        }
    }

    for (auto& v : wraw) v *= 0.25; // Jacobian of the sum/difference change

    if (diag) {
        diag->grid_order = grid.order;
        diag->min_order_required =
            min_order_for(max_abs_tau(tau), g, c, grid.radius);
        if (grid.order < diag->min_order_required) {
            diag->warnings.push_back(
                "grid order " + std::to_string(grid.order) +
                " below resolution bound " +
                std::to_string(diag->min_order_required));
        }
        if (capped_v) {
            diag->warnings.push_back(
                "difference-coordinate order capped at 256; propagation "
                "phase may be under-resolved");
        }
        if (capped_psi) {
            diag->warnings.push_back(
                "angular resolution capped at 256 sectors");
        }
        diag->radial_nodes = opt.tensor_u ? 0 : n_r;
        diag->angular_nodes = opt.tensor_u ? 0 : n_psi;
        diag->chord_order = order_v;
        diag->u_max = u_max;
    }
    return wraw;
}

std::vector<std::complex<double>> w_m_full_batch_opt(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    const FullKernelOptions& opt, KernelDiagnostics* diag) {
    std::vector<std::complex<double>> w =
        w_m_full_raw(tau, ab, g, c, grid, opt, diag);

    // Pupil-region mass at a fixed high order, so the overall scale does not
    // wobble with the caller's (typically coarse) grid order.
    GridSpec mass_grid = grid;
    mass_grid.order = std::max(512, grid.order);
    mass_grid.scheme = QuadScheme::GaussLegendre;
    Axis1D ax = make_axis(mass_grid);
    double qp2 = g.pupil_wavevector() * g.pupil_wavevector();
    double n0 = 0.0;
    for (std::size_t j = 0; j < ax.nodes.size(); ++j) {
        double y2 = ax.nodes[j] * ax.nodes[j];
        double row = 0.0;
        for (std::size_t i = 0; i < ax.nodes.size(); ++i) {
            if (ax.nodes[i] * ax.nodes[i] + y2 <= qp2) row += ax.weights[i];
        }
        n0 += ax.weights[j] * row;
    }

    double scale = g.aperture_radius * g.aperture_radius / (4.0 * kPi * n0);
    double im_max = 0.0;
    for (auto& v : w) {
        v *= scale;
        im_max = std::max(im_max, std::abs(v.imag()));
    }
    if (diag) diag->im_w_max = std::max(diag->im_w_max, im_max);
    return w;
}

}  // namespace detail

std::vector<std::complex<double>> w_m_full_batch(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    KernelDiagnostics* diag) {
    detail::FullKernelOptions opt;
    return detail::w_m_full_batch_opt(tau, ab, g, c, grid, opt, diag);
}

std::complex<double> w_m_full(double tau, const AberrationPhase& ab,
                              const SetupGeometry& g, const CrystalParams& c,
                              const GridSpec& grid, KernelDiagnostics* diag) {
    return w_m_full_batch({tau}, ab, g, c, grid, diag)[0];
}

double coincidence_rate(double tau, const AberrationPhase& ab,
                        const SetupGeometry& g, const CrystalParams& c,
                        const GridSpec& grid, DipModel model, double r0) {
    std::complex<double> w =
        model == DipModel::InfiniteAperture
            ? w_m_infinite(tau, ab, g, c, grid)
            : w_m_full(tau, ab, g, c, grid);
    double lam = triangular(1.0 - 2.0 * tau / c.dip_width());
    return r0 * (1.0 - lam * w.real());
}

DipCurve dip_curve(const std::vector<double>& tau_grid,
                   const AberrationPhase& ab, const SetupGeometry& g,
                   const CrystalParams& c, const GridSpec& grid,
                   DipModel model, double r0) {
    if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
    for (std::size_t i = 0; i + 1 < tau_grid.size(); ++i) {
        if (!(tau_grid[i] < tau_grid[i + 1])) {
            throw std::invalid_argument("tau grid must be strictly increasing");
        }
    }

    DipCurve curve;
    curve.tau = tau_grid;
    curve.r0 = r0;
    curve.model = model;

    std::vector<std::complex<double>> w =
        model == DipModel::InfiniteAperture
            ? w_m_infinite_batch(tau_grid, ab, g, c, grid, &curve.diag)
            : w_m_full_batch(tau_grid, ab, g, c, grid, &curve.diag);

    double dl = c.dip_width();
    curve.rate.resize(tau_grid.size());
    bool banded = false;
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
        double lam = triangular(1.0 - 2.0 * tau_grid[t] / dl);
        curve.rate[t] = r0 * (1.0 - lam * w[t].real());
        if (curve.rate[t] < -1e-9 * r0 || curve.rate[t] > 2.0 * r0 * (1.0 + 1e-9)) {
            banded = true;
        }
    }
    if (banded) {
        curve.diag.warnings.push_back(
            "rate outside the [0, 2 r0] sanity band");
    }
    return curve;
}

DipMetrics dip_metrics(const DipCurve& curve, const DipCurve& reference) {
    if (curve.tau.size() != reference.tau.size()) {
        throw std::invalid_argument("tau grids differ in length");
    }
    for (std::size_t i = 0; i < curve.tau.size(); ++i) {
        if (curve.tau[i] != reference.tau[i]) {
            throw std::invalid_argument("tau grids differ");
        }
    }
    if (curve.rate.empty()) throw std::invalid_argument("empty curve");

    DipMetrics m;
    std::size_t imin = 0;
    double rmin = curve.rate[0];
    double resid = 0.0;
    for (std::size_t i = 0; i < curve.rate.size(); ++i) {
        if (curve.rate[i] < rmin) {
            rmin = curve.rate[i];
            imin = i;
        }
        resid = std::max(resid,
                         std::abs(curve.rate[i] - reference.rate[i]));
    }
    m.visibility = 1.0 - rmin / curve.r0;
    m.residual_vs_flat = resid / curve.r0;
    m.min_location = curve.tau[imin];
    return m;
}

}  // namespace spdc
