#include "quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "util.hpp"

namespace spdc {

namespace {

Axis1D compute_gauss_legendre(int n) {
    Axis1D ax;
    ax.nodes.assign(n, 0.0);
    ax.weights.assign(n, 0.0);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // Final derivative at the converged root for the weight.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        ax.nodes[i] = -x;
        ax.nodes[n - 1 - i] = x;
        ax.weights[i] = w;
        ax.weights[n - 1 - i] = w;
    }
    // The middle root of an odd-order rule is exactly zero; snapping it
    // keeps the node set mirror-symmetric to the bit.
    if (n % 2 == 1) ax.nodes[n / 2] = 0.0;
    return ax;
}

}  // namespace

const Axis1D& gauss_legendre_reference(int order) {
    if (order < 1) throw std::invalid_argument("order must be >= 1");
    static std::mutex cache_mutex;
    static std::map<int, Axis1D> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(order);
    if (it == cache.end()) {
        it = cache.emplace(order, compute_gauss_legendre(order)).first;
    }
    return it->second;
}

Axis1D make_axis(const GridSpec& g) {
    g.validate();
    Axis1D ax;
    if (g.scheme == QuadScheme::GaussLegendre) {
        const Axis1D& ref = gauss_legendre_reference(g.order);
        ax.nodes.resize(ref.nodes.size());
        ax.weights.resize(ref.weights.size());
        for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
            ax.nodes[i] = ref.nodes[i] * g.radius;
            ax.weights[i] = ref.weights[i] * g.radius;
        }
    } else {
        int n = g.order;
        double h = 2.0 * g.radius / (n - 1);
        ax.nodes.resize(n);
        ax.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            ax.nodes[i] = -g.radius + h * i;
            ax.weights[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
        }
        // Enforce exact mirror symmetry of the uniform nodes.
        for (int i = 0; i < n / 2; ++i) ax.nodes[n - 1 - i] = -ax.nodes[i];
        if (n % 2 == 1) ax.nodes[n / 2] = 0.0;
    }
    return ax;
}

double default_domain_radius(const SetupGeometry& g) {
    return std::min(g.pupil_wavevector(), g.k0 * kCollectionHalfAngle);
}

int min_order_for(double tau_max, const SetupGeometry& g,
                  const CrystalParams& c, double radius) {
    if (!(tau_max > 0.0)) {
        throw std::invalid_argument("tau_max must be > 0");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("radius must be > 0");
    }
    double slope = std::max({(2.0 * c.M / c.D) * tau_max,
                             (c.M / c.D) * tau_max,
                             4.0 * g.d1 * radius / c.k_p});
    double cycles = slope * (2.0 * radius) / (2.0 * kPi);
    // 12 points per period: the extra margin over the bare Nyquist-style
    // floor keeps the uniform-trapezoid scheme inside the same relative
    // error band as Gauss-Legendre at the returned order.
    double pts = 12.0 * cycles;
    int order = static_cast<int>(std::ceil(pts));
    return std::max(64, order);
}

namespace detail {

void throw_nonfinite(double qx, double qy) {
    throw std::runtime_error("non-finite integrand value at q = (" +
                             format_sig12(qx) + ", " + format_sig12(qy) +
                             ")");
}

void throw_nonfinite4(double qx, double qy, double qpx, double qpy) {
    throw std::runtime_error(
        "non-finite integrand value at (q, q') = ((" + format_sig12(qx) +
        ", " + format_sig12(qy) + "), (" + format_sig12(qpx) + ", " +
        format_sig12(qpy) + "))");
}

}  // namespace detail

}  // namespace spdc
