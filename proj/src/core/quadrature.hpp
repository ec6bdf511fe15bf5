#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "biphoton.hpp"
#include "optics.hpp"

namespace spdc {

// Half-angle of the detection collection cone, radians.
inline constexpr double kCollectionHalfAngle = 0.025;

enum class QuadScheme { GaussLegendre, UniformTrapezoid };

// Tensor-product grid over the square [-radius, radius] per axis.
struct GridSpec {
    double radius = 0.0; // rad/mm
    int order = 64;      // points per axis
    QuadScheme scheme = QuadScheme::GaussLegendre;

    void validate() const {
        if (!(radius > 0.0)) {
            throw std::invalid_argument("grid radius must be > 0");
        }
        if (order < 8) {
            throw std::invalid_argument("grid order must be >= 8");
        }
    }
};

struct Axis1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights on [-1, 1]; cached per order.
const Axis1D& gauss_legendre_reference(int order);

// Quadrature axis over [-radius, radius] for the given scheme.
Axis1D make_axis(const GridSpec& g);

// Domain radius: tighter of the pupil image and the collection cone.
double default_domain_radius(const SetupGeometry& g);

// Smallest per-axis order keeping at least 8 points per period of the
// fastest oscillatory phase factor appearing in the dip kernels.
int min_order_for(double tau_max, const SetupGeometry& g,
                  const CrystalParams& c, double radius);

namespace detail {
[[noreturn]] void throw_nonfinite(double qx, double qy);
[[noreturn]] void throw_nonfinite4(double qx, double qy, double qpx,
                                   double qpy);
}  // namespace detail

template <typename F>
std::complex<double> integrate_2d(F&& f, const GridSpec& g) {
    g.validate();
    Axis1D ax = make_axis(g);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < ax.nodes.size(); ++j) {
        std::complex<double> row{0.0, 0.0};
        for (std::size_t i = 0; i < ax.nodes.size(); ++i) {
            std::complex<double> v = f(ax.nodes[i], ax.nodes[j]);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                detail::throw_nonfinite(ax.nodes[i], ax.nodes[j]);
            }
            row += ax.weights[i] * v;
        }
        acc += ax.weights[j] * row;
    }
    return acc;
}

template <typename F>
std::complex<double> integrate_4d(F&& f, const GridSpec& g) {
    g.validate();
    Axis1D ax = make_axis(g);
    std::size_t n = ax.nodes.size();
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t jp = 0; jp < n; ++jp) {
        for (std::size_t ip = 0; ip < n; ++ip) {
            double wq = ax.weights[ip] * ax.weights[jp];
            std::complex<double> inner{0.0, 0.0};
            for (std::size_t j = 0; j < n; ++j) {
                std::complex<double> row{0.0, 0.0};
                for (std::size_t i = 0; i < n; ++i) {
                    std::complex<double> v = f(ax.nodes[i], ax.nodes[j],
                                               ax.nodes[ip], ax.nodes[jp]);
                    if (!std::isfinite(v.real()) ||
                        !std::isfinite(v.imag())) {
                        detail::throw_nonfinite4(ax.nodes[i], ax.nodes[j],
                                                 ax.nodes[ip], ax.nodes[jp]);
                    }
                    row += ax.weights[i] * v;
                }
                inner += ax.weights[j] * row;
            }
            acc += wq * inner;
        }
    }
    return acc;
}

}  // namespace spdc
