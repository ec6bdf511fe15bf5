#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <stdexcept>

#include "biphoton.hpp"
#include "doctest.h"
#include "optics.hpp"
#include "quadrature.hpp"
#include "util.hpp"

using namespace spdc;

namespace {

CrystalParams crystal() {
    CrystalParams c;
    c.finalize();
    return c;
}

SetupGeometry geometry() {
    SetupGeometry g;
    g.finalize(crystal());
    return g;
}

}  // namespace

TEST_CASE("low-order Gauss-Legendre rules match the closed forms") {
    const Axis1D& two = gauss_legendre_reference(2);
    REQUIRE(two.nodes.size() == 2);
    double r3 = 1.0 / std::sqrt(3.0);
    CHECK(two.nodes[0] == doctest::Approx(-r3).epsilon(1e-15));
    CHECK(two.nodes[1] == doctest::Approx(r3).epsilon(1e-15));
    CHECK(two.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(two.weights[1] == doctest::Approx(1.0).epsilon(1e-15));

    const Axis1D& three = gauss_legendre_reference(3);
    REQUIRE(three.nodes.size() == 3);
    CHECK(three.nodes[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-15));
    CHECK(three.nodes[1] == 0.0);
    CHECK(three.nodes[2] == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
    CHECK(three.weights[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(three.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("reference rules are symmetric and integrate constants exactly") {
    for (int order : {2, 5, 16, 33, 64}) {
        const Axis1D& ax = gauss_legendre_reference(order);
        REQUIRE(static_cast<int>(ax.nodes.size()) == order);
        double wsum = 0.0;
        for (double w : ax.weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        for (int i = 0; i < order; ++i) {
            CHECK(ax.nodes[i] == -ax.nodes[order - 1 - i]);
            CHECK(ax.weights[i] == ax.weights[order - 1 - i]);
        }
    }
}

TEST_CASE("order-n rule is exact through polynomial degree 2n-1") {
    // integral of x^k over [-1,1] is 0 (odd) or 2/(k+1) (even)
    for (int order : {4, 9, 12}) {
        const Axis1D& ax = gauss_legendre_reference(order);
        for (int k = 0; k <= 2 * order - 1; ++k) {
            double got = 0.0;
            for (std::size_t i = 0; i < ax.nodes.size(); ++i) {
                got += ax.weights[i] * std::pow(ax.nodes[i], k);
            }
            double want = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("axes rescale to the requested half-width") {
    GridSpec gl{2.5, 16, QuadScheme::GaussLegendre};
    Axis1D ax = make_axis(gl);
    REQUIRE(ax.nodes.size() == 16);
    double wsum = 0.0;
    for (double w : ax.weights) wsum += w;
    CHECK(wsum == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(ax.nodes.front() > -2.5);
    CHECK(ax.nodes.back() < 2.5);

    GridSpec tr{kPi, 200, QuadScheme::UniformTrapezoid};
    Axis1D tx = make_axis(tr);
    REQUIRE(tx.nodes.size() == 200);
    CHECK(tx.nodes.front() == doctest::Approx(-kPi).epsilon(1e-15));
    CHECK(tx.nodes.back() == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(tx.weights.front() == doctest::Approx(0.5 * tx.weights[1])
                                    .epsilon(1e-14));
    double tsum = 0.0;
    for (double w : tx.weights) tsum += w;
    CHECK(tsum == doctest::Approx(2.0 * kPi).epsilon(1e-13));

    // trapezoid integrates a full cosine period to spectral accuracy
    double cosint = 0.0;
    for (std::size_t i = 0; i < tx.nodes.size(); ++i) {
        cosint += tx.weights[i] * std::cos(tx.nodes[i]);
    }
    CHECK(std::abs(cosint) < 1e-12);
}

TEST_CASE("grid validation rejects bad radius and order") {
    CHECK_THROWS_AS((GridSpec{0.0, 64, QuadScheme::GaussLegendre}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{-1.0, 64, QuadScheme::GaussLegendre}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{1.0, 7, QuadScheme::GaussLegendre}.validate()),
                    std::invalid_argument);
    CHECK_NOTHROW((GridSpec{1.0, 8, QuadScheme::GaussLegendre}.validate()));
}

TEST_CASE("domain radius is the tighter of pupil image and collection cone") {
    SetupGeometry g = geometry();
    double cone = g.k0 * kCollectionHalfAngle;
    CHECK(default_domain_radius(g) == doctest::Approx(cone).epsilon(1e-14));
    CHECK(default_domain_radius(g) ==
          doctest::Approx(193.925472444).epsilon(1e-10));

    SetupGeometry narrow = g;
    narrow.mirror_radius = 1.0; // pupil image now tighter than the cone
    CHECK(default_domain_radius(narrow) ==
          doctest::Approx(narrow.pupil_wavevector()).epsilon(1e-14));
}

TEST_CASE("oscillation-resolving order tracks the dominant phase term") {
    CrystalParams c = crystal();
    SetupGeometry g = geometry();
    double R = default_domain_radius(g);
    double dl = c.dip_width();

    CHECK(min_order_for(dl, g, c, R) == 12223);

    SetupGeometry flat_path = g;
    flat_path.d1 = 0.0;
    CHECK(min_order_for(dl, g, c, R) > min_order_for(dl, flat_path, c, R));
    CHECK(min_order_for(dl, flat_path, c, R) == 161);

    // larger delay span never lowers the requirement
    CHECK(min_order_for(2.0 * dl, flat_path, c, R) >=
          min_order_for(dl, flat_path, c, R));

    // shrinking the domain lowers it, down to the floor of 64
    SetupGeometry small = g;
    small.mirror_radius = 0.5;
    small.finalize(c);
    double Rs = default_domain_radius(small);
    CHECK(min_order_for(dl, small, c, Rs) == 123);
    CHECK(min_order_for(1e-9, flat_path, c, 1e-6) == 64);

    CHECK_THROWS_AS(min_order_for(0.0, g, c, R), std::invalid_argument);
    CHECK_THROWS_AS(min_order_for(dl, g, c, 0.0), std::invalid_argument);
}

TEST_CASE("2d integrator reproduces closed-form integrals") {
    GridSpec g{2.0, 24, QuadScheme::GaussLegendre};

    auto poly = [](double x, double y) {
        return std::complex<double>(x * x * y * y, 0.0);
    };
    // (2/3 R^3)^2 with R = 2
    double want = (16.0 / 3.0) * (16.0 / 3.0);
    CHECK(integrate_2d(poly, g).real() ==
          doctest::Approx(want).epsilon(1e-13));

    double a = 1.3;
    auto wave = [a](double x, double) {
        return std::exp(std::complex<double>(0.0, a * x));
    };
    // separable: (2/a) sin(aR) * 2R
    std::complex<double> got = integrate_2d(wave, g);
    CHECK(got.real() == doctest::Approx(2.0 / a * std::sin(a * 2.0) * 4.0)
                            .epsilon(1e-12));
    CHECK(std::abs(got.imag()) < 1e-13 * 16.0);

    auto odd = [](double x, double y) {
        return std::complex<double>(x * y * y + y, 0.0);
    };
    CHECK(std::abs(integrate_2d(odd, g)) < 1e-13 * 16.0);
}

TEST_CASE("4d integrator matches separable products") {
    GridSpec g{1.5, 12, QuadScheme::GaussLegendre};
    auto f = [](double x, double y, double xp, double yp) {
        return std::complex<double>(x * x * y * y * xp * xp * yp * yp, 0.0);
    };
    double m2 = 2.0 * std::pow(1.5, 3) / 3.0; // second moment per axis
    CHECK(integrate_4d(f, g).real() ==
          doctest::Approx(m2 * m2 * m2 * m2).epsilon(1e-12));

    auto mixed = [](double x, double y, double xp, double yp) {
        return std::exp(std::complex<double>(0.0, x + 0.5 * y - xp + yp));
    };
    auto one_axis = [](double a, double r) { return 2.0 / a * std::sin(a * r); };
    double want = one_axis(1.0, 1.5) * one_axis(0.5, 1.5) *
                  one_axis(-1.0, 1.5) * one_axis(1.0, 1.5);
    CHECK(integrate_4d(mixed, g).real() ==
          doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("non-finite integrand values abort with a grid point report") {
    GridSpec g{1.0, 8, QuadScheme::GaussLegendre};
    auto bad2 = [](double x, double) {
        return std::complex<double>(x > 0 ? std::nan("") : 0.0, 0.0);
    };
    CHECK_THROWS_AS(integrate_2d(bad2, g), std::runtime_error);

    auto bad4 = [](double, double, double, double xp) {
        return std::complex<double>(0.0, xp > 0.5 ? HUGE_VAL : 0.0);
    };
    CHECK_THROWS_AS(integrate_4d(bad4, g), std::runtime_error);
}
