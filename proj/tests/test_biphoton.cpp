#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <stdexcept>

#include "biphoton.hpp"
#include "doctest.h"
#include "util.hpp"

using namespace spdc;

namespace {

CrystalParams params() {
    CrystalParams c;
    c.finalize();
    return c;
}

}  // namespace

TEST_CASE("finalize derives pump wavenumber and degenerate frequency") {
    CrystalParams c = params();
    CHECK(c.k_p == doctest::Approx(2.0 * kPi / 405e-6).epsilon(1e-14));
    CHECK(c.Omega0 ==
          doctest::Approx(2.0 * kPi * kSpeedOfLight / 810e-6).epsilon(1e-14));

    CrystalParams explicit_kp;
    explicit_kp.k_p = c.k_p;
    explicit_kp.Omega0 = c.Omega0;
    explicit_kp.finalize();
    CHECK(explicit_kp.k_p == c.k_p);
    CHECK(explicit_kp.Omega0 == c.Omega0);
}

TEST_CASE("validation rejects unphysical parameter sets") {
    CrystalParams nondegenerate;
    nondegenerate.lambda_0 = 800.0;
    CHECK_THROWS_AS(nondegenerate.finalize(), std::invalid_argument);

    CrystalParams zero_length;
    zero_length.L = 0.0;
    CHECK_THROWS_AS(zero_length.finalize(), std::invalid_argument);

    CrystalParams negative_delay;
    negative_delay.D = -0.1;
    CHECK_THROWS_AS(negative_delay.finalize(), std::invalid_argument);

    CrystalParams inconsistent = params();
    inconsistent.k_p *= 1.01;
    CHECK_THROWS_AS(inconsistent.validate(), std::invalid_argument);

    CrystalParams near_kp = params();
    near_kp.k_p *= 1.0 + 1e-9;
    CHECK_NOTHROW(near_kp.validate());
}

TEST_CASE("dip width is the group-delay spread across the crystal") {
    CHECK(params().dip_width() == 0.182 * 1.5);
}

TEST_CASE("phase mismatch combines delay, walk-off and diffraction terms") {
    CrystalParams c = params();
    TransverseWavevector q{1.0, 2.0};
    double omega = 3.0;
    double expected =
        -omega * c.D + c.M * q.qy + 2.0 * (q.qx * q.qx + q.qy * q.qy) / c.k_p;
    CHECK(phase_mismatch(q, omega, c) ==
          doctest::Approx(expected).epsilon(1e-15));
    CHECK(phase_mismatch({0.0, 0.0}, 0.0, c) == 0.0);

    // each term in isolation
    CHECK(phase_mismatch({0.0, 0.0}, 1.0, c) == doctest::Approx(-c.D));
    CHECK(phase_mismatch({0.0, 1.0}, 0.0, c) ==
          doctest::Approx(c.M + 2.0 / c.k_p));
    CHECK(phase_mismatch({1.0, 0.0}, 0.0, c) ==
          doctest::Approx(2.0 / c.k_p));
}

TEST_CASE("biphoton amplitude is sinc with a half-mismatch phase rotation") {
    CrystalParams c = params();
    CHECK(biphoton_amplitude({0.0, 0.0}, 0.0, c) ==
          std::complex<double>(1.0, 0.0));

    TransverseWavevector q{5.0, -3.0};
    double omega = 1.7;
    double half = 0.5 * c.L * phase_mismatch(q, omega, c);
    std::complex<double> xi = biphoton_amplitude(q, omega, c);
    CHECK(xi.real() ==
          doctest::Approx(std::sin(half) / half * std::cos(half))
              .epsilon(1e-13));
    CHECK(xi.imag() ==
          doctest::Approx(std::sin(half) / half * std::sin(half))
              .epsilon(1e-13));
    CHECK(std::abs(xi) <= 1.0 + 1e-15);

    // zero at a full phase-matching period: L*Delta/2 = pi
    double omega_zero = (c.M * q.qy + 2.0 * 34.0 / c.k_p) / c.D -
                        2.0 * kPi / (c.L * c.D);
    std::complex<double> xi0 = biphoton_amplitude(q, omega_zero, c);
    CHECK(std::abs(xi0) < 1e-12);
}

TEST_CASE("triangular window clamps at zero outside the unit interval") {
    CHECK(triangular(0.0) == 1.0);
    CHECK(triangular(1.0) == 0.0);
    CHECK(triangular(-1.0) == 0.0);
    CHECK(triangular(2.5) == 0.0);
    CHECK(triangular(0.5) == 0.5);
    CHECK(triangular(-0.25) == 0.75);
}
