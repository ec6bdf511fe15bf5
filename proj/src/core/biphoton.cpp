#include "biphoton.hpp"

#include <cmath>
#include <stdexcept>

#include "util.hpp"

namespace spdc {

void CrystalParams::finalize() {
    double lambda_p_mm = lambda_p * 1e-6;
    double lambda_0_mm = lambda_0 * 1e-6;
    if (k_p == 0.0 && lambda_p > 0.0) k_p = 2.0 * kPi / lambda_p_mm;
    if (Omega0 == 0.0 && lambda_0 > 0.0) {
        Omega0 = 2.0 * kPi * kSpeedOfLight / lambda_0_mm;
    }
    validate();
}

void CrystalParams::validate() const {
    if (!(L > 0.0)) throw std::invalid_argument("crystal.L must be > 0");
    if (!(D > 0.0)) throw std::invalid_argument("crystal.D must be > 0");
    if (!(lambda_p > 0.0)) {
        throw std::invalid_argument("crystal.lambda_p must be > 0");
    }
    if (std::abs(lambda_0 - 2.0 * lambda_p) > 1e-9 * lambda_0) {
        throw std::invalid_argument(
            "crystal.lambda_0 must equal 2*lambda_p (degenerate collinear "
            "downconversion)");
    }
    if (!(k_p > 0.0)) throw std::invalid_argument("crystal.k_p must be > 0");
    double expected_kp = 2.0 * kPi / (lambda_p * 1e-6);
    if (std::abs(k_p - expected_kp) > 1e-6 * expected_kp) {
        throw std::invalid_argument("crystal.k_p inconsistent with lambda_p");
    }
}

double phase_mismatch(const TransverseWavevector& q, double omega,
                      const CrystalParams& c) {
    double q2 = q.qx * q.qx + q.qy * q.qy;
    return -omega * c.D + c.M * q.qy + 2.0 * q2 / c.k_p;
}

std::complex<double> biphoton_amplitude(const TransverseWavevector& q,
                                        double omega,
                                        const CrystalParams& c) {
    double half = 0.5 * c.L * phase_mismatch(q, omega, c);
    return sinc(half) * std::complex<double>(std::cos(half), std::sin(half));
}

double triangular(double alpha) {
    double v = 1.0 - std::abs(alpha);
    return v > 0.0 ? v : 0.0;
}

}  // namespace spdc
