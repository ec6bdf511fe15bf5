#include "optics.hpp"

#include <cmath>
#include <stdexcept>

#include "util.hpp"

namespace spdc {

void SetupGeometry::finalize(const CrystalParams& c) {
    if (k0 == 0.0 && c.lambda_0 > 0.0) {
        k0 = 2.0 * kPi / (c.lambda_0 * 1e-6);
    }
    validate();
}

void SetupGeometry::validate() const {
    if (!(f > 0.0)) throw std::invalid_argument("geometry.f must be > 0");
    if (!(k0 > 0.0)) throw std::invalid_argument("geometry.k0 must be > 0");
    if (!(mirror_radius > 0.0)) {
        throw std::invalid_argument("geometry.mirror_radius must be > 0");
    }
    if (!(aperture_radius > 0.0)) {
        throw std::invalid_argument("geometry.aperture_radius must be > 0");
    }
    if (d1 < 0.0) throw std::invalid_argument("geometry.d1 must be >= 0");
}

FocalPoint focal_plane_map(const TransverseWavevector& q,
                           const SetupGeometry& g) {
    double s = g.f / g.k0;
    return {s * q.qx, s * q.qy};
}

double pupil_phase(const TransverseWavevector& q, const AberrationPhase& ab,
                   const SetupGeometry& g) {
    return phase_map(ab, q.qx, q.qy, g.pupil_wavevector());
}

std::complex<double> transfer_function(const TransverseWavevector& q,
                                       const AberrationPhase& ab,
                                       const SetupGeometry& g) {
    double qp = g.pupil_wavevector();
    double qr = std::sqrt(q.qx * q.qx + q.qy * q.qy);
    if (qr > qp) return {0.0, 0.0};
    double phi = phase_map(ab, q.qx, q.qy, qp);
    return {std::cos(phi), std::sin(phi)};
}

double jinc(double x) {
    double ax = std::abs(x);
    if (ax < 1e-3) {
        double x2 = x * x;
        return 1.0 - x2 / 8.0 + x2 * x2 / 192.0;
    }
    return 2.0 * std::cyl_bessel_j(1, ax) / ax;
}

double aperture_ft(const TransverseWavevector& qsum, const SetupGeometry& g) {
    double u = std::sqrt(qsum.qx * qsum.qx + qsum.qy * qsum.qy);
    return jinc(g.aperture_radius * u);
}

}  // namespace spdc
