#pragma once

#include <complex>

#include "biphoton.hpp"
#include "zernike.hpp"

namespace spdc {

// 4-f imaging geometry between the crystal output face and the mirror plane.
struct SetupGeometry {
    double f = 200.0;           // 4-f focal length, mm
    double k0 = 0.0;            // degenerate wavenumber, rad/mm (derived if 0)
    double mirror_radius = 6.0; // pupil radius on the mirror, mm
    double aperture_radius = 4.0; // detection pinhole radius, mm
    double d1 = 330.0;          // propagation distance to the aperture, mm

    void finalize(const CrystalParams& c);
    void validate() const;

    // Pupil edge expressed as a transverse wavevector, rad/mm.
    double pupil_wavevector() const { return k0 * mirror_radius / f; }
};

struct FocalPoint {
    double x = 0.0; // mm
    double y = 0.0; // mm
};

// Lens mapping x = (f/k0) q from wavevector to mirror-plane position.
FocalPoint focal_plane_map(const TransverseWavevector& q,
                           const SetupGeometry& g);

// Mirror transfer function: hard pupil times the aberration phase screen.
std::complex<double> transfer_function(const TransverseWavevector& q,
                                       const AberrationPhase& ab,
                                       const SetupGeometry& g);

// Aberration phase at wavevector q (pupil coordinates via the lens map).
// Caller must keep |q| within pupil_wavevector().
double pupil_phase(const TransverseWavevector& q, const AberrationPhase& ab,
                   const SetupGeometry& g);

// Normalized Fourier transform of the circular detection aperture,
// 2 J1(a|u|)/(a|u|) with value 1 at u = 0.
double aperture_ft(const TransverseWavevector& qsum, const SetupGeometry& g);

// 2 J1(x)/x, even in x, jinc(0) = 1.
double jinc(double x);

}  // namespace spdc
