#pragma once

#include <complex>

namespace spdc {

// Nonlinear-crystal constants for a plane-wave-pumped type-II source.
// Units: lengths mm, time ps, frequencies rad/ps, wavenumbers rad/mm.
struct CrystalParams {
    double L = 1.5;          // crystal thickness, mm
    double D = 0.182;        // inverse group-velocity difference, ps/mm
    double M = 0.0723;       // spatial walk-off, dimensionless
    double lambda_p = 405.0; // pump wavelength, nm
    double lambda_0 = 810.0; // degenerate wavelength, nm
    double k_p = 0.0;        // pump wavenumber, rad/mm (derived if 0)
    double Omega0 = 0.0;     // degenerate angular frequency, rad/ps (derived if 0)

    // Fills k_p and Omega0 from the wavelengths and validates invariants.
    void finalize();
    void validate() const;

    double dip_width() const { return D * L; } // ps
};

struct TransverseWavevector {
    double qx = 0.0; // rad/mm
    double qy = 0.0; // rad/mm, component along the walk-off axis
};

// Paraxial phase mismatch, rad/mm.
double phase_mismatch(const TransverseWavevector& q, double omega,
                      const CrystalParams& c);

// Two-photon amplitude sinc(L Delta / 2) exp(i L Delta / 2).
std::complex<double> biphoton_amplitude(const TransverseWavevector& q,
                                        double omega, const CrystalParams& c);

// Triangular window: max(0, 1 - |alpha|).
double triangular(double alpha);

}  // namespace spdc
