#pragma once

#include <complex>
#include <string>
#include <vector>

#include "biphoton.hpp"
#include "optics.hpp"
#include "quadrature.hpp"
#include "zernike.hpp"

namespace spdc {

enum class DipModel { FiniteAperture, InfiniteAperture };

// Numerical quality record attached to every kernel evaluation.
struct KernelDiagnostics {
    double im_w_max = 0.0;       // largest |Im W| seen over the tau batch
    int grid_order = 0;          // per-axis order of the driving grid
    int min_order_required = 0;  // Nyquist-style bound for this scenario
    std::vector<std::string> warnings;
    // Finite-aperture evaluator resolution echo (zero for the 2D path):
    int radial_nodes = 0;
    int angular_nodes = 0;
    int chord_order = 0;
    double u_max = 0.0;
};

struct DipCurve {
    std::vector<double> tau;   // ps, strictly increasing
    std::vector<double> rate;  // R_C(tau)
    double r0 = 1.0;
    DipModel model = DipModel::InfiniteAperture;
    KernelDiagnostics diag;
};

struct DipMetrics {
    double visibility = 0.0;        // 1 - min(rate)/r0
    double residual_vs_flat = 0.0;  // max_tau |rate - ref_rate| / r0
    double min_location = 0.0;      // ps
};

// Large-aperture kernel: per-photon pupil product against the delay phase,
// normalized so the flat-mirror value at the dip center is exactly 1.
std::vector<std::complex<double>> w_m_infinite_batch(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    KernelDiagnostics* diag = nullptr);

std::complex<double> w_m_infinite(double tau, const AberrationPhase& ab,
                                  const SetupGeometry& g,
                                  const CrystalParams& c,
                                  const GridSpec& grid,
                                  KernelDiagnostics* diag = nullptr);

namespace detail {

// Test/validation switches for the finite-aperture evaluator.
struct FullKernelOptions {
    bool include_aperture = true;  // aperture Fourier factor
    bool include_sinc = true;      // transverse walk-off factor
    bool tensor_u = false;         // tensor sum-coordinate grid (validation)
    int tensor_u_order = 64;
};

std::vector<std::complex<double>> w_m_full_batch_opt(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    const FullKernelOptions& opt, KernelDiagnostics* diag);

// Raw (unnormalized) double integral, for factorization cross-checks.
std::vector<std::complex<double>> w_m_full_raw(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    const FullKernelOptions& opt, KernelDiagnostics* diag);

}  // namespace detail

// Finite-aperture kernel: double integral over photon wavevector pairs with
// the aperture Fourier factor, walk-off sinc, and propagation phase.
std::vector<std::complex<double>> w_m_full_batch(
    const std::vector<double>& tau, const AberrationPhase& ab,
    const SetupGeometry& g, const CrystalParams& c, const GridSpec& grid,
    KernelDiagnostics* diag = nullptr);

std::complex<double> w_m_full(double tau, const AberrationPhase& ab,
                              const SetupGeometry& g, const CrystalParams& c,
                              const GridSpec& grid,
                              KernelDiagnostics* diag = nullptr);

// R_C(tau) = r0 [1 - triangular(1 - 2 tau / (D L)) Re W(tau)].
double coincidence_rate(double tau, const AberrationPhase& ab,
                        const SetupGeometry& g, const CrystalParams& c,
                        const GridSpec& grid, DipModel model,
                        double r0 = 1.0);

DipCurve dip_curve(const std::vector<double>& tau_grid,
                   const AberrationPhase& ab, const SetupGeometry& g,
                   const CrystalParams& c, const GridSpec& grid,
                   DipModel model, double r0 = 1.0);

DipMetrics dip_metrics(const DipCurve& curve, const DipCurve& reference);

}  // namespace spdc
