#pragma once

#include <cstdint>
#include <vector>

namespace spdc {

// One Zernike term. Angular convention: m >= 0 uses cos(m*theta),
// m < 0 uses sin(|m|*theta). No Noll/ANSI normalization factors: the
// coefficient multiplies the raw polynomial.
struct ZernikeMode {
    int n = 0;
    int m = 0;
    double coeff = 0.0;  // rad
};

// Ordered mode list describing a mirror phase profile over the unit disk.
// Modes must have distinct (n, m).
class AberrationPhase {
public:
    AberrationPhase() = default;
    explicit AberrationPhase(std::vector<ZernikeMode> modes);

    void add(const ZernikeMode& mode);
    const std::vector<ZernikeMode>& modes() const { return modes_; }
    bool empty() const { return modes_.empty(); }

private:
    std::vector<ZernikeMode> modes_;
};

// True iff 0 <= n <= 47, |m| <= n and n - |m| is even. The order cap marks
// where the integer radial coefficients exceed 2^53 and double evaluation
// can no longer honor R(1) = 1 exactly.
bool zernike_index_valid(int n, int m);

// Integer coefficients of R_n^m: R = sum_k coeffs[k] * rho^(n - 2k),
// k = 0 .. (n-|m|)/2. Throws std::domain_error on invalid (n, m).
std::vector<std::int64_t> radial_coefficients(int n, int m);

// Radial polynomial R_n^|m|(rho). Domain rho in [0, 1].
double radial_poly(int n, int m, double rho);

// Full mode value coeff * R_n^|m|(rho) * cos/sin(|m|*theta).
// Throws std::domain_error for rho > 1 (outside the unit pupil).
double zernike_eval(const ZernikeMode& mode, double rho, double theta);

// Phase at a (qx, qy) point, with rho = |q| / pupil_scale. The caller is
// expected to gate on the pupil first; rho > 1 throws std::domain_error.
double phase_map(const AberrationPhase& ab, double qx, double qy,
                 double pupil_scale);

// Modes with odd m (the parity-surviving part of the phase).
AberrationPhase odd_part(const AberrationPhase& ab);

// Coefficient giving a single-mode phase profile whose peak-to-valley
// equals the double-pass mirror phase 2 * k0 * pv. pv and k0 in
// consistent units (mm and rad/mm). The mode's own peak-to-valley over
// the unit disk is found by a numeric min/max scan (cached).
double pv_to_coeff(double pv, int n, int m, double k0);

// Peak-to-valley of the bare mode (n, m) over the unit disk, from the
// 512x512 scan. Exposed for tests and table output.
double mode_peak_to_valley(int n, int m);

}  // namespace spdc
