#include "zernike.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace spdc {

namespace {

std::string index_str(int n, int m) {
    return "(" + std::to_string(n) + ", " + std::to_string(m) + ")";
}

void require_valid(int n, int m) {
    if (!zernike_index_valid(n, m)) {
        throw std::domain_error("invalid Zernike index " + index_str(n, m) +
                                ": need 0 <= n <= 47, |m| <= n, n - |m| even");
    }
}

}  // namespace

bool zernike_index_valid(int n, int m) {
    int am = m < 0 ? -m : m;
    // Above n = 47 the integer radial coefficients pass 2^53 and double
    // evaluation loses the R(1) = 1 identity, so larger orders count as
    // unsupported rather than silently degraded.
    return n >= 0 && n <= 47 && am <= n && (n - am) % 2 == 0;
}

AberrationPhase::AberrationPhase(std::vector<ZernikeMode> modes) {
    for (const auto& mode : modes) add(mode);
}

void AberrationPhase::add(const ZernikeMode& mode) {
    require_valid(mode.n, mode.m);
    for (const auto& existing : modes_) {
        if (existing.n == mode.n && existing.m == mode.m) {
            throw std::invalid_argument("duplicate Zernike mode " +
                                        index_str(mode.n, mode.m));
        }
    }
    modes_.push_back(mode);
}

std::vector<std::int64_t> radial_coefficients(int n, int m) {
    require_valid(n, m);
    int am = m < 0 ? -m : m;
    int p = (n + am) / 2;
    int q = (n - am) / 2;

    // a_0 = n! / (p! q!) = C(n, q); then
    // a_{k+1} = -a_k (p - k)(q - k) / ((n - k)(k + 1)), all divisions exact.
    std::vector<std::int64_t> coeffs(q + 1);
    std::int64_t a0 = 1;
    for (int i = 1; i <= q; ++i) a0 = a0 * (n - q + i) / i;
    coeffs[0] = a0;
    for (int k = 0; k < q; ++k) {
        __int128 num = static_cast<__int128>(coeffs[k]) * (p - k) * (q - k);
        __int128 den = static_cast<__int128>(n - k) * (k + 1);
        coeffs[k + 1] = static_cast<std::int64_t>(-(num / den));
    }
    return coeffs;
}

double radial_poly(int n, int m, double rho) {
    auto coeffs = radial_coefficients(n, m);
    int am = m < 0 ? -m : m;
    // Horner in rho^2, highest power first, then the rho^|m| prefactor.
    double r2 = rho * rho;
    double acc = 0.0;
    for (double c : coeffs) acc = acc * r2 + c;
    double pref = 1.0;
    for (int i = 0; i < am; ++i) pref *= rho;
    return acc * pref;
}

double zernike_eval(const ZernikeMode& mode, double rho, double theta) {
    require_valid(mode.n, mode.m);
    if (rho > 1.0 + 1e-12) {
        throw std::domain_error("Zernike argument outside unit disk: rho = " +
                                std::to_string(rho));
    }
    if (rho > 1.0) rho = 1.0;
    double radial = radial_poly(mode.n, mode.m, rho);
    double angular = mode.m >= 0 ? std::cos(mode.m * theta)
                                 : std::sin(-mode.m * theta);
    return mode.coeff * radial * angular;
}

double phase_map(const AberrationPhase& ab, double qx, double qy,
                 double pupil_scale) {
    if (!(pupil_scale > 0.0)) {
        throw std::invalid_argument("pupil_scale must be positive");
    }
    double r = std::sqrt(qx * qx + qy * qy) / pupil_scale;
    if (r > 1.0 + 1e-9) {
        throw std::domain_error(
            "phase_map point outside pupil: rho = " + std::to_string(r));
    }
    if (r > 1.0) r = 1.0;
    if (ab.empty()) return 0.0;
    double theta = std::atan2(qy, qx);
    double phase = 0.0;
    for (const auto& mode : ab.modes()) {
        phase += zernike_eval(mode, r, theta);
    }
    return phase;
}

AberrationPhase odd_part(const AberrationPhase& ab) {
    AberrationPhase out;
    for (const auto& mode : ab.modes()) {
        int am = mode.m < 0 ? -mode.m : mode.m;
        if (am % 2 == 1) out.add(mode);
    }
    return out;
}

double mode_peak_to_valley(int n, int m) {
    require_valid(n, m);

    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, double> cache;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find({n, m});
        if (it != cache.end()) return it->second;
    }

    // 512x512 scan over the unit disk.
    constexpr int kScan = 512;
    ZernikeMode mode{n, m, 1.0};
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int iy = 0; iy < kScan; ++iy) {
        double y = -1.0 + 2.0 * iy / (kScan - 1);
        for (int ix = 0; ix < kScan; ++ix) {
            double x = -1.0 + 2.0 * ix / (kScan - 1);
            double r = std::sqrt(x * x + y * y);
            if (r > 1.0) continue;
            double v = zernike_eval(mode, r, std::atan2(y, x));
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                if (v < lo) lo = v;
                if (v > hi) hi = v;
            }
        }
    }
    double pv = hi - lo;

    std::lock_guard<std::mutex> lock(cache_mutex);
    cache[{n, m}] = pv;
    return pv;
}

double pv_to_coeff(double pv, int n, int m, double k0) {
    require_valid(n, m);
    if (pv == 0.0) return 0.0;
    if (!(k0 > 0.0)) {
        throw std::invalid_argument("k0 must be positive");
    }
    double mode_pv = mode_peak_to_valley(n, m);
    if (mode_pv <= 0.0) {
        throw std::domain_error("mode " + index_str(n, m) +
                                " has zero peak-to-valley");
    }
    // Reflection doubles the surface deformation: phase PV = 2 k0 pv.
    return 2.0 * k0 * pv / mode_pv;
}

}  // namespace spdc
