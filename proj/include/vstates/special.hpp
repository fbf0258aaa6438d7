#ifndef VSTATES_SPECIAL_HPP
#define VSTATES_SPECIAL_HPP

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "vstates/gamma.hpp"

namespace vstates {

// gSQG interpolation exponent, restricted to the open interval (0,2).
class Alpha {
  public:
    explicit Alpha(double value) : value_(value) {
        if (!(value > 0.0 && value < 2.0))
            throw std::invalid_argument("Alpha: value must lie in (0,2)");
    }
    double value() const { return value_; }
    bool is_one() const { return value_ == 1.0; }

  private:
    double value_;
};

// C(alpha) = Gamma(alpha/2) / (2 pi 2^{1-alpha} Gamma((2-alpha)/2)).
inline double normalizing_constant(Alpha alpha) {
    const double a = alpha.value();
    return gamma_real(a / 2) / (2.0 * M_PI * std::pow(2.0, 1.0 - a) * gamma_real((2.0 - a) / 2));
}

// Closed form of the half-period sine-power moment
//   int_0^pi sin(eta)^x e^{i y eta} d eta
//     = pi e^{i pi y/2} Gamma(x+1) / (2^x Gamma(1+(x+y)/2) Gamma(1+(x-y)/2)).
// When 1+(x+-y)/2 hits a non-positive integer the reciprocal Gamma vanishes
// and the value is 0 by the 1/Gamma(pole) = 0 convention.
inline std::complex<double> sine_power_exp_integral(double x_exp, double y) {
    if (!(x_exp > -1.0))
        throw std::invalid_argument("sine_power_exp_integral: exponent must exceed -1");
    const double mag = M_PI * gamma_real(x_exp + 1.0) * std::pow(2.0, -x_exp) *
                       inv_gamma_product(1.0 + (x_exp + y) / 2, 1.0 + (x_exp - y) / 2);
    const std::complex<double> phase(std::cos(M_PI * y / 2), std::sin(M_PI * y / 2));
    return mag * phase;
}

namespace detail {

inline void warn_near_alpha_one(double a) {
    static bool warned = false;
    if (!warned && a != 1.0 && std::fabs(a - 1.0) < 1e-6) {
        std::fprintf(stderr,
                     "vstates: warning: alpha=%.17g is within 1e-6 of 1; the generic "
                     "Gamma-ratio formulas are ill-conditioned there\n", a);
        warned = true;
    }
}

} // namespace detail

// Fourier coefficient of the periodic sine-power kernel:
//   sine_power_coeff(s, n) = int_0^{2pi} sin(u/2)^s e^{i n u} du   (real, even in n)
// Finite for s > -1; for s in (-2,-1) it is the analytic continuation, which is
// only meaningful inside difference combinations (see sine_power_diff_coeff).
inline double sine_power_coeff(double s, int n) {
    n = std::abs(n);
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    return 2.0 * M_PI * sgn * gamma_real(s + 1.0) * std::pow(2.0, -s) *
           inv_gamma_product(1.0 + s / 2 + n, 1.0 + s / 2 - n);
}

// Imaginary part of int_0^{2pi} cos(u/2) sin(u/2)^s e^{i n u} du (odd in n;
// the real part vanishes identically).
inline double sine_power_cos_half_coeff(double s, int n) {
    const double osgn = n >= 0 ? 1.0 : -1.0;
    n = std::abs(n);
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    const double t1 = inv_gamma_product((s + 3) / 2 + n, (s + 1) / 2 - n);
    const double t2 = inv_gamma_product((s + 1) / 2 + n, (s + 3) / 2 - n);
    return osgn * M_PI * sgn * gamma_real(s + 1.0) * std::pow(2.0, -s) * (t1 - t2);
}

// Eigenvalue of f -> int (f(x-u) - f(x)) / |sin(u/2)|^alpha du on a pure mode
// of absolute frequency k. Equals -singular_multiplier(alpha, k).
inline double sine_power_diff_coeff(Alpha alpha, int k) {
    if (k < 0) throw std::invalid_argument("sine_power_diff_coeff: k must be >= 0");
    if (k == 0) return 0.0;
    const double a = alpha.value();
    detail::warn_near_alpha_one(a);
    if (alpha.is_one()) {
        double lam = 0.0;
        for (int m = 1; m <= k; ++m) lam += 8.0 / (2.0 * m - 1.0);
        return -lam;
    }
    return sine_power_coeff(-a, k) - sine_power_coeff(-a, 0);
}

// lambda_k: the positive eigenvalue with
//   int (f(x) - f(x-u)) / |sin(u/2)|^alpha du = lambda_k f(x)
// for f a pure frequency-k mode (cosine or sine alike). Harmonic-sum branch
// exactly at alpha = 1, Gamma-ratio closed form otherwise.
inline double singular_multiplier(Alpha alpha, int k) {
    if (k < 1) throw std::invalid_argument("singular_multiplier: k must be >= 1");
    const double a = alpha.value();
    detail::warn_near_alpha_one(a);
    if (alpha.is_one()) {
        double lam = 0.0;
        for (int m = 1; m <= k; ++m) lam += 8.0 / (2.0 * m - 1.0);
        return lam;
    }
    const double pref = std::pow(2.0, a) * 2.0 * M_PI * gamma_real(1.0 - a) /
                        (gamma_real(a / 2) * gamma_real(1.0 - a / 2));
    const double ratio_k = gamma_ratio(k + a / 2, 1.0 + k - a / 2);
    return pref * (gamma_real(a / 2) / gamma_real(1.0 - a / 2) - ratio_k);
}

// Angular velocity of the mode-k neutral direction at the disk:
//   alpha != 1:  -2^{alpha-1} Gamma(1-alpha)/Gamma(1-alpha/2)^2
//                * (Gamma(1+alpha/2)/Gamma(2-alpha/2) - Gamma(k+alpha/2)/Gamma(1+k-alpha/2))
//   alpha  = 1:  -(2/pi) sum_{j=2}^{k} 1/(2j-1)
// The k = 1 value is exactly 0 (both Gamma ratios are evaluated through the
// same code path, so the bracket cancels identically).
inline double dispersion_omega(Alpha alpha, int k) {
    if (k < 1) throw std::invalid_argument("dispersion_omega: k must be >= 1");
    const double a = alpha.value();
    detail::warn_near_alpha_one(a);
    if (alpha.is_one()) {
        double s = 0.0;
        for (int j = 2; j <= k; ++j) s += 1.0 / (2.0 * j - 1.0);
        return -(2.0 / M_PI) * s;
    }
    const double pref = -std::pow(2.0, a - 1.0) * gamma_real(1.0 - a) /
                        (gamma_real(1.0 - a / 2) * gamma_real(1.0 - a / 2));
    const double r1 = gamma_ratio(1.0 + a / 2, 2.0 - a / 2);
    const double rk = gamma_ratio(k + a / 2, 1.0 + k - a / 2);
    return pref * (r1 - rk);
}

// Table of (k, omega_k), k = 1..k_max, strictly monotone in k.
struct DispersionTable {
    double alpha;
    std::vector<std::pair<int, double>> entries;
};

inline DispersionTable dispersion_table(Alpha alpha, int k_max) {
    if (k_max < 1) throw std::invalid_argument("dispersion_table: k_max must be >= 1");
    DispersionTable table;
    table.alpha = alpha.value();
    table.entries.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k)
        table.entries.emplace_back(k, dispersion_omega(alpha, k));
    for (int i = 1; i < k_max; ++i) {
        if (!(table.entries[i].second < table.entries[i - 1].second))
            throw std::runtime_error("dispersion_table: monotonicity violated");
    }
    return table;
}

} // namespace vstates

#endif
