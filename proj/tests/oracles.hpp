#ifndef VSTATES_TESTS_ORACLES_HPP
#define VSTATES_TESTS_ORACLES_HPP

// Test-only quadrature oracles. Deliberately independent of the library's
// evaluation machinery: plain double-exponential (tanh-sinh) quadrature, which
// handles the |u|^{-alpha}-type endpoint singularities of the kernels.

#include <cmath>
#include <complex>
#include <functional>

namespace oracles {

// Integrate f over (a,b). The integrand receives the distances to both
// endpoints alongside x so singular factors can be formed without
// cancellation: f(x, x-a, b-x).
template <class T, class F>
T tanh_sinh(F&& f, double a, double b, double tol = 1e-12, int max_level = 12) {
    const double radius = 0.5 * (b - a);
    const double center = 0.5 * (a + b);
    const double tmax = 6.8;

    auto eval_at = [&](double t) -> T {
        const double g = 0.5 * M_PI * std::sinh(t);
        // beyond this the node distance underflows enough that singular
        // factors up to strength 1.9 overflow before cancellation; the
        // discarded tail mass is < 1e-13 for the kernels tested here
        if (std::fabs(g) > 150.0) return T{};
        const double ch = std::cosh(g);
        const double w = 0.5 * M_PI * std::cosh(t) / (ch * ch);
        // 1 -+ tanh(g) without cancellation
        const double e = std::exp(-2.0 * std::fabs(g));
        const double dnear = radius * 2.0 * e / (1.0 + e); // distance to the nearer endpoint
        const double tanh_g = std::tanh(g);
        const double x = center + radius * tanh_g;
        const double da = (t >= 0.0) ? (b - a) - dnear : dnear;  // x - a
        const double db = (t >= 0.0) ? dnear : (b - a) - dnear;  // b - x
        return f(x, da, db) * (radius * w);
    };

    double h = 1.0;
    T sum = eval_at(0.0);
    for (int i = 1; i * h <= tmax; ++i) sum += eval_at(i * h) + eval_at(-i * h);
    T integral = sum * h;

    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        T refine{};
        for (int i = 1; (2 * i - 1) * h <= tmax; ++i) {
            refine += eval_at((2 * i - 1) * h);
            refine += eval_at(-(2 * i - 1) * h);
        }
        const T next = integral * 0.5 + refine * h;
        const double err = std::abs(next - integral);
        integral = next;
        if (level >= 3 && err < tol * (1.0 + std::abs(integral))) break;
    }
    return integral;
}

inline double tanh_sinh_real(const std::function<double(double, double, double)>& f, double a,
                             double b, double tol = 1e-12) {
    return tanh_sinh<double>(f, a, b, tol);
}

} // namespace oracles

#endif
