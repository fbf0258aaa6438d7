#ifndef VSTATES_LINALG_HPP
#define VSTATES_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vstates {

// Dense LU with partial pivoting for the small Newton systems (n <= ~130).
// Matrix is column-major: a[j*n + i].
struct LuFactors {
    int n = 0;
    std::vector<double> lu;   // column-major
    std::vector<int> piv;
    bool singular = false;
};

inline LuFactors lu_factor(std::vector<double> a, int n) {
    LuFactors f;
    f.n = n;
    f.lu = std::move(a);
    f.piv.resize(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(f.lu[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(f.lu[k * n + i]);
            if (v > best) { best = v; p = i; }
        }
        f.piv[k] = p;
        if (best == 0.0) { f.singular = true; return f; }
        if (p != k)
            for (int j = 0; j < n; ++j) std::swap(f.lu[j * n + k], f.lu[j * n + p]);
        const double d = f.lu[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double l = f.lu[k * n + i] / d;
            f.lu[k * n + i] = l;
            for (int j = k + 1; j < n; ++j) f.lu[j * n + i] -= l * f.lu[j * n + k];
        }
    }
    return f;
}

inline std::vector<double> lu_solve(const LuFactors& f, std::vector<double> b) {
    if (f.singular) throw std::runtime_error("lu_solve: singular factorization");
    const int n = f.n;
    for (int k = 0; k < n; ++k) {
        if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
        for (int i = k + 1; i < n; ++i) b[i] -= f.lu[k * n + i] * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
        b[k] /= f.lu[k * n + k];
        for (int i = 0; i < k; ++i) b[i] -= f.lu[k * n + i] * b[k];
    }
    return b;
}

inline double matrix_norm1(const std::vector<double>& a, int n) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += std::fabs(a[j * n + i]);
        best = std::max(best, col);
    }
    return best;
}

// 1-norm condition estimate via the explicit inverse; adequate at this scale.
inline double condition_estimate(const std::vector<double>& a, const LuFactors& f) {
    if (f.singular) return std::numeric_limits<double>::infinity();
    const int n = f.n;
    double inv_norm = 0.0;
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        const auto col = lu_solve(f, e);
        double sum = 0.0;
        for (double v : col) sum += std::fabs(v);
        inv_norm = std::max(inv_norm, sum);
    }
    return matrix_norm1(a, n) * inv_norm;
}

} // namespace vstates

#endif
