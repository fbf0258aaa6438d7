#ifndef VSTATES_EVOLUTION_HPP
#define VSTATES_EVOLUTION_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vstates/continuation.hpp"
#include "vstates/contour.hpp"
#include "vstates/functional.hpp"

namespace vstates {

struct EvolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contour-dynamics state in polar form. Rigid rotation breaks evenness, so the
// contour carries both parities on the m-fold lattice.
struct EvolutionState {
    double time;
    RadialContour contour;
};

// dR/dt = -(F1 + F2 + F3)(R) on the grid; valid for general (not necessarily
// even) star-shaped contours. At a rotating solution this equals -Omega R'.
inline std::vector<double> evolution_rhs(const RadialContour& contour, Alpha alpha,
                                         const QuadratureConfig& quad, int n_grid) {
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    return ws.rhs();
}

namespace detail {

struct CoeffVec {
    std::vector<double> c, s;
};

inline CoeffVec rhs_coeffs(int m, const CoeffVec& y, Alpha alpha, const QuadratureConfig& quad,
                           int n_grid) {
    RadialContour contour(m, y.c, y.s); // star-shape is checked by the workspace
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    const auto g = ws.rhs();
    const int n = contour.n_modes();
    CoeffVec out;
    out.c.assign(n, 0.0);
    out.s.assign(n, 0.0);
    const auto& x = ws.grid();
    for (int j = 1; j <= n; ++j) {
        const double k = static_cast<double>(j) * m;
        double ac = 0.0, as = 0.0;
        for (int i = 0; i < n_grid; ++i) {
            ac += g[i] * std::cos(k * x[i]);
            as += g[i] * std::sin(k * x[i]);
        }
        out.c[j - 1] = 2.0 * ac / n_grid;
        out.s[j - 1] = 2.0 * as / n_grid;
    }
    return out;
}

inline void tail_energy_guard(const CoeffVec& y) {
    const std::size_t n = y.c.size();
    double total = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double e = y.c[j] * y.c[j] + y.s[j] * y.s[j];
        total += e;
        if (j + 1 > 3 * n / 4) tail += e;
    }
    if (total > 0.0 && tail > 1e-6 * total)
        throw EvolutionError("rk4_step: spectral tail energy exceeds 1e-6 of total");
}

} // namespace detail

// Classical 4-stage explicit step on the coefficient vector. Modes beyond the
// stored truncation are dropped by the lattice projection (spectral filter).
// Stability requires dt * m * n_modes * |Omega-scale| = O(1); see
// heuristic_dt.
inline EvolutionState rk4_step(const EvolutionState& state, double dt, Alpha alpha,
                               const QuadratureConfig& quad, int n_grid) {
    if (!(dt >= 0.0)) throw std::invalid_argument("rk4_step: dt must be >= 0");
    const int m = state.contour.symmetry();
    const int n = state.contour.n_modes();
    detail::CoeffVec y{state.contour.cos_coeffs(), state.contour.sin_coeffs()};

    auto axpy = [n](const detail::CoeffVec& base, double fac, const detail::CoeffVec& d) {
        detail::CoeffVec out = base;
        for (int j = 0; j < n; ++j) {
            out.c[j] += fac * d.c[j];
            out.s[j] += fac * d.s[j];
        }
        return out;
    };
    const auto k1 = detail::rhs_coeffs(m, y, alpha, quad, n_grid);
    const auto k2 = detail::rhs_coeffs(m, axpy(y, 0.5 * dt, k1), alpha, quad, n_grid);
    const auto k3 = detail::rhs_coeffs(m, axpy(y, 0.5 * dt, k2), alpha, quad, n_grid);
    const auto k4 = detail::rhs_coeffs(m, axpy(y, dt, k3), alpha, quad, n_grid);

    detail::CoeffVec ynew = y;
    for (int j = 0; j < n; ++j) {
        ynew.c[j] += dt / 6.0 * (k1.c[j] + 2.0 * (k2.c[j] + k3.c[j]) + k4.c[j]);
        ynew.s[j] += dt / 6.0 * (k1.s[j] + 2.0 * (k2.s[j] + k3.s[j]) + k4.s[j]);
    }
    detail::tail_energy_guard(ynew);
    return EvolutionState{state.time + dt, RadialContour(m, std::move(ynew.c), std::move(ynew.s))};
}

// Step-size heuristic dt = 0.1 / (M * scale), M = m*n_modes the top lattice
// frequency and scale the larger of |Omega_M| and the branch |Omega|; keeps
// the fastest resolved mode well inside the RK4 stability region.
inline double heuristic_dt(Alpha alpha, int m, int n_modes, double omega) {
    const int M = m * n_modes;
    const double scale = std::max({std::fabs(dispersion_omega(alpha, M)), std::fabs(omega), 0.1});
    return 0.1 / (M * scale);
}

struct RigidRotationReport {
    double max_error;  // max over checkpoints of sup_x |R(x,t) - R*(x - Omega t)|
    double area_drift; // max over checkpoints of |area(t)-area(0)|/area(0)
    int steps;
};

// Integrate a converged point over [0, t_final] and compare against the
// exactly rotated profile; the patch area is tracked as a conservation check.
inline RigidRotationReport rigid_rotation_error(const BranchPoint& point, double t_final,
                                                double dt, const QuadratureConfig& quad,
                                                int n_grid,
                                                std::vector<std::array<double, 3>>* checkpoints
                                                    = nullptr) {
    if (!(t_final > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("rigid_rotation_error: need positive t_final and dt");
    Alpha alpha(point.alpha);
    const RadialContour& ref = point.contour;
    const int m = ref.symmetry();
    const int n = ref.n_modes();
    const auto x = uniform_grid(n_grid);

    EvolutionState state{0.0, ref};
    const double area0 = patch_area(ref);
    RigidRotationReport rep{0.0, 0.0, 0};

    const int steps = static_cast<int>(std::ceil(t_final / dt - 1e-12));
    const int stride = std::max(1, steps / 128);
    auto check = [&](const EvolutionState& st) {
        const RadialContour rot = rotate(ref, point.omega * st.time);
        std::vector<double> dc(n), ds(n);
        for (int j = 0; j < n; ++j) {
            dc[j] = st.contour.cos_coeffs()[j] - rot.cos_coeffs()[j];
            ds[j] = st.contour.sin_coeffs()[j] - rot.sin_coeffs()[j];
        }
        const auto diff = sample_series(m, dc, ds, 0.0, x);
        double sup = 0.0;
        for (double v : diff.v) sup = std::max(sup, std::fabs(v));
        rep.max_error = std::max(rep.max_error, sup);
        const double drift = std::fabs(patch_area(st.contour) - area0) / area0;
        rep.area_drift = std::max(rep.area_drift, drift);
        if (checkpoints) checkpoints->push_back({st.time, sup, patch_area(st.contour)});
    };

    check(state);
    for (int k = 0; k < steps; ++k) {
        const double step_dt = std::min(dt, t_final - state.time);
        state = rk4_step(state, step_dt, alpha, quad, n_grid);
        if (k % stride == stride - 1 || k == steps - 1) check(state);
        ++rep.steps;
    }
    return rep;
}

// Drop trailing modes whose mass sits below `floor`; used to size the
// evolution lattice from a converged point without changing it materially.
inline RadialContour truncate_contour(const RadialContour& contour, double floor,
                                      int min_modes = 4) {
    int keep = min_modes;
    for (int j = contour.n_modes(); j >= 1; --j) {
        if (std::fabs(contour.cos_coeff(j)) + std::fabs(contour.sin_coeff(j)) > floor) {
            keep = std::max(min_modes, j);
            break;
        }
    }
    keep = std::min(keep, contour.n_modes());
    std::vector<double> c(contour.cos_coeffs().begin(), contour.cos_coeffs().begin() + keep);
    std::vector<double> s(contour.sin_coeffs().begin(), contour.sin_coeffs().begin() + keep);
    return RadialContour(contour.symmetry(), std::move(c), std::move(s));
}

} // namespace vstates

#endif
