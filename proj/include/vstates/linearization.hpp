#ifndef VSTATES_LINEARIZATION_HPP
#define VSTATES_LINEARIZATION_HPP

#include <stdexcept>
#include <vector>

#include "vstates/functional.hpp"

namespace vstates {

// Directional derivative of the functional on the grid:
//   Omega h'(x) - sum_i D_i[R]h(x),
// evaluated with the same kernel splitting as the functional itself. The
// perturbation h is a pure coefficient series (base radius 0).
inline std::vector<double> gateaux(double omega, const RadialContour& contour,
                                   const RadialContour& h, Alpha alpha,
                                   const QuadratureConfig& quad, int n_grid) {
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    return ws.gateaux(omega, h);
}

// Forward difference quotient (F(Omega, R + t h) - F(Omega, R))/t; test oracle.
inline std::vector<double> fd_gateaux(double omega, const RadialContour& contour,
                                      const RadialContour& h, Alpha alpha,
                                      const QuadratureConfig& quad, int n_grid, double t) {
    if (t == 0.0) throw std::invalid_argument("fd_gateaux: t must be nonzero");
    if (h.symmetry() != contour.symmetry() || h.n_modes() != contour.n_modes())
        throw std::invalid_argument("fd_gateaux: perturbation must share the contour lattice");
    std::vector<double> c = contour.cos_coeffs(), s = contour.sin_coeffs();
    for (int j = 0; j < contour.n_modes(); ++j) {
        c[j] += t * h.cos_coeffs()[j];
        s[j] += t * h.sin_coeffs()[j];
    }
    RadialContour shifted(contour.symmetry(), std::move(c), std::move(s));
    const auto f0 = eval_functional(omega, contour, alpha, quad, n_grid);
    const auto f1 = eval_functional(omega, shifted, alpha, quad, n_grid);
    std::vector<double> out(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) out[i] = (f1[i] - f0[i]) / t;
    return out;
}

// dF/dOmega = R' on the grid.
inline std::vector<double> d_omega(const RadialContour& contour, int n_grid) {
    return evaluate(contour, n_grid).d1;
}

// Dense matrix of the linearization on the m-fold cosine basis: entry (r, j)
// is the sine-mode-r*m response to the cosine-mode-j*m perturbation, plus the
// dOmega column (sine projection of R').
struct JacobianMatrix {
    int n = 0;
    std::vector<double> entries;    // column-major, n x n
    std::vector<double> omega_col;  // length n

    double at(int row, int col) const { return entries[static_cast<std::size_t>(col) * n + row]; }
};

inline JacobianMatrix assemble_jacobian(double omega, const RadialContour& contour, Alpha alpha,
                                        const QuadratureConfig& quad, int n_grid, int n) {
    if (n < 1 || n > contour.n_modes())
        throw std::invalid_argument("assemble_jacobian: need 1 <= n <= contour.n_modes()");
    if (!contour.is_even())
        throw std::invalid_argument("assemble_jacobian: contour must be cosine-only");
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    JacobianMatrix jac;
    jac.n = n;
    ws.basis_jacobian_sine(omega, n, n, jac.entries);
    jac.omega_col.assign(n, 0.0);
    for (int j = 1; j <= n; ++j)
        jac.omega_col[j - 1] = -static_cast<double>(j) * contour.symmetry() * contour.cos_coeff(j);
    return jac;
}

} // namespace vstates

#endif
