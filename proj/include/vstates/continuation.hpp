#ifndef VSTATES_CONTINUATION_HPP
#define VSTATES_CONTINUATION_HPP

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vstates/contour.hpp"
#include "vstates/functional.hpp"
#include "vstates/linalg.hpp"
#include "vstates/linearization.hpp"
#include "vstates/special.hpp"

namespace vstates {

struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& what, double condition_estimate = 0.0)
        : std::runtime_error(what), condition(condition_estimate) {}
    double condition;
};

// One converged rotating solution.
struct BranchPoint {
    double alpha;
    int m;
    double s;     // amplitude of the primary mode, c_1 fixed
    double omega;
    RadialContour contour; // even
    double residual_norm;
    double min_curvature;
    int newton_iters;
    std::vector<double> residual_history; // per-iteration max-abs residuals
};

struct SolverOptions {
    int n_modes = 32;
    int grid_points = 256;
    QuadratureConfig quad{};
    double newton_tol = 1e-10;
    int max_iters = 12;
    double solver_ball = 0.3; // |s| bound mirroring the small-amplitude regime
    double condition_limit = 1e12;
};

struct BranchConfig {
    double alpha = 1.0;
    int m = 3;
    double ds = 1e-3;
    double s_max = 2e-2;
    SolverOptions solver{};
};

struct Branch {
    BranchConfig config;
    std::vector<BranchPoint> points;
    bool complete = false;
    std::string diagnostic;
};

// Omega_m of the m-fold bifurcation from the disk; requires m >= 2 (the m = 1
// value is 0 and corresponds to translations, not a bifurcation).
inline double bifurcation_point(Alpha alpha, int m) {
    if (m < 2) throw std::invalid_argument("bifurcation_point: m must be >= 2");
    return dispersion_omega(alpha, m);
}

// Evaluation grid: the configured size, floored at the anti-aliasing margin.
inline int solver_grid(int grid_points, int m, int n_modes) {
    return std::max(grid_points, 4 * m * n_modes);
}

// Solve the projected system b_1..b_n = 0 in the unknowns (Omega, c_2..c_n)
// with the mode-m amplitude pinned to s. Quadratic convergence near the
// branch; SolveError on divergence, star-shape loss or an ill-conditioned
// Jacobian (condition estimate attached).
inline BranchPoint newton_solve(Alpha alpha, int m, double s, double omega_guess,
                                const RadialContour& contour_guess, const SolverOptions& opt) {
    if (m < 2) throw std::invalid_argument("newton_solve: m must be >= 2");
    if (std::fabs(s) > opt.solver_ball)
        throw SolveError("newton_solve: amplitude outside the solver ball |s| <= " +
                         format_g17(opt.solver_ball));
    const int n = opt.n_modes;
    if (contour_guess.symmetry() != m || contour_guess.n_modes() != n)
        throw std::invalid_argument("newton_solve: guess does not match (m, n_modes)");
    const int N = solver_grid(opt.grid_points, m, n);

    if (s == 0.0) {
        // the system is degenerate at the disk: F(Omega, 1) = 0 for every Omega
        RadialContour disk = RadialContour::disk(m, n);
        return BranchPoint{alpha.value(), m, 0.0, omega_guess, disk, 0.0, 1.0, 0, {}};
    }

    std::vector<double> c = contour_guess.cos_coeffs();
    c[0] = s;
    double omega = omega_guess;
    std::vector<double> history;

    for (int iter = 0; iter <= opt.max_iters; ++iter) {
        RadialContour contour(m, c);
        if (contour.coefficient_l1() >= 1.0)
            throw SolveError("newton_solve: coefficient mass leaves the unit ball");
        FunctionalWorkspace ws(contour, alpha, opt.quad, N); // throws StarShapeError
        const auto fgrid = ws.functional(omega);
        if (ws.nonsine_energy_fraction(fgrid, n) > 1e-10)
            throw SymmetryError("newton_solve: residual leaks outside lattice sine modes");
        const SineSeries b = ws.project_sine(fgrid, n);
        const double res = b.max_abs();
        history.push_back(res);

        if (res <= opt.newton_tol) {
            const auto conv = is_convex(contour, N);
            return BranchPoint{alpha.value(), m, s, omega, contour, res, conv.min_curvature,
                               iter, history};
        }
        if (iter == opt.max_iters)
            throw SolveError("newton_solve: residual " + format_g17(res) + " above tolerance after " +
                             std::to_string(opt.max_iters) + " iterations");

        // Newton matrix: column 0 = dOmega (sine projection of R'), then the
        // cosine-basis columns j = 2..n.
        std::vector<double> cols;
        ws.basis_jacobian_sine(omega, n, n, cols);
        std::vector<double> J(static_cast<std::size_t>(n) * n);
        for (int r = 0; r < n; ++r)
            J[r] = -static_cast<double>(r + 1) * m * c[r]; // d/dOmega of b_r
        for (int jc = 2; jc <= n; ++jc)
            for (int r = 0; r < n; ++r)
                J[static_cast<std::size_t>(jc - 1) * n + r] =
                    cols[static_cast<std::size_t>(jc - 1) * n + r];

        LuFactors lu = lu_factor(J, n);
        if (lu.singular) throw SolveError("newton_solve: singular Jacobian",
                                          std::numeric_limits<double>::infinity());
        const double cond = condition_estimate(J, lu);
        if (cond > opt.condition_limit)
            throw SolveError("newton_solve: Jacobian condition estimate " + format_g17(cond) +
                             " exceeds limit", cond);
        std::vector<double> rhs(n);
        for (int r = 0; r < n; ++r) rhs[r] = -b.coeffs[r];
        const auto delta = lu_solve(lu, std::move(rhs));
        omega += delta[0];
        for (int jc = 2; jc <= n; ++jc) c[jc - 1] += delta[jc - 1];
    }
    throw SolveError("newton_solve: unreachable");
}

// Trace the m-fold branch out of the disk: points at s = ds, 2ds, ... with a
// linear predictor, one half-step retry per failed step. Returns the partial
// branch with a diagnostic when the trace stops early.
inline Branch trace_branch(Alpha alpha, int m, double s_max, double ds, const SolverOptions& opt) {
    if (m < 2) throw std::invalid_argument("trace_branch: m must be >= 2");
    if (!(ds > 0.0) || !(s_max >= ds))
        throw std::invalid_argument("trace_branch: need 0 < ds <= s_max");
    Branch branch;
    branch.config = BranchConfig{alpha.value(), m, ds, s_max, opt};

    const double omega_m = bifurcation_point(alpha, m);
    const double domega_bound = 100.0 * ds * (1.0 + std::fabs(omega_m));
    const int n = opt.n_modes;

    double s = 0.0;
    bool retried = false;
    while (s + 0.5 * ds <= s_max) {
        double step = std::min(ds, s_max - s);
        if (retried) step = 0.5 * std::min(ds, s_max - s);
        const double s_next = s + step;
        if (s_next > opt.solver_ball) {
            branch.diagnostic = "amplitude " + format_g17(s_next) + " beyond solver ball " +
                                format_g17(opt.solver_ball);
            return branch;
        }

        // predictor
        double omega_guess;
        std::vector<double> c(n, 0.0);
        const std::size_t np = branch.points.size();
        if (np == 0) {
            omega_guess = omega_m;
        } else if (np == 1) {
            omega_guess = branch.points[0].omega;
            c = branch.points[0].contour.cos_coeffs();
        } else {
            const BranchPoint& p1 = branch.points[np - 2];
            const BranchPoint& p2 = branch.points[np - 1];
            const double w = (s_next - p2.s) / (p2.s - p1.s);
            omega_guess = p2.omega + w * (p2.omega - p1.omega);
            for (int j = 0; j < n; ++j)
                c[j] = p2.contour.cos_coeff(j + 1) +
                       w * (p2.contour.cos_coeff(j + 1) - p1.contour.cos_coeff(j + 1));
        }
        c[0] = s_next;

        try {
            RadialContour guess(m, c);
            BranchPoint point = newton_solve(alpha, m, s_next, omega_guess, guess, opt);
            if (!branch.points.empty() &&
                std::fabs(point.omega - branch.points.back().omega) > domega_bound) {
                branch.diagnostic = "omega jump " +
                                    format_g17(point.omega - branch.points.back().omega) +
                                    " at s = " + format_g17(s_next);
                return branch;
            }
            branch.points.push_back(std::move(point));
            s = s_next;
            retried = false;
        } catch (const std::exception& e) {
            if (retried || branch.points.empty()) {
                branch.diagnostic = std::string("stopped at s = ") + format_g17(s_next) + ": " +
                                    e.what();
                return branch;
            }
            retried = true; // halve the step once, from the last accepted point
        }
    }
    branch.complete = true;
    return branch;
}

// ---- persistence ---------------------------------------------------------
// One line per point: alpha,m,s,omega,residual_norm,newton_iters,
// min_curvature,n_modes,c_1..c_n. Floats at 17 significant digits; the header
// line carries the trace configuration. Round-trips bit-exactly.

inline void write_branch(std::ostream& out, const Branch& branch) {
    const BranchConfig& cfg = branch.config;
    out << "# alpha=" << format_g17(cfg.alpha) << " m=" << cfg.m
        << " n_modes=" << cfg.solver.n_modes << " grid=" << cfg.solver.grid_points
        << " quad=" << cfg.solver.quad.n_nodes
        << " splitting=" << (cfg.solver.quad.splitting == Splitting::full_split ? "full_split"
                                                                                : "midpoint_only")
        << " newton_tol=" << format_g17(cfg.solver.newton_tol) << " ds=" << format_g17(cfg.ds)
        << " s_max=" << format_g17(cfg.s_max) << '\n';
    for (const BranchPoint& p : branch.points) {
        out << format_g17(p.alpha) << ',' << p.m << ',' << format_g17(p.s) << ','
            << format_g17(p.omega) << ',' << format_g17(p.residual_norm) << ',' << p.newton_iters
            << ',' << format_g17(p.min_curvature) << ',' << p.contour.n_modes();
        for (int j = 1; j <= p.contour.n_modes(); ++j)
            out << ',' << format_g17(p.contour.cos_coeff(j));
        out << '\n';
    }
}

inline Branch read_branch(std::istream& in) {
    Branch branch;
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#')
        throw std::runtime_error("read_branch: missing header line");
    {
        std::istringstream hs(line.substr(1));
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "alpha") branch.config.alpha = std::stod(val);
            else if (key == "m") branch.config.m = std::stoi(val);
            else if (key == "n_modes") branch.config.solver.n_modes = std::stoi(val);
            else if (key == "grid") branch.config.solver.grid_points = std::stoi(val);
            else if (key == "quad") branch.config.solver.quad.n_nodes = std::stoi(val);
            else if (key == "splitting")
                branch.config.solver.quad.splitting =
                    val == "midpoint_only" ? Splitting::midpoint_only : Splitting::full_split;
            else if (key == "newton_tol") branch.config.solver.newton_tol = std::stod(val);
            else if (key == "ds") branch.config.ds = std::stod(val);
            else if (key == "s_max") branch.config.s_max = std::stod(val);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        auto next = [&]() {
            if (!std::getline(ls, field, ',')) throw std::runtime_error("read_branch: short row");
            return field;
        };
        BranchPoint p{0.0, 0, 0.0, 0.0, RadialContour::disk(1, 1), 0.0, 0.0, 0, {}};
        p.alpha = std::stod(next());
        p.m = std::stoi(next());
        p.s = std::stod(next());
        p.omega = std::stod(next());
        p.residual_norm = std::stod(next());
        p.newton_iters = std::stoi(next());
        p.min_curvature = std::stod(next());
        const int n = std::stoi(next());
        std::vector<double> c(n);
        for (int j = 0; j < n; ++j) c[j] = std::stod(next());
        p.contour = RadialContour(p.m, std::move(c));
        branch.points.push_back(std::move(p));
    }
    branch.complete = true; // persisted branches carry no failure state
    return branch;
}

} // namespace vstates

#endif
