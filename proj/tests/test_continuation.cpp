#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "vstates/continuation.hpp"

using namespace vstates;

namespace {

SolverOptions small_options() {
    SolverOptions opt;
    opt.n_modes = 10;
    opt.grid_points = 128;
    opt.quad.n_nodes = 512;
    return opt;
}

} // namespace

TEST_CASE("bifurcation point values") {
    CHECK(bifurcation_point(Alpha(1.0), 2) == Catch::Approx(-2.0 / (3.0 * M_PI)).epsilon(1e-14));
    CHECK(bifurcation_point(Alpha(1.0), 3) == Catch::Approx(-16.0 / (15.0 * M_PI)).epsilon(1e-14));
    CHECK_THROWS_AS(bifurcation_point(Alpha(1.0), 1), std::invalid_argument);
}

TEST_CASE("bifurcation point zeroes the mode-m diagonal entry") {
    // root of the Jacobian diagonal at the disk vs the closed form
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 2, n = 4, N = 64;
    const double om = bifurcation_point(Alpha(1.5), m);
    const auto jac = assemble_jacobian(om, RadialContour::disk(m, n), Alpha(1.5), quad, N, n);
    CHECK(std::fabs(jac.at(0, 0)) < 1e-10);
    // and it is a sign change: nearby omegas give nonzero entries of opposite sign
    const auto jp = assemble_jacobian(om + 0.01, RadialContour::disk(m, n), Alpha(1.5), quad, N, n);
    const auto jm = assemble_jacobian(om - 0.01, RadialContour::disk(m, n), Alpha(1.5), quad, N, n);
    CHECK(jp.at(0, 0) * jm.at(0, 0) < 0.0);
}

TEST_CASE("newton solve at s = 0 returns the disk") {
    const auto opt = small_options();
    const auto p = newton_solve(Alpha(1.0), 3, 0.0, 0.7531, RadialContour::disk(3, opt.n_modes), opt);
    CHECK(p.omega == 0.7531);
    CHECK(p.residual_norm == 0.0);
    CHECK(p.newton_iters == 0);
    CHECK(p.contour.coefficient_l1() == 0.0);
}

TEST_CASE("newton solve converges from the bifurcation guess") {
    const auto opt = small_options();
    const int m = 3;
    const double s = 1e-3;
    const double om3 = bifurcation_point(Alpha(1.0), m);
    const auto p = newton_solve(Alpha(1.0), m, s, om3,
                                RadialContour::cosine(m, opt.n_modes, s), opt);
    CHECK(p.residual_norm <= opt.newton_tol);
    CHECK(p.contour.cos_coeff(1) == s);
    CHECK(p.contour.is_even());
    CHECK(p.min_curvature > 0.0);
    // the branch omega approaches the bifurcation value quadratically in s
    CHECK(std::fabs(p.omega - om3) < 1e-5);
    CHECK(std::fabs(p.omega - om3) > 1e-8);

    // frozen regression value (first run executed with refinement_check on)
    CHECK(p.omega == Catch::Approx(-0.33953125662697).margin(1e-11));

    // continuation property: the next amplitude converges in few iterations
    const auto p2 = newton_solve(Alpha(1.0), m, 1e-2, p.omega, p.contour, opt);
    CHECK(p2.newton_iters <= 6);
    CHECK(p2.residual_norm <= opt.newton_tol);
}

TEST_CASE("newton solve quadratic tail") {
    const auto opt = small_options();
    const int m = 3;
    const double om3 = bifurcation_point(Alpha(1.0), m);
    const auto p = newton_solve(Alpha(1.0), m, 2e-2, om3,
                                RadialContour::cosine(m, opt.n_modes, 2e-2), opt);
    const auto& hist = p.residual_history;
    REQUIRE(hist.size() >= 3);
    for (std::size_t i = hist.size() - 2; i < hist.size(); ++i) {
        if (hist[i] > 1e-14)
            CHECK(hist[i - 1] / hist[i] >= 1e3);
    }
}

TEST_CASE("newton solve rejects amplitudes outside the solver ball") {
    const auto opt = small_options();
    CHECK_THROWS_AS(newton_solve(Alpha(1.0), 3, 0.4, -0.3, RadialContour::cosine(3, 10, 0.4), opt),
                    SolveError);
}

TEST_CASE("trace branch near the disk") {
    const auto opt = small_options();
    const auto branch = trace_branch(Alpha(1.0), 3, 5e-3, 1e-3, opt);
    REQUIRE(branch.complete);
    REQUIRE(branch.points.size() == 5);
    const double om3 = bifurcation_point(Alpha(1.0), 3);
    // s is strictly increasing and every point is converged and convex
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        const auto& p = branch.points[i];
        CHECK(p.residual_norm <= opt.newton_tol);
        CHECK(p.min_curvature > 0.0);
        if (i > 0) CHECK(p.s > branch.points[i - 1].s);
    }
    // quadratic extrapolation of omega(s) to s = 0 recovers the bifurcation value
    const auto& p1 = branch.points[0];
    const auto& p2 = branch.points[1];
    const double om0 = (p1.omega * p2.s * p2.s - p2.omega * p1.s * p1.s) /
                       (p2.s * p2.s - p1.s * p1.s);
    CHECK(std::fabs(om0 - om3) < 1e-4);

    CHECK_THROWS_AS(trace_branch(Alpha(1.0), 1, 5e-3, 1e-3, opt), std::invalid_argument);
}

TEST_CASE("trace branch is stable under node doubling") {
    auto opt = small_options();
    opt.n_modes = 8;
    const auto b1 = trace_branch(Alpha(1.0), 3, 3e-3, 1e-3, opt);
    auto opt2 = opt;
    opt2.quad.n_nodes = 1024;
    const auto b2 = trace_branch(Alpha(1.0), 3, 3e-3, 1e-3, opt2);
    REQUIRE(b1.points.size() == b2.points.size());
    for (std::size_t i = 0; i < b1.points.size(); ++i)
        CHECK(std::fabs(b1.points[i].omega - b2.points[i].omega) < 1e-7);
}

TEST_CASE("trace branch stops at the solver ball with a diagnostic") {
    auto opt = small_options();
    opt.n_modes = 8;
    const auto branch = trace_branch(Alpha(1.0), 3, 0.5, 0.1, opt);
    CHECK_FALSE(branch.complete);
    CHECK_FALSE(branch.diagnostic.empty());
    CHECK(branch.points.size() < 5);
}

TEST_CASE("branch persistence round trip") {
    auto opt = small_options();
    opt.n_modes = 6;
    const auto branch = trace_branch(Alpha(1.0), 3, 2e-3, 1e-3, opt);
    REQUIRE(branch.complete);
    std::ostringstream os;
    write_branch(os, branch);
    std::istringstream is(os.str());
    const Branch back = read_branch(is);
    REQUIRE(back.points.size() == branch.points.size());
    CHECK(back.config.alpha == branch.config.alpha);
    CHECK(back.config.m == branch.config.m);
    CHECK(back.config.solver.quad.n_nodes == branch.config.solver.quad.n_nodes);
    for (std::size_t i = 0; i < back.points.size(); ++i) {
        CHECK(back.points[i].s == branch.points[i].s);
        CHECK(back.points[i].omega == branch.points[i].omega);
        CHECK(back.points[i].residual_norm == branch.points[i].residual_norm);
        CHECK(back.points[i].min_curvature == branch.points[i].min_curvature);
        for (int j = 1; j <= opt.n_modes; ++j)
            CHECK(back.points[i].contour.cos_coeff(j) == branch.points[i].contour.cos_coeff(j));
    }
    std::ostringstream os2;
    write_branch(os2, back);
    CHECK(os.str() == os2.str());
}

TEST_CASE("branches exist on both sides of alpha = 1") {
    auto opt = small_options();
    opt.n_modes = 8;
    const auto b_low = trace_branch(Alpha(0.5), 2, 2e-3, 1e-3, opt);
    CHECK(b_low.complete);
    CHECK(b_low.points.size() == 2);
    const auto b_high = trace_branch(Alpha(1.5), 3, 2e-3, 1e-3, opt);
    CHECK(b_high.complete);
    for (const auto& p : b_high.points) CHECK(p.residual_norm <= opt.newton_tol);
}
