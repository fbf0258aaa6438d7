#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vstates/linearization.hpp"

using namespace vstates;

namespace {

RadialContour basis(int m, int n, int j) {
    std::vector<double> c(n, 0.0), s(n, 0.0);
    c[j - 1] = 1.0;
    return RadialContour(m, std::move(c), std::move(s));
}

double sine_proj(const std::vector<double>& g, int k) {
    const int N = static_cast<int>(g.size());
    double acc = 0.0;
    for (int i = 0; i < N; ++i) acc += g[i] * std::sin(k * (2.0 * M_PI * i / N));
    return 2.0 * acc / N;
}

} // namespace

TEST_CASE("diagonal law at the disk") {
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 3, n = 8, N = 128;
    const RadialContour disk = RadialContour::disk(m, n);
    for (double a : {0.5, 1.0, 1.5}) {
        const double omega = 0.2;
        for (int j : {1, 2, 5, 8}) {
            const auto g = gateaux(omega, disk, basis(m, n, j), Alpha(a), quad, N);
            const int k = j * m;
            const double target = -k * (omega - dispersion_omega(Alpha(a), k));
            CHECK(sine_proj(g, k) == Catch::Approx(target).epsilon(1e-8));
            // no leakage into other lattice modes
            for (int j2 = 1; j2 <= n; ++j2)
                if (j2 != j) CHECK(std::fabs(sine_proj(g, j2 * m)) < 1e-10 * std::fabs(target));
        }
    }
}

TEST_CASE("zero perturbation maps to zero") {
    QuadratureConfig quad;
    quad.n_nodes = 256;
    const RadialContour con(3, {0.02, 0.004});
    std::vector<double> z(2, 0.0);
    const auto g = gateaux(0.5, con, RadialContour(3, z, z), Alpha(1.5), quad, 64);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("gateaux linearity") {
    QuadratureConfig quad;
    quad.n_nodes = 256;
    const int m = 3, n = 4, N = 64;
    const RadialContour con(m, {0.03, 0.006, 0.0, 0.0});
    const RadialContour h1 = basis(m, n, 1);
    const RadialContour h2 = basis(m, n, 3);
    std::vector<double> c(n, 0.0);
    c[0] = 0.7;
    c[2] = -1.3;
    const RadialContour h12(m, c);
    const auto g1 = gateaux(0.1, con, h1, Alpha(1.25), quad, N);
    const auto g2 = gateaux(0.1, con, h2, Alpha(1.25), quad, N);
    const auto g12 = gateaux(0.1, con, h12, Alpha(1.25), quad, N);
    for (int i = 0; i < N; ++i)
        CHECK(g12[i] == Catch::Approx(0.7 * g1[i] - 1.3 * g2[i]).margin(1e-10));
}

TEST_CASE("gateaux against finite differences") {
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 3, n = 6, N = 96;
    const RadialContour con(m, {0.02, 0.005, 0.001, 0.0, 0.0, 0.0});
    const RadialContour h = basis(m, n, 2);
    const double omega = -0.5;
    const auto g = gateaux(omega, con, h, Alpha(1.5), quad, N);

    // first-order convergence: error scales like t
    double prev_err = 0.0;
    int step = 0;
    for (double t : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
        const auto fd = fd_gateaux(omega, con, h, Alpha(1.5), quad, N, t);
        double err = 0.0;
        for (int i = 0; i < N; ++i) err = std::max(err, std::fabs(fd[i] - g[i]));
        if (step > 0) CHECK(prev_err / err == Catch::Approx(2.0).margin(0.4));
        prev_err = err;
        ++step;
    }

    // log-log slope of the FD error in t is 1 within 0.2
    std::vector<double> ts, es;
    for (double t : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const auto fd = fd_gateaux(omega, con, h, Alpha(1.5), quad, N, t);
        double err = 0.0;
        for (int i = 0; i < N; ++i) err = std::max(err, std::fabs(fd[i] - g[i]));
        ts.push_back(std::log(t));
        es.push_back(std::log(err));
    }
    double st = 0, se = 0, stt = 0, ste = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        se += es[i];
        stt += ts[i] * ts[i];
        ste += ts[i] * es[i];
    }
    const double nn = static_cast<double>(ts.size());
    const double slope = (nn * ste - st * se) / (nn * stt - st * st);
    CHECK(slope == Catch::Approx(1.0).margin(0.2));
}

TEST_CASE("fd_gateaux contracts") {
    QuadratureConfig quad;
    quad.n_nodes = 256;
    const RadialContour con(3, {0.02});
    CHECK_THROWS_AS(fd_gateaux(0.0, con, basis(3, 1, 1), Alpha(1.0), quad, 64, 0.0),
                    std::invalid_argument);
    // perturbed contour must stay star-shaped
    CHECK_THROWS_AS(fd_gateaux(0.0, con, basis(3, 1, 1), Alpha(1.0), quad, 64, 1.5),
                    StarShapeError);
    // h = 0 gives 0
    std::vector<double> z(1, 0.0);
    const auto fd = fd_gateaux(0.0, con, RadialContour(3, z, z), Alpha(1.0), quad, 64, 1e-6);
    for (double v : fd) CHECK(v == 0.0);
}

TEST_CASE("disk linearization through a small finite difference") {
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 3, n = 4, N = 64;
    const RadialContour disk = RadialContour::disk(m, n);
    const auto fd = fd_gateaux(0.1, disk, basis(m, n, 1), Alpha(1.0), quad, N, 1e-6);
    const double target = -m * (0.1 - dispersion_omega(Alpha(1.0), m));
    CHECK(sine_proj(fd, m) == Catch::Approx(target).margin(1e-5));
}

TEST_CASE("d_omega") {
    const RadialContour disk = RadialContour::disk(2, 4);
    for (double v : d_omega(disk, 64)) CHECK(v == 0.0);

    const RadialContour c(2, {0.1});
    const auto d = d_omega(c, 64);
    const auto g = evaluate(c, 64);
    for (int i = 0; i < 64; ++i) {
        const double x = 2.0 * M_PI * i / 64;
        CHECK(d[i] == Catch::Approx(-0.2 * std::sin(2 * x)).margin(1e-15));
        CHECK(d[i] == g.d1[i]); // definitionally the same samples
    }
}

TEST_CASE("jacobian at the disk is diagonal") {
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 3, n = 8, N = 128;
    const RadialContour disk = RadialContour::disk(m, n);
    const auto jac = assemble_jacobian(0.0, disk, Alpha(1.0), quad, N, n);
    double diag_scale = 0.0;
    for (int j = 1; j <= n; ++j)
        diag_scale = std::max(diag_scale, std::fabs(jac.at(j - 1, j - 1)));
    for (int j = 1; j <= n; ++j) {
        const int k = j * m;
        const double target = -k * (0.0 - dispersion_omega(Alpha(1.0), k));
        CHECK(jac.at(j - 1, j - 1) == Catch::Approx(target).epsilon(1e-6));
        for (int r = 1; r <= n; ++r)
            if (r != j) CHECK(std::fabs(jac.at(r - 1, j - 1)) <= 1e-8 * diag_scale);
    }
    // dOmega column of the disk vanishes (R' = 0)
    for (int r = 0; r < n; ++r) CHECK(jac.omega_col[r] == 0.0);
}

TEST_CASE("kernel column at the bifurcation point") {
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 3, n = 6, N = 96;
    const RadialContour disk = RadialContour::disk(m, n);
    const double om = dispersion_omega(Alpha(1.0), m);
    const auto jac = assemble_jacobian(om, disk, Alpha(1.0), quad, N, n);
    for (int r = 0; r < n; ++r) CHECK(std::fabs(jac.at(r, 0)) < 1e-8);
    // range characterization: the mode-m sine row vanishes across all columns
    for (int c = 0; c < n; ++c) CHECK(std::fabs(jac.at(0, c)) < 1e-8);
    for (int j = 2; j <= n; ++j) CHECK(std::fabs(jac.at(j - 1, j - 1)) > 1e-3);
}

TEST_CASE("jacobian matches finite-difference columns off the disk") {
    QuadratureConfig quad;
    quad.n_nodes = 512;
    const int m = 3, n = 4, N = 64;
    const RadialContour con(m, {0.02, 0.004, 0.0, 0.0});
    const double omega = -0.3;
    const auto jac = assemble_jacobian(omega, con, Alpha(1.0), quad, N, n);
    for (int j = 1; j <= n; ++j) {
        const auto fd = fd_gateaux(omega, con, basis(m, n, j), Alpha(1.0), quad, N, 1e-6);
        for (int r = 1; r <= n; ++r)
            CHECK(jac.at(r - 1, j - 1) == Catch::Approx(sine_proj(fd, r * m)).margin(1e-5));
    }
}
