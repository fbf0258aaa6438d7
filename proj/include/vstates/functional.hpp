#ifndef VSTATES_FUNCTIONAL_HPP
#define VSTATES_FUNCTIONAL_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vstates/contour.hpp"
#include "vstates/special.hpp"

namespace vstates {

struct RefinementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SymmetryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Splitting { full_split, midpoint_only };

// Midpoint nodes u_q = 2*pi*(q+1/2)/n_nodes; the offset grid never touches the
// kernel singularity at u = 0 and is symmetric about it.
struct QuadratureConfig {
    int n_nodes = 2048;
    Splitting splitting = Splitting::full_split;
    bool refinement_check = false;
    double refinement_tol = 1e-8;

    void validate() const {
        if (n_nodes < 128 || n_nodes % 2 != 0)
            throw std::invalid_argument("QuadratureConfig: n_nodes must be even and >= 128");
        if (!(refinement_tol > 0.0))
            throw std::invalid_argument("QuadratureConfig: refinement_tol must be positive");
    }
};

// Coefficient set on the m-fold lattice with an explicit constant part.
struct ModeSet {
    int m;
    double constant;
    std::vector<double> cos_coeffs, sin_coeffs;
};

// f -> int (f(x-u) - f(x)) / |sin(u/2)|^alpha du, which multiplies each mode of
// absolute frequency k by -lambda_k and annihilates the constant part.
inline ModeSet singular_multiplier_apply(const ModeSet& f, Alpha alpha) {
    ModeSet out;
    out.m = f.m;
    out.constant = 0.0;
    const std::size_t n = f.cos_coeffs.size();
    out.cos_coeffs.resize(n);
    out.sin_coeffs.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const int k = static_cast<int>(j + 1) * f.m;
        const double factor = sine_power_diff_coeff(alpha, k); // = -lambda_k
        out.cos_coeffs[j] = factor * f.cos_coeffs[j];
        out.sin_coeffs[j] = factor * (j < f.sin_coeffs.size() ? f.sin_coeffs[j] : 0.0);
    }
    return out;
}

// Odd m-fold function sum_j b_j sin(j m x); the residual representation of the
// functional for cosine-only contours.
struct SineSeries {
    int m;
    std::vector<double> coeffs;

    double max_abs() const {
        double r = 0.0;
        for (double b : coeffs) r = std::max(r, std::fabs(b));
        return r;
    }
};

namespace detail {

struct Jet {
    double v, d1, d2;
};
inline Jet jet_mul(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet jet_add(const Jet& a, const Jet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }

inline long long gcd_ll(long long a, long long b) {
    while (b) { long long t = a % b; a = b; b = t; }
    return a;
}

} // namespace detail

// Prepared evaluation state for one (contour, alpha, quadrature, grid) tuple.
//
// Every integral is split as  integrand = Phi(x,u) * (2|sin(u/2)|)^{-alpha}
// with Phi smooth in u. The kernel factor 1/D^{alpha/2} equals
// Q(x,u) * (2|sin(u/2)|)^{-alpha} with Q = ((R(x)-R(y))^2/(2 sin(u/2))^2
// + R(x)R(y))^{-alpha/2} smooth across u = 0. Q is split into
//   Q = P(x) + q_s(x) sin u + q_c(x)(1 - cos u) + Q_rem,     Q_rem = O(u^3),
// the P/q_s/q_c channels are applied exactly in coefficient space through the
// closed-form Fourier multipliers of the pure trig-power kernels, and only the
// Q_rem channel (plus the genuinely quadratic-in-perturbation pieces of the
// derivative) goes through the midpoint rule. At the unit disk the midpoint
// integrands vanish identically and the evaluation is exact in coefficients.
class FunctionalWorkspace {
  public:
    FunctionalWorkspace(const RadialContour& contour, Alpha alpha, QuadratureConfig quad,
                        int n_grid)
        : con_(contour), alpha_(alpha), quad_(quad), N_(n_grid) {
        quad_.validate();
        if (N_ < min_grid_points(contour))
            throw std::invalid_argument("FunctionalWorkspace: grid below 4*m*n_modes margin");
        build();
    }

    int n_grid() const { return N_; }
    int n_modes() const { return con_.n_modes(); }
    int symmetry() const { return con_.symmetry(); }
    const std::vector<double>& grid() const { return x_; }
    const std::vector<double>& f1() const { return F1_; }
    const std::vector<double>& f2() const { return F2_; }
    const std::vector<double>& f3() const { return F3_; }

    // Omega R' - (F1 + F2 + F3) on the grid.
    std::vector<double> functional(double omega) const {
        std::vector<double> out(N_);
        for (int i = 0; i < N_; ++i) out[i] = omega * R1_[i] - (F1_[i] + F2_[i] + F3_[i]);
        return out;
    }

    // -(F1+F2+F3): the contour-dynamics velocity of the radial function.
    std::vector<double> rhs() const {
        std::vector<double> out(N_);
        for (int i = 0; i < N_; ++i) out[i] = -(F1_[i] + F2_[i] + F3_[i]);
        return out;
    }

    // Directional derivative Omega h' - sum_i D_i[R]h on the grid. The
    // perturbation h is a pure coefficient series (no base radius).
    std::vector<double> gateaux(double omega, const RadialContour& h) const;

    // Sine projections (rows j=1..n_out) of gateaux(omega, cos(j m x)) for
    // basis columns j=1..n_cols, written into col-major matrix[n_out*c + r].
    void basis_jacobian_sine(double omega, int n_cols, int n_out, std::vector<double>& mat) const;

    // Discrete projection of grid values onto the lattice sine modes.
    SineSeries project_sine(const std::vector<double>& grid_values, int n_out) const;
    // Fraction of discrete energy outside the lattice sine modes.
    double nonsine_energy_fraction(const std::vector<double>& grid_values, int n_out) const;

  private:
    void build();
    void build_images();

    // channel application of a coefficient set; even kernels keep parity,
    // odd kernels map cos->sin, sin->-cos. Returns grid values.
    std::vector<double> synth_even(const std::vector<double>& eig, double const_out,
                                   const std::vector<double>& c, const std::vector<double>& s) const;
    std::vector<double> synth_odd(const std::vector<double>& eig, const std::vector<double>& c,
                                  const std::vector<double>& s) const;

    RadialContour con_;
    Alpha alpha_;
    QuadratureConfig quad_;
    int N_;
    int nq_ = 0;
    long long L_ = 0, a_ = 0;

    std::vector<double> x_;
    // per-node tables
    std::vector<double> su2inv_, kapw_, sinu_, cosu_;
    std::vector<long long> qbase_;
    // contour tables on the x grid
    std::vector<double> R_, R1_, R2_, R3_;
    // contour tables on the combined offset grid
    std::vector<double> Rb_, Rb1_;
    // pointwise kernel head data
    std::vector<double> P_, qs_, qc_, b0_, b1_, b2_;
    // dense (N x nq) kernel tables
    std::vector<double> W_, Q2_, QX_; // QX = Q_rem (full_split) or Q (midpoint_only)
    // channel eigenvalues on lattice frequencies j*m, j = 1..n
    std::vector<double> eDc_, eDs_, eDv_, eVc_, eVs_, eVv_;
    double Vs0_ = 0.0, Jc_ = 0.0, Ssin_ = 0.0, S1mc_ = 0.0, Calpha_ = 0.0;
    // lattice trig tables (n x N) and (n x nq)
    std::vector<double> ckx_, skx_, cku_, sku_;
    // multiplier images of R and R' on the grid
    std::vector<double> imVcR_, imVsR_, imVvR_, imVcR1_, imVsR1_, imVvR1_;
    std::vector<double> imDcR_, imDsR_, imDvR_, imDcR1_, imDsR1_, imDvR1_;
    // assembled pieces
    std::vector<double> F1_, F2_, F3_, X_;
};

inline void FunctionalWorkspace::build() {
    const double a = alpha_.value();
    const int n = con_.n_modes();
    const int m = con_.symmetry();
    nq_ = quad_.n_nodes;
    Calpha_ = normalizing_constant(alpha_);

    x_ = uniform_grid(N_);
    {
        auto t = sample_series(m, con_.cos_coeffs(), con_.sin_coeffs(), 1.0, x_);
        R_ = std::move(t.v); R1_ = std::move(t.d1); R2_ = std::move(t.d2); R3_ = std::move(t.d3);
    }
    for (int i = 0; i < N_; ++i)
        if (!(R_[i] > 0.0)) throw StarShapeError("functional: contour is not star-shaped");

    // combined grid for R(x_i - u_q): x_i - u_q = 2*pi*(p + par/2)/L
    L_ = static_cast<long long>(N_) / detail::gcd_ll(N_, nq_) * nq_;
    a_ = L_ / N_;
    const long long b = L_ / nq_;
    const long long par = b % 2;
    {
        std::vector<double> tx(static_cast<std::size_t>(L_));
        for (long long p = 0; p < L_; ++p)
            tx[static_cast<std::size_t>(p)] = 2.0 * M_PI * (p + 0.5 * par) / static_cast<double>(L_);
        auto t = sample_series(m, con_.cos_coeffs(), con_.sin_coeffs(), 1.0, tx);
        Rb_ = std::move(t.v);
        Rb1_ = std::move(t.d1);
        for (double v : Rb_)
            if (!(v > 0.0)) throw StarShapeError("functional: contour is not star-shaped");
    }
    qbase_.resize(nq_);
    for (int q = 0; q < nq_; ++q) {
        long long base = -static_cast<long long>(q) * b - (b + par) / 2;
        base %= L_;
        if (base < 0) base += L_;
        qbase_[q] = base;
    }

    // offset-node tables
    su2inv_.resize(nq_); kapw_.resize(nq_); sinu_.resize(nq_); cosu_.resize(nq_);
    const double w = 2.0 * M_PI / nq_;
    for (int q = 0; q < nq_; ++q) {
        const double u = 2.0 * M_PI * (q + 0.5) / nq_;
        const double s = std::sin(0.5 * u); // positive on (0, 2*pi)
        su2inv_[q] = 1.0 / (2.0 * s);
        kapw_[q] = w * std::pow(2.0 * s, -a);
        sinu_[q] = std::sin(u);
        cosu_[q] = std::cos(u);
    }
    Ssin_ = 0.0; S1mc_ = 0.0;
    for (int q = 0; q < nq_; ++q) {
        Ssin_ += sinu_[q] * kapw_[q];
        S1mc_ += (1.0 - cosu_[q]) * kapw_[q];
    }
    Jc_ = std::pow(2.0, 1.0 - a) * sine_power_coeff(2.0 - a, 0);

    // kernel head: P, q_s, q_c from the u-jet of Q at u = 0
    P_.resize(N_); qs_.resize(N_); qc_.resize(N_); b0_.resize(N_); b1_.resize(N_); b2_.resize(N_);
    for (int i = 0; i < N_; ++i) {
        const double r = R_[i], r1 = R1_[i], r2 = R2_[i], r3 = R3_[i];
        const double b0 = r1 * r1 + r * r;
        const double b1v = -r1 * r2 - r * r1;
        const double b2v = 0.5 * r2 * r2 + (2.0 / 3.0) * r1 * r3 + r1 * r1 / 6.0 + r * r2;
        b0_[i] = b0; b1_[i] = b1v; b2_[i] = b2v;
        const double p = -0.5 * a;
        const double q0 = std::pow(b0, p);
        P_[i] = q0;
        qs_[i] = p * q0 / b0 * b1v;
        qc_[i] = p * (p - 1.0) * q0 / (b0 * b0) * b1v * b1v + p * q0 / b0 * b2v;
    }

    // dense kernel tables
    const bool full = quad_.splitting == Splitting::full_split;
    const bool alpha_is_one = alpha_.is_one();
    W_.resize(static_cast<std::size_t>(N_) * nq_);
    Q2_.resize(W_.size());
    QX_.resize(W_.size());
    for (int i = 0; i < N_; ++i) {
        const double r = R_[i], r1 = R1_[i];
        const double p = P_[i], qs = qs_[i], qc = qc_[i];
        const std::size_t row = static_cast<std::size_t>(i) * nq_;
        for (int q = 0; q < nq_; ++q) {
            long long pi = i * a_ + qbase_[q];
            if (pi >= L_) pi -= L_;
            const std::size_t pp = static_cast<std::size_t>(pi);
            const double rb = Rb_[pp];
            const double wv = (r - rb) * su2inv_[q];
            const double B = wv * wv + r * rb;
            const double Q = alpha_is_one ? 1.0 / std::sqrt(B) : std::pow(B, -0.5 * a);
            W_[row + q] = wv;
            Q2_[row + q] = Q / B;
            QX_[row + q] = full ? (Q - p - qs * sinu_[q] - qc * (1.0 - cosu_[q])) : Q;
        }
        (void)r1;
    }

    // channel eigenvalues
    eDc_.resize(n); eDs_.resize(n); eDv_.resize(n); eVc_.resize(n); eVs_.resize(n); eVv_.resize(n);
    const double p2m = std::pow(2.0, -a), p21 = std::pow(2.0, 1.0 - a), p22 = std::pow(2.0, 2.0 - a);
    const double j2a0 = sine_power_coeff(2.0 - a, 0), j4a0 = sine_power_coeff(4.0 - a, 0);
    for (int j = 1; j <= n; ++j) {
        const int k = j * m;
        const double dm = sine_power_diff_coeff(alpha_, k);
        const double d2 = sine_power_coeff(2.0 - a, k) - j2a0;
        const double d4 = sine_power_coeff(4.0 - a, k) - j4a0;
        const double g1 = sine_power_cos_half_coeff(1.0 - a, k);
        const double g3 = sine_power_cos_half_coeff(3.0 - a, k);
        eDc_[j - 1] = p2m * dm - p21 * d2;
        eDs_[j - 1] = p21 * g1 - p22 * g3;
        eDv_[j - 1] = p21 * d2 - p22 * d4;
        eVc_[j - 1] = p21 * g1;
        eVs_[j - 1] = p22 * (sine_power_coeff(2.0 - a, k) - sine_power_coeff(4.0 - a, k));
        eVv_[j - 1] = p22 * g3;
    }
    Vs0_ = p22 * (j2a0 - j4a0);

    // lattice trig tables
    ckx_.resize(static_cast<std::size_t>(n) * N_);
    skx_.resize(ckx_.size());
    for (int j = 0; j < n; ++j) {
        const double k = static_cast<double>((j + 1) * m);
        for (int i = 0; i < N_; ++i) {
            ckx_[static_cast<std::size_t>(j) * N_ + i] = std::cos(k * x_[i]);
            skx_[static_cast<std::size_t>(j) * N_ + i] = std::sin(k * x_[i]);
        }
    }
    cku_.resize(static_cast<std::size_t>(n) * nq_);
    sku_.resize(cku_.size());
    for (int j = 0; j < n; ++j) {
        const double k = static_cast<double>((j + 1) * m);
        for (int q = 0; q < nq_; ++q) {
            const double u = 2.0 * M_PI * (q + 0.5) / nq_;
            cku_[static_cast<std::size_t>(j) * nq_ + q] = std::cos(k * u);
            sku_[static_cast<std::size_t>(j) * nq_ + q] = std::sin(k * u);
        }
    }

    if (full) build_images();

    // midpoint accumulators for the three functional terms
    std::vector<double> M1(N_), M2(N_), M3(N_);
    for (int i = 0; i < N_; ++i) {
        const double r = R_[i], r1 = R1_[i];
        const std::size_t row = static_cast<std::size_t>(i) * nq_;
        double m1 = 0.0, m2 = 0.0, m3 = 0.0;
        for (int q = 0; q < nq_; ++q) {
            long long pi = i * a_ + qbase_[q];
            if (pi >= L_) pi -= L_;
            const std::size_t pp = static_cast<std::size_t>(pi);
            const double rb = Rb_[pp], rb1 = Rb1_[pp];
            const double qk = QX_[row + q] * kapw_[q];
            m1 += sinu_[q] * (r * rb + r1 * rb1) * qk;
            m2 += cosu_[q] * (rb1 - r1) * qk;
            m3 += cosu_[q] * (r - rb) * qk;
        }
        M1[i] = m1; M2[i] = m2; M3[i] = m3;
    }

    F1_.resize(N_); F2_.resize(N_); F3_.resize(N_); X_.resize(N_);
    const double C = Calpha_;
    for (int i = 0; i < N_; ++i) {
        const double r = R_[i], r1 = R1_[i];
        if (full) {
            const double p = P_[i], qs = qs_[i], qc = qc_[i];
            F1_[i] = (C / r) * (p * (r * imVcR_[i] + r1 * imVcR1_[i]) +
                                qs * (r * imVsR_[i] + r1 * imVsR1_[i]) +
                                qc * (r * imVvR_[i] + r1 * imVvR1_[i]) + M1[i]);
            const double innerD_R = p * imDcR_[i] + qs * imDsR_[i] + qc * imDvR_[i];
            const double innerD_R1 = p * imDcR1_[i] + qs * imDsR1_[i] + qc * imDvR1_[i];
            F2_[i] = C * (innerD_R1 + M2[i]);
            X_[i] = -innerD_R + M3[i];
        } else {
            F1_[i] = (C / r) * M1[i];
            F2_[i] = C * M2[i];
            X_[i] = M3[i];
        }
        F3_[i] = (C * r1 / r) * X_[i];
    }
}

inline std::vector<double> FunctionalWorkspace::synth_even(const std::vector<double>& eig,
                                                           double const_out,
                                                           const std::vector<double>& c,
                                                           const std::vector<double>& s) const {
    std::vector<double> out(N_, const_out);
    const int n = con_.n_modes();
    for (int j = 0; j < n; ++j) {
        const double cc = eig[j] * c[j], ss = eig[j] * s[j];
        if (cc == 0.0 && ss == 0.0) continue;
        const double* ck = &ckx_[static_cast<std::size_t>(j) * N_];
        const double* sk = &skx_[static_cast<std::size_t>(j) * N_];
        for (int i = 0; i < N_; ++i) out[i] += cc * ck[i] + ss * sk[i];
    }
    return out;
}

inline std::vector<double> FunctionalWorkspace::synth_odd(const std::vector<double>& eig,
                                                          const std::vector<double>& c,
                                                          const std::vector<double>& s) const {
    std::vector<double> out(N_, 0.0);
    const int n = con_.n_modes();
    for (int j = 0; j < n; ++j) {
        const double cc = eig[j] * c[j], ss = eig[j] * s[j];
        if (cc == 0.0 && ss == 0.0) continue;
        const double* ck = &ckx_[static_cast<std::size_t>(j) * N_];
        const double* sk = &skx_[static_cast<std::size_t>(j) * N_];
        for (int i = 0; i < N_; ++i) out[i] += cc * sk[i] - ss * ck[i];
    }
    return out;
}

inline void FunctionalWorkspace::build_images() {
    const int n = con_.n_modes();
    const int m = con_.symmetry();
    const auto& c = con_.cos_coeffs();
    const auto& s = con_.sin_coeffs();
    std::vector<double> c1(n), s1(n); // coefficients of R'
    for (int j = 0; j < n; ++j) {
        const double k = static_cast<double>((j + 1) * m);
        c1[j] = s[j] * k;
        s1[j] = -c[j] * k;
    }
    imVcR_ = synth_odd(eVc_, c, s);
    imVsR_ = synth_even(eVs_, Vs0_, c, s); // base radius contributes the Vs moment
    imVvR_ = synth_odd(eVv_, c, s);
    imVcR1_ = synth_odd(eVc_, c1, s1);
    imVsR1_ = synth_even(eVs_, 0.0, c1, s1);
    imVvR1_ = synth_odd(eVv_, c1, s1);
    imDcR_ = synth_even(eDc_, 0.0, c, s); // difference kernels kill constants
    imDsR_ = synth_odd(eDs_, c, s);
    imDvR_ = synth_even(eDv_, 0.0, c, s);
    imDcR1_ = synth_even(eDc_, 0.0, c1, s1);
    imDsR1_ = synth_odd(eDs_, c1, s1);
    imDvR1_ = synth_even(eDv_, 0.0, c1, s1);
}

inline std::vector<double> FunctionalWorkspace::gateaux(double omega, const RadialContour& h) const {
    if (h.symmetry() != con_.symmetry() || h.n_modes() != con_.n_modes())
        throw std::invalid_argument("gateaux: perturbation must share the contour lattice");
    const double a = alpha_.value();
    const double C = Calpha_;
    const int n = con_.n_modes();
    const int m = con_.symmetry();
    const bool full = quad_.splitting == Splitting::full_split;

    SeriesTables ht = sample_series(m, h.cos_coeffs(), h.sin_coeffs(), 0.0, x_);
    std::vector<double> txh(static_cast<std::size_t>(L_));
    {
        const long long b = L_ / nq_;
        const long long par = b % 2;
        for (long long p = 0; p < L_; ++p)
            txh[static_cast<std::size_t>(p)] = 2.0 * M_PI * (p + 0.5 * par) / static_cast<double>(L_);
    }
    SeriesTables hbt = sample_series(m, h.cos_coeffs(), h.sin_coeffs(), 0.0, txh);

    std::vector<double> hc1(n), hs1(n);
    for (int j = 0; j < n; ++j) {
        const double k = static_cast<double>((j + 1) * m);
        hc1[j] = h.sin_coeffs()[j] * k;
        hs1[j] = -h.cos_coeffs()[j] * k;
    }
    std::vector<double> imVch, imVsh, imVvh, imVch1, imVsh1, imVvh1;
    std::vector<double> imDch, imDsh, imDvh, imDch1, imDsh1, imDvh1;
    if (full) {
        imVch = synth_odd(eVc_, h.cos_coeffs(), h.sin_coeffs());
        imVsh = synth_even(eVs_, 0.0, h.cos_coeffs(), h.sin_coeffs());
        imVvh = synth_odd(eVv_, h.cos_coeffs(), h.sin_coeffs());
        imVch1 = synth_odd(eVc_, hc1, hs1);
        imVsh1 = synth_even(eVs_, 0.0, hc1, hs1);
        imVvh1 = synth_odd(eVv_, hc1, hs1);
        imDch = synth_even(eDc_, 0.0, h.cos_coeffs(), h.sin_coeffs());
        imDsh = synth_odd(eDs_, h.cos_coeffs(), h.sin_coeffs());
        imDvh = synth_even(eDv_, 0.0, h.cos_coeffs(), h.sin_coeffs());
        imDch1 = synth_even(eDc_, 0.0, hc1, hs1);
        imDsh1 = synth_odd(eDs_, hc1, hs1);
        imDvh1 = synth_even(eDv_, 0.0, hc1, hs1);
    }

    std::vector<double> out(N_);
    const double p2exp = -0.5 * a - 1.0;
    for (int i = 0; i < N_; ++i) {
        const double r = R_[i], r1 = R1_[i], r2 = R2_[i], r3 = R3_[i];
        const double hx = ht.v[i], h1 = ht.d1[i], h2 = ht.d2[i], h3 = ht.d3[i];
        const std::size_t row = static_cast<std::size_t>(i) * nq_;

        double MIDb = 0.0, MIDc = 0.0, MIDd = 0.0, MIDe = 0.0, MIDh = 0.0, MIDi = 0.0;
        for (int q = 0; q < nq_; ++q) {
            long long pi = i * a_ + qbase_[q];
            if (pi >= L_) pi -= L_;
            const std::size_t pp = static_cast<std::size_t>(pi);
            const double rb = Rb_[pp], rb1 = Rb1_[pp];
            const double hb = hbt.v[pp], hb1 = hbt.d1[pp];
            const double kw = kapw_[q];
            const double qxk = QX_[row + q] * kw;
            const double q2 = Q2_[row + q];
            const double wv = W_[row + q];
            const double wh = (hx - hb) * su2inv_[q];
            const double th = 0.5 * (hx * rb + hb * r);
            const double n1 = r * rb + r1 * rb1;
            const double tt = th + wv * wh;
            MIDb += sinu_[q] * (hx * rb + r * hb + h1 * rb1 + r1 * hb1) * qxk;
            MIDd += cosu_[q] * (hb1 - h1) * qxk;
            MIDh += cosu_[q] * (hx - hb) * qxk;
            if (full) {
                MIDc += sinu_[q] * (th * (n1 * q2 - 1.0) + wv * wh * n1 * q2) * kw;
            } else {
                MIDc += sinu_[q] * n1 * tt * q2 * kw;
            }
            MIDe += cosu_[q] * (rb1 - r1) * tt * q2 * kw;
            MIDi += cosu_[q] * (r - rb) * tt * q2 * kw;
        }

        double Da, Db, Dc, Dd, De, Df, Dg, Dh, Di;
        if (full) {
            // local jets at u = 0 for the second-kernel subtraction data
            using detail::Jet;
            const double b0 = b0_[i], b1 = b1_[i], b2 = b2_[i];
            const double q20 = std::pow(b0, p2exp);
            const Jet jW{r1, -0.5 * r2, r3 / 3.0 + r1 / 12.0};
            const Jet jWh{h1, -0.5 * h2, h3 / 3.0 + h1 / 12.0};
            const Jet jQ2{q20, p2exp * q20 / b0 * b1,
                          p2exp * (p2exp - 1.0) * q20 / (b0 * b0) * b1 * b1 + p2exp * q20 / b0 * b2};
            const Jet jTh{hx * r, -0.5 * (hx * r1 + h1 * r), 0.5 * (hx * r2 + h2 * r)};
            const Jet jWWh = detail::jet_mul(jW, jWh);
            const Jet jT = detail::jet_add(jTh, jWWh);
            const Jet jN1{b0, b1, r * r2 + r1 * r3};
            const Jet jN1Q2 = detail::jet_mul(jN1, jQ2);
            const Jet jE{jN1Q2.v - 1.0, jN1Q2.d1, jN1Q2.d2};
            const Jet jM = detail::jet_add(detail::jet_mul(jTh, jE), detail::jet_mul(jWWh, jN1Q2));
            const Jet jcos{1.0, 0.0, -1.0};
            const Jet jR1d{0.0, -r2, r3};
            const Jet jRd{0.0, r1, -r2};
            const Jet jse = detail::jet_mul(jcos, detail::jet_mul(jR1d, detail::jet_mul(jT, jQ2)));
            const Jet jsi = detail::jet_mul(jcos, detail::jet_mul(jRd, detail::jet_mul(jT, jQ2)));
            const double tc1 = jM.v, tc2 = 2.0 * jM.d1;
            const double te1 = jse.d1, te2 = jse.d2;
            const double ti1 = jsi.d1, ti2 = jsi.d2;
            MIDc += -tc1 * Ssin_ - tc2 * S1mc_ + tc2 * Jc_;
            MIDe += -te1 * Ssin_ - te2 * S1mc_ + te2 * Jc_;
            MIDi += -ti1 * Ssin_ - ti2 * S1mc_ + ti2 * Jc_;

            const double p = P_[i], qs = qs_[i], qc = qc_[i];
            Da = -(hx / r) * F1_[i];
            Db = (C / r) * (p * (hx * imVcR_[i] + r * imVch[i] + h1 * imVcR1_[i] + r1 * imVch1[i]) +
                            qs * (hx * imVsR_[i] + r * imVsh[i] + h1 * imVsR1_[i] + r1 * imVsh1[i]) +
                            qc * (hx * imVvR_[i] + r * imVvh[i] + h1 * imVvR1_[i] + r1 * imVvh1[i]) +
                            MIDb);
            Dc = -(a * C / r) * (0.5 * (hx * imVcR_[i] + r * imVch[i]) + MIDc);
            Dd = C * (p * imDch1[i] + qs * imDsh1[i] + qc * imDvh1[i] + MIDd);
            De = -a * C * MIDe;
            Dh = (C * r1 / r) * (-(p * imDch[i] + qs * imDsh[i] + qc * imDvh[i]) + MIDh);
            Di = -a * C * (r1 / r) * MIDi;
        } else {
            Da = -(hx / r) * F1_[i];
            Db = (C / r) * MIDb;
            Dc = -(a * C / r) * MIDc;
            Dd = C * MIDd;
            De = -a * C * MIDe;
            Dh = (C * r1 / r) * MIDh;
            Di = -a * C * (r1 / r) * MIDi;
        }
        Df = (C * h1 / r) * X_[i];
        Dg = -(C * r1 * hx / (r * r)) * X_[i];
        out[i] = omega * h1 - (Da + Db + Dc + Dd + De + Df + Dg + Dh + Di);
    }
    return out;
}

inline SineSeries FunctionalWorkspace::project_sine(const std::vector<double>& g, int n_out) const {
    SineSeries out;
    out.m = con_.symmetry();
    out.coeffs.assign(n_out, 0.0);
    for (int j = 1; j <= n_out; ++j) {
        const double* sk = &skx_[static_cast<std::size_t>(j - 1) * N_];
        double acc = 0.0;
        for (int i = 0; i < N_; ++i) acc += g[i] * sk[i];
        out.coeffs[j - 1] = 2.0 * acc / N_;
    }
    return out;
}

inline double FunctionalWorkspace::nonsine_energy_fraction(const std::vector<double>& g,
                                                           int n_out) const {
    double etot = 0.0;
    for (int i = 0; i < N_; ++i) etot += g[i] * g[i];
    etot /= N_;
    const SineSeries b = project_sine(g, n_out);
    double esine = 0.0;
    for (double v : b.coeffs) esine += 0.5 * v * v;
    if (etot <= 1e-28) return 0.0;
    return std::max(0.0, etot - esine) / etot;
}

inline void FunctionalWorkspace::basis_jacobian_sine(double omega, int n_cols, int n_out,
                                                     std::vector<double>& mat) const {
    mat.assign(static_cast<std::size_t>(n_cols) * n_out, 0.0);
    for (int jc = 1; jc <= n_cols; ++jc) {
        std::vector<double> c(con_.n_modes(), 0.0), s(con_.n_modes(), 0.0);
        c[jc - 1] = 1.0;
        RadialContour h(con_.symmetry(), c, s);
        const auto g = gateaux(omega, h);
        const SineSeries proj = project_sine(g, n_out);
        for (int r = 0; r < n_out; ++r)
            mat[static_cast<std::size_t>(jc - 1) * n_out + r] = proj.coeffs[r];
    }
}

// ---- free-function entry points -----------------------------------------

inline std::vector<double> eval_functional_term(int i, const RadialContour& contour, Alpha alpha,
                                                const QuadratureConfig& quad, int n_grid) {
    if (i < 1 || i > 3) throw std::invalid_argument("eval_functional_term: i must be 1, 2 or 3");
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    if (i == 1) return ws.f1();
    if (i == 2) return ws.f2();
    return ws.f3();
}

inline std::vector<double> eval_functional(double omega, const RadialContour& contour, Alpha alpha,
                                           const QuadratureConfig& quad, int n_grid) {
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    auto out = ws.functional(omega);
    if (quad.refinement_check) {
        QuadratureConfig fine = quad;
        fine.refinement_check = false;
        fine.n_nodes = 2 * quad.n_nodes;
        FunctionalWorkspace ws2(contour, alpha, fine, n_grid);
        const auto out2 = ws2.functional(omega);
        double diff = 0.0;
        for (int i = 0; i < n_grid; ++i) diff = std::max(diff, std::fabs(out[i] - out2[i]));
        if (diff > quad.refinement_tol)
            throw RefinementError("eval_functional: node-doubling drift " + format_g17(diff) +
                                  " exceeds tolerance " + format_g17(quad.refinement_tol));
    }
    return out;
}

// Sine-mode residual of the functional for an even contour. Signals a
// SymmetryError when the discrete output leaks outside the lattice sine modes
// (that indicates an inconsistent quadrature, not a physics failure).
inline SineSeries eval_functional_sine(double omega, const RadialContour& contour, Alpha alpha,
                                       const QuadratureConfig& quad, int n_grid) {
    if (!contour.is_even())
        throw std::invalid_argument("eval_functional_sine: contour must be cosine-only");
    FunctionalWorkspace ws(contour, alpha, quad, n_grid);
    const auto g = ws.functional(omega);
    const double frac = ws.nonsine_energy_fraction(g, contour.n_modes());
    if (frac > 1e-10)
        throw SymmetryError("eval_functional_sine: non-sine energy fraction " + format_g17(frac));
    return ws.project_sine(g, contour.n_modes());
}

} // namespace vstates

#endif
