#ifndef VSTATES_CONTOUR_HPP
#define VSTATES_CONTOUR_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vstates {

struct StarShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Star-shaped patch boundary R(x) = 1 + sum_j c_j cos(j m x) + s_j sin(j m x).
// The base radius is fixed at 1 and not stored; coefficients live on the
// m-fold lattice. Immutable after construction.
class RadialContour {
  public:
    RadialContour(int symmetry, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
        : m_(symmetry), c_(std::move(cos_coeffs)), s_(std::move(sin_coeffs)) {
        if (m_ < 1) throw std::invalid_argument("RadialContour: symmetry must be >= 1");
        if (c_.empty() || c_.size() != s_.size())
            throw std::invalid_argument("RadialContour: need equal, non-empty coefficient vectors");
        for (double v : c_)
            if (!std::isfinite(v)) throw std::invalid_argument("RadialContour: non-finite coefficient");
        for (double v : s_)
            if (!std::isfinite(v)) throw std::invalid_argument("RadialContour: non-finite coefficient");
    }
    RadialContour(int symmetry, const std::vector<double>& cos_coeffs)
        : RadialContour(symmetry, cos_coeffs, std::vector<double>(cos_coeffs.size(), 0.0)) {}

    static RadialContour disk(int symmetry, int n_modes) {
        return RadialContour(symmetry, std::vector<double>(n_modes, 0.0),
                             std::vector<double>(n_modes, 0.0));
    }
    // 1 + amplitude*cos(m x) plus room for n_modes coefficients.
    static RadialContour cosine(int symmetry, int n_modes, double amplitude) {
        std::vector<double> c(n_modes, 0.0);
        c[0] = amplitude;
        return RadialContour(symmetry, std::move(c), std::vector<double>(n_modes, 0.0));
    }

    int symmetry() const { return m_; }
    int n_modes() const { return static_cast<int>(c_.size()); }
    const std::vector<double>& cos_coeffs() const { return c_; }
    const std::vector<double>& sin_coeffs() const { return s_; }
    double cos_coeff(int j) const { return c_.at(j - 1); } // 1-based mode index
    double sin_coeff(int j) const { return s_.at(j - 1); }

    bool is_even() const {
        return std::all_of(s_.begin(), s_.end(), [](double v) { return v == 0.0; });
    }
    double coefficient_l1() const {
        double sum = 0.0;
        for (double v : c_) sum += std::fabs(v);
        for (double v : s_) sum += std::fabs(v);
        return sum;
    }

    double radius(double x) const { return eval_deriv<0>(x) + 1.0; }
    double radius_d1(double x) const { return eval_deriv<1>(x); }
    double radius_d2(double x) const { return eval_deriv<2>(x); }

  private:
    template <int Order> double eval_deriv(double x) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < c_.size(); ++j) {
            const double k = static_cast<double>((j + 1) * m_);
            const double kx = k * x;
            const double kp = std::pow(k, Order);
            double ccoef, scoef;
            if constexpr (Order % 4 == 0) { ccoef = std::cos(kx); scoef = std::sin(kx); }
            else if constexpr (Order % 4 == 1) { ccoef = -std::sin(kx); scoef = std::cos(kx); }
            else if constexpr (Order % 4 == 2) { ccoef = -std::cos(kx); scoef = -std::sin(kx); }
            else { ccoef = std::sin(kx); scoef = -std::cos(kx); }
            acc += kp * (c_[j] * ccoef + s_[j] * scoef);
        }
        return acc;
    }

    int m_;
    std::vector<double> c_, s_;
};

// Value and first three derivative tables of a truncated Fourier series
// base + sum c_j cos(jmx) + s_j sin(jmx) on an arbitrary point set.
struct SeriesTables {
    std::vector<double> v, d1, d2, d3;
};

inline SeriesTables sample_series(int m, std::span<const double> c, std::span<const double> s,
                                  double base, std::span<const double> x) {
    SeriesTables t;
    const std::size_t np = x.size();
    t.v.assign(np, base);
    t.d1.assign(np, 0.0);
    t.d2.assign(np, 0.0);
    t.d3.assign(np, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double k = static_cast<double>((j + 1) * m);
        const double k2 = k * k, k3 = k2 * k;
        const double cj = c[j], sj = s[j];
        if (cj == 0.0 && sj == 0.0) continue;
        for (std::size_t i = 0; i < np; ++i) {
            const double ck = std::cos(k * x[i]), sk = std::sin(k * x[i]);
            t.v[i] += cj * ck + sj * sk;
            t.d1[i] += k * (-cj * sk + sj * ck);
            t.d2[i] += k2 * (-cj * ck - sj * sk);
            t.d3[i] += k3 * (cj * sk - sj * ck);
        }
    }
    return t;
}

inline std::vector<double> uniform_grid(int n_points) {
    std::vector<double> x(n_points);
    for (int i = 0; i < n_points; ++i) x[i] = 2.0 * M_PI * i / n_points;
    return x;
}

// Uniform-grid samples of R and its first two derivatives.
struct GridSamples {
    int n_points;
    std::vector<double> values, d1, d2;
};

inline int min_grid_points(const RadialContour& contour) {
    return 4 * contour.symmetry() * contour.n_modes();
}

inline GridSamples evaluate(const RadialContour& contour, int n_points) {
    if (n_points < min_grid_points(contour))
        throw std::invalid_argument("evaluate: n_points below anti-aliasing margin 4*m*n_modes");
    const auto x = uniform_grid(n_points);
    auto t = sample_series(contour.symmetry(), contour.cos_coeffs(), contour.sin_coeffs(), 1.0, x);
    for (int i = 0; i < n_points; ++i)
        if (!(t.v[i] > 0.0))
            throw StarShapeError("evaluate: contour is not star-shaped (R <= 0 at grid point)");
    return GridSamples{n_points, std::move(t.v), std::move(t.d1), std::move(t.d2)};
}

// Signed curvature kappa = (R^2 + 2R'^2 - R R'') / (R^2 + R'^2)^{3/2}.
inline double curvature(const RadialContour& contour, double x) {
    const double r = contour.radius(x);
    if (!(r > 0.0)) throw StarShapeError("curvature: R(x) <= 0");
    const double r1 = contour.radius_d1(x), r2 = contour.radius_d2(x);
    return (r * r + 2.0 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
}

struct ConvexityResult {
    bool convex;
    double min_curvature;
};

inline ConvexityResult is_convex(const RadialContour& contour, int n_points) {
    const auto g = evaluate(contour, n_points); // propagates star-shape errors
    double kmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_points; ++i) {
        const double r = g.values[i], r1 = g.d1[i], r2 = g.d2[i];
        const double k = (r * r + 2.0 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
        kmin = std::min(kmin, k);
    }
    return {kmin > 0.0, kmin};
}

// H^k-type coefficient norm (sum_j |coef_j|^2 (jm)^{2k})^{1/2}, both parities.
inline double sobolev_norm(const RadialContour& contour, double k) {
    double acc = 0.0;
    for (int j = 1; j <= contour.n_modes(); ++j) {
        const double freq = static_cast<double>(j) * contour.symmetry();
        const double w = std::pow(freq, 2.0 * k);
        acc += w * (contour.cos_coeff(j) * contour.cos_coeff(j) +
                    contour.sin_coeff(j) * contour.sin_coeff(j));
    }
    return std::sqrt(acc);
}

// Log-weighted norm (|a_1|^2 + sum_{n>=2} |a_n|^2 n^{2k} (1+log n)^2)^{1/2}
// over absolute mode numbers n = jm; cosine-only contours.
inline double xlog_norm(const RadialContour& contour, int k) {
    if (k < 0) throw std::invalid_argument("xlog_norm: k must be >= 0");
    if (!contour.is_even())
        throw std::invalid_argument("xlog_norm: defined for cosine-only contours");
    double acc = 0.0;
    for (int j = 1; j <= contour.n_modes(); ++j) {
        const double a = contour.cos_coeff(j);
        if (a == 0.0) continue;
        const long n = static_cast<long>(j) * contour.symmetry();
        double w;
        if (n == 1) {
            w = 1.0;
        } else {
            const double lg = 1.0 + std::log(static_cast<double>(n));
            w = std::pow(static_cast<double>(n), 2.0 * k) * lg * lg;
        }
        acc += w * a * a;
    }
    return std::sqrt(acc);
}

// Coefficient magnitudes per lattice mode with a fitted geometric decay ratio
// (exp of the least-squares slope of log magnitude against j). The ratio is
// undefined when fewer than two modes carry mass.
struct DecayReport {
    std::vector<std::pair<int, double>> magnitudes; // (j, |c_j|+|s_j|)
    bool ratio_defined;
    double ratio;
};

inline DecayReport decay_report(const RadialContour& contour) {
    DecayReport rep;
    rep.ratio_defined = false;
    rep.ratio = 0.0;
    std::vector<double> js, logs;
    for (int j = 1; j <= contour.n_modes(); ++j) {
        const double mag = std::fabs(contour.cos_coeff(j)) + std::fabs(contour.sin_coeff(j));
        rep.magnitudes.emplace_back(j, mag);
        if (mag > 0.0) {
            js.push_back(j);
            logs.push_back(std::log(mag));
        }
    }
    if (js.size() >= 2) {
        double sj = 0, sl = 0, sjj = 0, sjl = 0;
        for (std::size_t i = 0; i < js.size(); ++i) {
            sj += js[i];
            sl += logs[i];
            sjj += js[i] * js[i];
            sjl += js[i] * logs[i];
        }
        const double n = static_cast<double>(js.size());
        const double denom = n * sjj - sj * sj;
        if (denom > 0.0) {
            rep.ratio_defined = true;
            rep.ratio = std::exp((n * sjl - sj * sl) / denom);
        }
    }
    return rep;
}

// Exact phase shift: rotate(C, angle)(x) = C(x - angle); mode jm picks up
// phase jm*angle.
inline RadialContour rotate(const RadialContour& contour, double angle) {
    const int n = contour.n_modes();
    std::vector<double> c(n), s(n);
    for (int j = 1; j <= n; ++j) {
        const double ph = static_cast<double>(j) * contour.symmetry() * angle;
        const double cp = std::cos(ph), sp = std::sin(ph);
        c[j - 1] = contour.cos_coeff(j) * cp - contour.sin_coeff(j) * sp;
        s[j - 1] = contour.cos_coeff(j) * sp + contour.sin_coeff(j) * cp;
    }
    return RadialContour(contour.symmetry(), std::move(c), std::move(s));
}

// Patch area functional int R(x)^2 / 2 dx, exact in coefficients.
inline double patch_area(const RadialContour& contour) {
    double acc = 0.0;
    for (int j = 1; j <= contour.n_modes(); ++j)
        acc += contour.cos_coeff(j) * contour.cos_coeff(j) +
               contour.sin_coeff(j) * contour.sin_coeff(j);
    return M_PI + 0.5 * M_PI * acc;
}

// Flat text record: m, n_modes, then c_1..c_n, s_1..s_n at 17 significant
// digits. Round-trips bit-exactly.
inline void write_contour(std::ostream& out, const RadialContour& contour) {
    out << contour.symmetry() << ' ' << contour.n_modes();
    for (int j = 1; j <= contour.n_modes(); ++j) out << ' ' << format_g17(contour.cos_coeff(j));
    for (int j = 1; j <= contour.n_modes(); ++j) out << ' ' << format_g17(contour.sin_coeff(j));
    out << '\n';
}

inline RadialContour read_contour(std::istream& in) {
    int m = 0, n = 0;
    if (!(in >> m >> n) || n < 1)
        throw std::runtime_error("read_contour: malformed header");
    std::vector<double> c(n), s(n);
    for (int j = 0; j < n; ++j)
        if (!(in >> c[j])) throw std::runtime_error("read_contour: truncated cosine block");
    for (int j = 0; j < n; ++j)
        if (!(in >> s[j])) throw std::runtime_error("read_contour: truncated sine block");
    return RadialContour(m, std::move(c), std::move(s));
}

} // namespace vstates

#endif
