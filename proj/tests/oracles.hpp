#pragma once

// Reference computations used by the tests. None of them touches the Krylov
// kernel or the transfer matrices of the library.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Jet = std::array<double, 4>;

// Piecewise-constant stiffness: u'''' = -value(x) u on each [left, right).
struct Piece {
    double left;
    double right;
    double value;
};

inline double stiffness_at(const std::vector<Piece>& pieces, double x) {
    for (const auto& p : pieces) {
        if (x >= p.left && x < p.right) return p.value;
    }
    return pieces.back().value;
}

inline Jet rhs(const Jet& y, double value) { return {y[1], y[2], y[3], -value * y[0]}; }

inline Jet axpy(const Jet& y, double h, const Jet& k) {
    return {y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
}

// Dormand-Prince 5(4) with step control on a constant-coefficient stretch.
inline Jet dopri_segment(Jet y, double x0, double x1, double value, double rtol) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    double x = x0;
    double h = std::min(0.01, x1 - x0);
    while (x < x1) {
        if (x + h > x1) h = x1 - x;
        const Jet k1 = rhs(y, value);
        Jet t{};
        for (int i = 0; i < 4; ++i) t[i] = y[i] + h * a21 * k1[i];
        const Jet k2 = rhs(t, value);
        for (int i = 0; i < 4; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const Jet k3 = rhs(t, value);
        for (int i = 0; i < 4; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const Jet k4 = rhs(t, value);
        for (int i = 0; i < 4; ++i)
            t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        const Jet k5 = rhs(t, value);
        for (int i = 0; i < 4; ++i)
            t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const Jet k6 = rhs(t, value);
        Jet ynew{};
        for (int i = 0; i < 4; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const Jet k7 = rhs(ynew, value);
        double err = 0.0, scale = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            err = std::max(err, std::abs(e));
            scale = std::max(scale, std::max(std::abs(y[i]), std::abs(ynew[i])));
        }
        const double tol = rtol * std::max(scale, 1e-300);
        if (err <= tol) {
            x += h;
            y = ynew;
        }
        const double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(tol / err, 0.2);
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return y;
}

// Integrates from x0 to x1 (x0 <= x1), restarting at every breakpoint.
inline Jet rk_integrate(const std::vector<Piece>& pieces, Jet y, double x0, double x1,
                        double rtol = 1e-13) {
    double x = x0;
    while (x < x1) {
        double next = x1;
        for (const auto& p : pieces) {
            if (p.left > x && p.left < next) next = p.left;
        }
        y = dopri_segment(y, x, next, stiffness_at(pieces, x), rtol);
        x = next;
    }
    return y;
}

inline Jet rk4_step(const Jet& y, double h, double value) {
    const Jet k1 = rhs(y, value);
    const Jet k2 = rhs(axpy(y, 0.5 * h, k1), value);
    const Jet k3 = rhs(axpy(y, 0.5 * h, k2), value);
    const Jet k4 = rhs(axpy(y, h, k3), value);
    Jet out{};
    for (int i = 0; i < 4; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return out;
}

// Fixed-step RK4 scan of u'''' = -value u from x0 with the given jet; returns
// the first sign change of each derivative (linear interpolation), or empty.
inline std::array<std::optional<double>, 4> dense_scan(double value, Jet y, double x0,
                                                       double horizon, double step = 1e-5) {
    std::array<std::optional<double>, 4> zeros;
    double x = x0;
    int remaining = 4;
    while (x < horizon && remaining > 0) {
        const Jet next = rk4_step(y, step, value);
        for (int j = 0; j < 4; ++j) {
            if (!zeros[j] && (y[j] > 0) != (next[j] > 0)) {
                zeros[j] = x + step * y[j] / (y[j] - next[j]);
                --remaining;
            }
        }
        y = next;
        x += step;
    }
    return zeros;
}

// K_j(x; c) = sum_n c^n x^{4n+j} / (4n+j)!, summed until the terms stop changing the sum.
inline double krylov_series(int j, double x, double c) {
    double term = 1.0;
    for (int m = 1; m <= j; ++m) term *= x / m;
    double sum = term;
    for (int n = 1; n < 400; ++n) {
        const int base = 4 * (n - 1) + j;
        double t = term * c;
        for (int m = 1; m <= 4; ++m) t *= x / (base + m);
        term = t;
        const double before = sum;
        sum += term;
        if (sum == before && std::abs(term) < 1e-300 + std::abs(sum) * 1e-18) break;
    }
    return sum;
}

// Roots of cos(t) cosh(t) = 1, t > 0, by bisection on cos(t) - 1/cosh(t).
inline std::vector<double> clamped_beam_roots(int count) {
    std::vector<double> roots;
    const auto f = [](double t) { return std::cos(t) - 1.0 / std::cosh(t); };
    for (int m = 1; static_cast<int>(roots.size()) < count; ++m) {
        double lo = m * M_PI, hi = (m + 1.0) * M_PI;
        if ((f(lo) > 0) == (f(hi) > 0)) continue;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((f(mid) > 0) == (f(lo) > 0)) lo = mid; else hi = mid;
        }
        roots.push_back(0.5 * (lo + hi));
    }
    return roots;
}

// Largest eigenvalues of a symmetric positive definite matrix by power
// iteration with Hotelling deflation.
inline std::vector<double> power_deflation(Eigen::MatrixXd m, int count, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd v(m.rows());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
        v.normalize();
        double lambda = 0.0;
        for (int it = 0; it < 200000; ++it) {
            Eigen::VectorXd w = m * v;
            const double next = v.dot(w);
            w.normalize();
            const double change = (w - v).norm();
            v = w;
            if (std::abs(next - lambda) < 1e-15 * std::abs(next) && change < 1e-9) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        out.push_back(lambda);
        m -= lambda * v * v.transpose();
    }
    return out;
}

// Richardson-extrapolated fourth difference on a uniform sample with spacing
// `step`: (4 D(H) - D(2H)) / 3 with H = stride * step, evaluated at index i.
inline double fourth_difference(const std::vector<double>& g, std::size_t i, std::size_t stride,
                                double step) {
    auto d4 = [&](std::size_t s) {
        const double H = s * step;
        return (g[i - 2 * s] - 4 * g[i - s] + 6 * g[i] - 4 * g[i + s] + g[i + 2 * s]) /
               (H * H * H * H);
    };
    return (4.0 * d4(stride) - d4(2 * stride)) / 3.0;
}

// Relative residual |(d^4 + q - lambda) g| / |g| over sample points whose
// stencil stays clear of every breakpoint.
inline double fd_residual(const std::vector<double>& grid, const std::vector<double>& g,
                          const std::function<double(double)>& q, double lambda,
                          const std::vector<double>& breakpoints, std::size_t stride) {
    const double step = grid[1] - grid[0];
    const std::size_t reach = 4 * stride;
    double r2 = 0.0, g2 = 0.0;
    for (std::size_t i = reach; i + reach < grid.size(); ++i) {
        const double lo = grid[i - reach], hi = grid[i + reach];
        bool clear = true;
        for (double bp : breakpoints) {
            if (bp >= lo - 1e-12 && bp <= hi + 1e-12) clear = false;
        }
        if (!clear) continue;
        const double r = fourth_difference(g, i, stride, step) + (q(grid[i]) - lambda) * g[i];
        r2 += r * r;
        g2 += g[i] * g[i];
    }
    return std::sqrt(r2 / g2);
}

// Composite Simpson on a uniform sample; an even number of intervals is used,
// the last interval (if any) by the trapezoid rule.
inline double simpson(const std::vector<double>& y, double step) {
    const std::size_t n = y.size() - 1;
    const std::size_t even = n - n % 2;
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= even; i += 2) s += y[i] + 4 * y[i + 1] + y[i + 2];
    s *= step / 3.0;
    if (even < n) s += 0.5 * step * (y[n - 1] + y[n]);
    return s;
}

// Slope of log|y| against |x| by least squares over the given points.
inline double log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double t = std::abs(xs[i]), l = std::log(std::abs(ys[i]));
        sx += t, sy += l, sxx += t * t, sxy += t * l;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace oracle
