#pragma once

// Exact propagation for u'''' = c u with piecewise-constant c.
//
// The four Krylov functions K_0..K_3 solve w'''' = c w with
// K_j^{(i)}(0) = [i == j]. They are entire in c, so every solution of the
// constant-coefficient equation is u(x0 + t) = sum_j u^{(j)}(x0) K_j(t; c).

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace qembed {

struct KernelConfig {
    // |c|^{1/4}|x| at or below this uses the power series, above it the
    // closed trigonometric/hyperbolic forms.
    double series_cutoff = 1.5;
    // krylov_eval refuses arguments with |c|^{1/4}|x| above this.
    double magnitude_cap = 600.0;
    // propagate() splits pieces so that |c|^{1/4} h stays below this.
    double substep_cap = 8.0;
    // Absolute tolerance of the adaptive Simpson rule used by db_propagate.
    double quadrature_tol = 1e-10;
};

struct KrylovValues {
    double x = 0.0;
    double c = 0.0;
    std::array<double, 4> k{};  // K_0..K_3 at x

    // i-th x-derivative of K_j, using K_j' = K_{j-1} and K_0' = c K_3.
    double derivative(int i, int j) const;
    // Fourth derivative closure: K_j'''' = c K_j.
    double fourth(int j) const { return c * k[static_cast<std::size_t>(j)]; }
};

// The 4-jet (u, u', u'', u''') of a solution at x.
struct StateVector4 {
    double x = 0.0;
    double u = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;

    double operator[](int order) const;
    double& operator[](int order);
    std::array<double, 4> jet() const { return {u, u1, u2, u3}; }
    bool finite() const;

    static StateVector4 from_jet(double x, const std::array<double, 4>& jet);
};

struct TransferMatrix4 {
    std::array<std::array<double, 4>, 4> entries{};
    double h = 0.0;
    double c = 0.0;

    std::array<double, 4> apply(const std::array<double, 4>& jet) const;
    TransferMatrix4 operator*(const TransferMatrix4& rhs) const;
    double determinant() const;
};

// One constant piece [left, right) of the coefficient in u'''' + value u = 0.
struct PotentialPiece {
    double left = 0.0;
    double right = 0.0;
    double value = 0.0;
};

// Contiguous, increasing list of constant pieces. The first piece may start
// at -inf and the last may end at +inf.
class PiecewisePotential {
public:
    PiecewisePotential() = default;
    explicit PiecewisePotential(std::vector<PotentialPiece> pieces);

    static PiecewisePotential constant(double value,
                                       double left = -std::numeric_limits<double>::infinity(),
                                       double right = std::numeric_limits<double>::infinity());

    const std::vector<PotentialPiece>& pieces() const { return pieces_; }
    double left() const { return pieces_.front().left; }
    double right() const { return pieces_.back().right; }
    bool contains(double x) const { return x >= left() && x <= right(); }

    // Index of the piece holding x (right-continuous; x == right() maps to the
    // last piece).
    std::size_t piece_index(double x) const;
    double value_at(double x) const;
    // Exact integral of the piecewise-constant coefficient over [lo, hi].
    double integral(double lo, double hi) const;
    // Interior breakpoints.
    std::vector<double> breakpoints() const;

private:
    std::vector<PotentialPiece> pieces_;
};

struct SensitivityState {
    double x = 0.0;
    double dB_u = 0.0;
    double dB_u1 = 0.0;
    double dB_u2 = 0.0;
    double dB_u3 = 0.0;

    double operator[](int order) const;
};

KrylovValues krylov_eval(double x, double c, const KernelConfig& cfg = {});

TransferMatrix4 transfer_matrix(double h, double c, const KernelConfig& cfg = {});

// Advances `start` to target_x through u'''' + pot(x) u = 0, i.e. with
// stiffness c = -value on every piece.
StateVector4 propagate(const PiecewisePotential& pot, const StateVector4& start, double target_x,
                       const KernelConfig& cfg = {});

// Same as propagate() for a single constant stiffness c (u'''' = c u) on the
// whole line.
StateVector4 propagate_constant(double c, const StateVector4& start, double target_x,
                                const KernelConfig& cfg = {});

// d/dB of the 4-jet at target_x for u'''' = B u with B-independent data at
// start.x, through the convolution with U = K_3(.; B).
SensitivityState db_propagate(double B, const StateVector4& start, double target_x,
                              const KernelConfig& cfg = {});

namespace detail {
// Both evaluation routes, exposed so they can be checked against each other.
std::array<double, 4> krylov_series(double x, double c);
std::array<double, 4> krylov_closed(double x, double c);
}  // namespace detail

}  // namespace qembed
