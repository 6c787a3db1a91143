#include "qembed/quartic_kernel.hpp"

#include "qembed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace qembed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quartic_root(double c) { return std::sqrt(std::sqrt(std::abs(c))); }

std::string piece_name(std::size_t index, const PotentialPiece& p) {
    std::ostringstream os;
    os << "piece " << index << " [" << p.left << ", " << p.right << ") value " << p.value;
    return os.str();
}

}  // namespace

namespace detail {

std::array<double, 4> krylov_series(double x, double c) {
    std::array<double, 4> out{};
    const double x4c = c * x * x * x * x;
    double lead = 1.0;  // x^j / j!
    for (int j = 0; j < 4; ++j) {
        if (j > 0) lead *= x / j;
        double term = lead;
        double sum = term;
        for (int n = 0; n < 200; ++n) {
            const double m = 4.0 * n + j;
            term *= x4c / ((m + 1) * (m + 2) * (m + 3) * (m + 4));
            sum += term;
            if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        }
        out[static_cast<std::size_t>(j)] = sum;
    }
    return out;
}

std::array<double, 4> krylov_closed(double x, double c) {
    if (c > 0.0) {
        const double s = quartic_root(c);
        const double y = s * x;
        const double ch = std::cosh(y), sh = std::sinh(y);
        const double co = std::cos(y), si = std::sin(y);
        return {0.5 * (ch + co), 0.5 * (sh + si) / s, 0.5 * (ch - co) / (s * s),
                0.5 * (sh - si) / (s * s * s)};
    }
    if (c < 0.0) {
        // roots of r^4 = c lie at p(+-1 +- i), p = |c|^{1/4}/sqrt(2)
        const double p = quartic_root(c) / std::sqrt(2.0);
        const double y = p * x;
        const double ch = std::cosh(y), sh = std::sinh(y);
        const double co = std::cos(y), si = std::sin(y);
        return {ch * co, (ch * si + sh * co) / (2.0 * p), sh * si / (2.0 * p * p),
                (ch * si - sh * co) / (4.0 * p * p * p)};
    }
    return {1.0, x, 0.5 * x * x, x * x * x / 6.0};
}

}  // namespace detail

double KrylovValues::derivative(int i, int j) const {
    const int shifted = j - i;
    if (shifted >= 0) return k[static_cast<std::size_t>(shifted)];
    return c * k[static_cast<std::size_t>(shifted + 4)];
}

double StateVector4::operator[](int order) const {
    switch (order) {
        case 0: return u;
        case 1: return u1;
        case 2: return u2;
        case 3: return u3;
        default: throw DomainError("derivative order must be in 0..3");
    }
}

double& StateVector4::operator[](int order) {
    switch (order) {
        case 0: return u;
        case 1: return u1;
        case 2: return u2;
        case 3: return u3;
        default: throw DomainError("derivative order must be in 0..3");
    }
}

bool StateVector4::finite() const {
    return std::isfinite(x) && std::isfinite(u) && std::isfinite(u1) && std::isfinite(u2) &&
           std::isfinite(u3);
}

StateVector4 StateVector4::from_jet(double x, const std::array<double, 4>& jet) {
    return {x, jet[0], jet[1], jet[2], jet[3]};
}

double SensitivityState::operator[](int order) const {
    switch (order) {
        case 0: return dB_u;
        case 1: return dB_u1;
        case 2: return dB_u2;
        case 3: return dB_u3;
        default: throw DomainError("derivative order must be in 0..3");
    }
}

std::array<double, 4> TransferMatrix4::apply(const std::array<double, 4>& jet) const {
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 4; ++j) acc += entries[i][j] * jet[j];
        out[i] = acc;
    }
    return out;
}

TransferMatrix4 TransferMatrix4::operator*(const TransferMatrix4& rhs) const {
    TransferMatrix4 out;
    out.h = h + rhs.h;
    out.c = c;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 4; ++k) acc += entries[i][k] * rhs.entries[k][j];
            out.entries[i][j] = acc;
        }
    }
    return out;
}

double TransferMatrix4::determinant() const {
    // Gaussian elimination with partial pivoting on a copy.
    auto m = entries;
    double det = 1.0;
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 4; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (m[pivot][col] == 0.0) return 0.0;
        if (pivot != col) {
            std::swap(m[pivot], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (std::size_t r = col + 1; r < 4; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
        }
    }
    return det;
}

PiecewisePotential::PiecewisePotential(std::vector<PotentialPiece> pieces)
    : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw DomainError("piecewise potential needs at least one piece");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (std::isnan(p.left) || std::isnan(p.right) || !std::isfinite(p.value)) {
            throw DomainError("non-finite data in " + piece_name(i, p));
        }
        if (!(p.left < p.right)) throw DomainError("empty or reversed " + piece_name(i, p));
        if (i > 0 && pieces_[i - 1].right != p.left) {
            throw DomainError("pieces are not contiguous at " + piece_name(i, p));
        }
        if ((i > 0 && p.left == -kInf) || (i + 1 < pieces_.size() && p.right == kInf)) {
            throw DomainError("only the outer pieces may be unbounded");
        }
    }
}

PiecewisePotential PiecewisePotential::constant(double value, double left, double right) {
    return PiecewisePotential({{left, right, value}});
}

std::size_t PiecewisePotential::piece_index(double x) const {
    if (!contains(x)) {
        std::ostringstream os;
        os << "x = " << x << " lies outside the potential domain [" << left() << ", " << right()
           << "]";
        throw DomainError(os.str());
    }
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const PotentialPiece& p) { return v < p.right; });
    if (it == pieces_.end()) return pieces_.size() - 1;
    return static_cast<std::size_t>(it - pieces_.begin());
}

double PiecewisePotential::value_at(double x) const { return pieces_[piece_index(x)].value; }

double PiecewisePotential::integral(double lo, double hi) const {
    if (hi < lo) return -integral(hi, lo);
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double l = std::max(lo, p.left);
        const double r = std::min(hi, p.right);
        if (r > l) total += p.value * (r - l);
    }
    return total;
}

std::vector<double> PiecewisePotential::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].left);
    return out;
}

KrylovValues krylov_eval(double x, double c, const KernelConfig& cfg) {
    if (!std::isfinite(x) || !std::isfinite(c)) throw DomainError("krylov_eval: non-finite input");
    const double arg = quartic_root(c) * std::abs(x);
    if (arg > cfg.magnitude_cap) {
        std::ostringstream os;
        os << "krylov_eval: |c|^(1/4)|x| = " << arg << " exceeds cap " << cfg.magnitude_cap
           << "; shrink the step";
        throw SaturationError(os.str());
    }
    KrylovValues out;
    out.x = x;
    out.c = c;
    out.k = arg <= cfg.series_cutoff ? detail::krylov_series(x, c) : detail::krylov_closed(x, c);
    return out;
}

TransferMatrix4 transfer_matrix(double h, double c, const KernelConfig& cfg) {
    const KrylovValues kv = krylov_eval(h, c, cfg);
    TransferMatrix4 t;
    t.h = h;
    t.c = c;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            t.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = kv.derivative(i, j);
        }
    }
    return t;
}

namespace {

// Advance within one constant piece, splitting into equal substeps under the cap.
std::array<double, 4> advance(double c, std::array<double, 4> jet, double length,
                              const KernelConfig& cfg) {
    if (length <= 0.0) return jet;
    const double rate = quartic_root(c);
    const auto steps = static_cast<long>(std::max(1.0, std::ceil(rate * length / cfg.substep_cap)));
    const double h = length / static_cast<double>(steps);
    const TransferMatrix4 t = transfer_matrix(h, c, cfg);
    for (long s = 0; s < steps; ++s) jet = t.apply(jet);
    return jet;
}

}  // namespace

StateVector4 propagate(const PiecewisePotential& pot, const StateVector4& start, double target_x,
                       const KernelConfig& cfg) {
    if (!start.finite() || !std::isfinite(target_x)) throw DomainError("propagate: non-finite input");
    if (target_x < start.x) throw DomainError("propagate: target lies before the start point");
    std::size_t idx = pot.piece_index(start.x);
    (void)pot.piece_index(target_x);

    auto jet = start.jet();
    double x = start.x;
    const auto& pieces = pot.pieces();
    while (x < target_x) {
        const auto& piece = pieces[idx];
        const double stop = std::min(piece.right, target_x);
        jet = advance(-piece.value, jet, stop - x, cfg);
        if (!std::isfinite(jet[0]) || !std::isfinite(jet[1]) || !std::isfinite(jet[2]) ||
            !std::isfinite(jet[3])) {
            throw SaturationError("propagate: solution overflowed in " + piece_name(idx, piece));
        }
        x = stop;
        if (x < target_x) ++idx;
    }
    return StateVector4::from_jet(target_x, jet);
}

StateVector4 propagate_constant(double c, const StateVector4& start, double target_x,
                                const KernelConfig& cfg) {
    return propagate(PiecewisePotential::constant(-c), start, target_x, cfg);
}

namespace {

using Vec4 = std::array<double, 4>;

struct SimpsonNode {
    double a, b;
    Vec4 fa, fm, fb, whole;
    int depth;
};

Vec4 simpson(double a, double b, const Vec4& fa, const Vec4& fm, const Vec4& fb) {
    Vec4 out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = (b - a) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
    return out;
}

template <class F>
Vec4 adaptive_simpson(const F& f, double a, double b, double tol) {
    constexpr int kMaxDepth = 48;
    const double m = 0.5 * (a + b);
    const Vec4 fa = f(a), fm = f(m), fb = f(b);
    std::vector<SimpsonNode> stack{{a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 0}};
    Vec4 total{};
    while (!stack.empty()) {
        SimpsonNode n = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (n.a + n.b);
        const double lm = 0.5 * (n.a + mid), rm = 0.5 * (mid + n.b);
        const Vec4 flm = f(lm), frm = f(rm);
        const Vec4 left = simpson(n.a, mid, n.fa, flm, n.fm);
        const Vec4 right = simpson(mid, n.b, n.fm, frm, n.fb);
        double err = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            err = std::max(err, std::abs(left[i] + right[i] - n.whole[i]));
        }
        // tolerance is split between halves; the Richardson term is added
        const double local_tol = tol * (n.b - n.a) / (b - a);
        if (err <= 15.0 * local_tol || n.depth >= kMaxDepth) {
            for (std::size_t i = 0; i < 4; ++i) {
                total[i] += left[i] + right[i] + (left[i] + right[i] - n.whole[i]) / 15.0;
            }
            continue;
        }
        stack.push_back({mid, n.b, n.fm, frm, n.fb, right, n.depth + 1});
        stack.push_back({n.a, mid, n.fa, flm, n.fm, left, n.depth + 1});
    }
    return total;
}

}  // namespace

SensitivityState db_propagate(double B, const StateVector4& start, double target_x,
                              const KernelConfig& cfg) {
    if (!(B > 0.0)) throw DomainError("db_propagate: B must be positive");
    if (!start.finite() || !std::isfinite(target_x)) {
        throw DomainError("db_propagate: non-finite input");
    }
    if (target_x < start.x) throw DomainError("db_propagate: target lies before the start point");
    SensitivityState out;
    out.x = target_x;
    if (target_x == start.x) return out;

    const Vec4 jet0 = start.jet();
    // integrand(xi) = U^{(k)}(target - xi) u(xi), k = 0..3, U = K_3
    auto integrand = [&](double xi) {
        const KrylovValues at_xi = krylov_eval(xi - start.x, B, cfg);
        double u = 0.0;
        for (int j = 0; j < 4; ++j) u += jet0[static_cast<std::size_t>(j)] * at_xi.k[static_cast<std::size_t>(j)];
        const KrylovValues kernel = krylov_eval(target_x - xi, B, cfg);
        Vec4 v{};
        for (int k = 0; k < 4; ++k) v[static_cast<std::size_t>(k)] = kernel.derivative(k, 3) * u;
        return v;
    };
    const Vec4 r = adaptive_simpson(integrand, start.x, target_x, cfg.quadrature_tol);
    out.dB_u = r[0];
    out.dB_u1 = r[1];
    out.dB_u2 = r[2];
    out.dB_u3 = r[3];
    return out;
}

}  // namespace qembed
