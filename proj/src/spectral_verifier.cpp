#include "qembed/spectral_verifier.hpp"

#include "qembed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qembed {

namespace {

void check_grid(double X, int n) {
    if (n < 50) throw DomainError("discretization needs n >= 50 interior points");
    if (!(X > 0.0) || !std::isfinite(X)) throw DomainError("half-width X must be positive");
}

GridOperator make_grid(double X, int n) {
    check_grid(X, n);
    GridOperator op;
    op.X = X;
    op.n = n;
    op.h = 2.0 * X / (n + 1);
    op.matrix = Eigen::MatrixXd::Zero(n, n);
    return op;
}

}  // namespace

GridOperator discretize_quartic(const PiecewisePotential& q, double X, int n) {
    GridOperator op = make_grid(X, n);
    for (double bp : q.breakpoints()) {
        if (!(bp > -X && bp < X)) {
            std::ostringstream os;
            os << "discretize_quartic: breakpoint " << bp << " lies outside (-X, X) with X = " << X;
            throw DomainError(os.str());
        }
    }
    const double h = op.h;
    const double inv_h4 = 1.0 / (h * h * h * h);
    static constexpr double stencil[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
    for (int i = 0; i < n; ++i) {
        for (int d = -2; d <= 2; ++d) {
            const int j = i + d;
            if (j >= 0 && j < n) op.matrix(i, j) = stencil[d + 2] * inv_h4;
        }
        const double x = op.node(i);
        op.matrix(i, i) += q.integral(x - 0.5 * h, x + 0.5 * h) / h;
    }
    return op;
}

GridOperator discretize_quartic(const EmbeddedPotentialSpec& spec, double X, int n) {
    return discretize_quartic(spec.full_potential(), X, n);
}

SquareDiscretization discretize_schrodinger_and_square(const Sampler& V, double X, int n) {
    if (!V) throw DomainError("discretize_schrodinger_and_square: missing potential sampler");
    SquareDiscretization out;
    out.h_op = make_grid(X, n);
    const double inv_h2 = 1.0 / (out.h_op.h * out.h_op.h);
    for (int i = 0; i < n; ++i) {
        out.h_op.matrix(i, i) = 2.0 * inv_h2 + V(out.h_op.node(i));
        if (i + 1 < n) {
            out.h_op.matrix(i, i + 1) = -inv_h2;
            out.h_op.matrix(i + 1, i) = -inv_h2;
        }
    }
    out.l_op = out.h_op;
    out.l_op.matrix = out.h_op.matrix * out.h_op.matrix;
    // exact symmetry of the product
    out.l_op.matrix = 0.5 * (out.l_op.matrix + out.l_op.matrix.transpose()).eval();
    return out;
}

EigenPairs eigensolve_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DomainError("eigensolve_symmetric: matrix is not square");
    if (m.rows() > kDenseEigenCap) {
        throw DomainError("eigensolve_symmetric: n exceeds the dense budget of 4000");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigensolve_symmetric: implicit QR iteration did not converge");
    }
    EigenPairs out;
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    out.matrix_norm = out.values.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd r = m * out.vectors - out.vectors * out.values.asDiagonal();
    const double bound = 1e-8 * std::max(out.matrix_norm, 1e-300);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        const double res = r.col(j).norm();
        out.max_residual = std::max(out.max_residual, res);
        if (!(res <= bound)) {
            std::ostringstream os;
            os << "eigensolve_symmetric: residual " << res << " of pair " << j
               << " exceeds 1e-8 |M|";
            throw NumericalError(os.str());
        }
    }
    return out;
}

EigenPairs eigensolve_symmetric(const GridOperator& op) { return eigensolve_symmetric(op.matrix); }

const char* to_string(SpectralVerdict v) {
    return v == SpectralVerdict::embedded_candidate ? "EMBEDDED_CANDIDATE" : "NOT_FOUND";
}

double inverse_participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double s2 = v.squaredNorm();
    if (s2 == 0.0) return 0.0;
    return v.array().pow(4).sum() / (s2 * s2);
}

namespace {

// Mean of the left and right tail rates of |v| where it lies between 1e-3 and
// 1e-1 of its peak; further out the discrete state carries a small admixture
// of box modes. NaN when a side has too few points.
double tail_decay(const Eigen::VectorXd& v, const GridOperator& op) {
    const double peak = v.cwiseAbs().maxCoeff();
    double total = 0.0;
    for (int side = -1; side <= 1; side += 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int i = 0; i < op.n; ++i) {
            const double x = op.node(i);
            if (x * side <= 0.0) continue;
            const double a = std::abs(v(i)) / peak;
            if (a > 1e-1 || a < 1e-3) continue;
            const double t = std::abs(x);
            const double y = std::log(a);
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
            ++m;
        }
        if (m < 3) return std::numeric_limits<double>::quiet_NaN();
        total += -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return 0.5 * total;
}

}  // namespace

SpectralReport detect_embedded(const EigenPairs& pairs, const GridOperator& op, double target,
                               double decay_rate, const DetectOptions& opts) {
    const auto n = static_cast<int>(pairs.values.size());
    if (n == 0 || pairs.vectors.cols() != n) throw DomainError("detect_embedded: empty spectrum");
    SpectralReport rep;
    rep.eigenvalues.assign(pairs.values.data(), pairs.values.data() + n);
    rep.target = target;
    rep.decay_rate = decay_rate;
    rep.localization_threshold = opts.localization_factor / n;

    std::vector<double> ipr(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) ipr[static_cast<std::size_t>(j)] = inverse_participation_ratio(pairs.vectors.col(j));
    {
        std::vector<double> sorted = ipr;
        std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
        rep.median_ipr = sorted[static_cast<std::size_t>(n / 2)];
    }

    int pick = -1;
    for (int j = 0; j < n; ++j) {
        if (std::abs(pairs.values(j) - target) < opts.tol &&
            (pick < 0 || ipr[static_cast<std::size_t>(j)] > ipr[static_cast<std::size_t>(pick)])) {
            pick = j;
        }
    }
    if (pick < 0) {
        Eigen::Index idx = 0;
        (pairs.values.array() - target).abs().minCoeff(&idx);
        pick = static_cast<int>(idx);
    }
    rep.nearest_index = pick;
    rep.nearest = pairs.values(pick);
    rep.ipr = ipr[static_cast<std::size_t>(pick)];

    rep.gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        if (j == pick) continue;
        rep.gap = std::min(rep.gap, std::abs(pairs.values(j) - rep.nearest));
        if (ipr[static_cast<std::size_t>(j)] < rep.localization_threshold) {
            if (pairs.values(j) < rep.nearest) {
                ++rep.continuum_below;
            } else {
                ++rep.continuum_above;
            }
        }
    }
    rep.continuum_close = rep.gap < 10.0 * std::abs(rep.nearest - target);
    rep.decay_fit = tail_decay(pairs.vectors.col(pick), op);

    const bool close = std::abs(rep.nearest - target) < opts.tol;
    const bool localized = rep.ipr >= rep.localization_threshold;
    const bool surrounded = rep.continuum_below >= opts.min_continuum_each_side &&
                            rep.continuum_above >= opts.min_continuum_each_side;
    rep.verdict = close && localized && surrounded ? SpectralVerdict::embedded_candidate
                                                   : SpectralVerdict::not_found;
    return rep;
}

SingularShot shoot_singular(const SingularExample& ex, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("shoot_singular: lambda must be positive");
    const double k = std::sqrt(std::sqrt(lambda));
    const double c = ex.interface_position();
    const PointInteraction& pi = ex.interfaces[1];

    SingularShot shot;
    shot.lambda = lambda;
    shot.basis = ex.parity == Parity::odd ? std::array<int, 2>{1, 3} : std::array<int, 2>{0, 2};

    // Local exponential/trigonometric basis at c: e^{-kt}, e^{kt}, cos kt, sin kt.
    Eigen::Matrix4d E;
    const double k2 = k * k, k3 = k2 * k;
    E << 1.0, 1.0, 1.0, 0.0,
        -k, k, 0.0, k,
        k2, k2, -k2, 0.0,
        -k3, k3, 0.0, -k3;
    const Eigen::PartialPivLU<Eigen::Matrix4d> lu(E);

    const KrylovValues kv = krylov_eval(c, lambda);
    Eigen::Matrix<double, 3, 2> growth;
    for (int col = 0; col < 2; ++col) {
        const int j = shot.basis[static_cast<std::size_t>(col)];
        std::array<double, 4> left{};
        for (int i = 0; i < 4; ++i) left[static_cast<std::size_t>(i)] = kv.derivative(i, j);
        const auto right = cross_interface(pi, left);
        const Eigen::Vector4d coef = lu.solve(Eigen::Vector4d(right[0], right[1], right[2], right[3]));
        growth.col(col) = coef.tail<3>();
    }
    const Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(growth, Eigen::ComputeFullV);
    shot.mismatch = svd.singularValues()(1);
    const Eigen::Vector2d v = svd.matrixV().col(1);
    shot.coefficients = {v(0), v(1)};
    return shot;
}

double shoot_singular(double lambda) { return shoot_singular(singular_example_spec(), lambda).mismatch; }

std::vector<double> shot_profile(const SingularShot& shot, const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const KrylovValues kv = krylov_eval(x, shot.lambda);
        out.push_back(shot.coefficients[0] * kv.k[static_cast<std::size_t>(shot.basis[0])] +
                      shot.coefficients[1] * kv.k[static_cast<std::size_t>(shot.basis[1])]);
    }
    return out;
}

std::pair<double, double> shoot_piecewise(const EmbeddedPotentialSpec& spec, double lambda,
                                          double scale) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("shoot_piecewise: lambda must be positive");
    std::vector<PotentialPiece> pieces = spec.pieces.pieces();
    for (auto& p : pieces) p.value -= lambda;
    const PiecewisePotential eq(std::move(pieces));
    const double k = std::sqrt(std::sqrt(lambda));
    const StateVector4 end = propagate(eq, exponential_jet(k, spec.a, scale), 0.0);
    return {end.u1, end.u3};
}

}  // namespace qembed
