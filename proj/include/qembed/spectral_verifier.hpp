#pragma once

// Numerical evidence for an eigenvalue embedded in approximate continuum:
// finite-difference operators on [-X, X] with clamped ends, a dense symmetric
// eigensolve, localization statistics, and shooting mismatch functions.

#include "qembed/construction.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace qembed {

struct GridOperator {
    double X = 0.0;
    int n = 0;
    double h = 0.0;  // 2X / (n + 1)
    Eigen::MatrixXd matrix;

    // Interior node i = 0..n-1 sits at -X + (i + 1) h.
    double node(int i) const { return -X + (i + 1) * h; }
};

// (1, -4, 6, -4, 1)/h^4 plus the cell average of q on [x_i - h/2, x_i + h/2].
GridOperator discretize_quartic(const PiecewisePotential& q, double X, int n);
GridOperator discretize_quartic(const EmbeddedPotentialSpec& spec, double X, int n);

struct SquareDiscretization {
    GridOperator h_op;  // (-1, 2, -1)/h^2 + V(x_i)
    GridOperator l_op;  // h_op.matrix squared
};

SquareDiscretization discretize_schrodinger_and_square(const Sampler& V, double X, int n);

struct EigenPairs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // unit columns
    double matrix_norm = 0.0;   // spectral norm
    double max_residual = 0.0;  // max_j |M v_j - lambda_j v_j|
};

constexpr int kDenseEigenCap = 4000;

EigenPairs eigensolve_symmetric(const GridOperator& op);
EigenPairs eigensolve_symmetric(const Eigen::MatrixXd& m);

enum class SpectralVerdict { embedded_candidate, not_found };

const char* to_string(SpectralVerdict v);

struct DetectOptions {
    double tol = 1e-2;                 // |nearest - target| bound
    double localization_factor = 10.0;  // localized iff ipr >= factor / n
    int min_continuum_each_side = 10;
};

struct SpectralReport {
    std::vector<double> eigenvalues;
    double target = 0.0;
    double nearest = 0.0;
    int nearest_index = -1;
    double gap = 0.0;  // distance to the closest other eigenvalue
    double ipr = 0.0;
    double median_ipr = 0.0;
    double localization_threshold = 0.0;
    int continuum_below = 0;
    int continuum_above = 0;
    double decay_rate = 0.0;  // expected
    double decay_fit = 0.0;   // fitted on the tails of the selected eigenvector
    bool continuum_close = false;  // gap < 10 |nearest - target|
    SpectralVerdict verdict = SpectralVerdict::not_found;
};

double inverse_participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& v);

// Picks the most localized eigenvalue within tol of target (the nearest one
// if none is within tol) and tests it against the embeddedness criterion.
SpectralReport detect_embedded(const EigenPairs& pairs, const GridOperator& op, double target,
                               double decay_rate, const DetectOptions& opts = {});

struct SingularShot {
    double lambda = 0.0;
    double mismatch = 0.0;  // smallest singular value of the 3x2 non-decay map
    std::array<double, 2> coefficients{};  // on the two parity basis kernels
    std::array<int, 2> basis{};            // Krylov indices used (1, 3) or (0, 2)
};

SingularShot shoot_singular(const SingularExample& ex, double lambda);
double shoot_singular(double lambda);

// Solution alpha K_i + beta K_j of the shot, evaluated inside the interface.
std::vector<double> shot_profile(const SingularShot& shot, const std::vector<double>& xs);

// (u'(0), u'''(0)) starting from scale * e^{lambda^{1/4} x} at a.
std::pair<double, double> shoot_piecewise(const EmbeddedPotentialSpec& spec, double lambda,
                                          double scale = 1.0);

}  // namespace qembed
