#include "oracles.hpp"

#include "qembed/errors.hpp"
#include "qembed/spectral_verifier.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qembed;

namespace {

Eigen::MatrixXd reflection(int n) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) p(i, n - 1 - i) = 1.0;
    return p;
}

}  // namespace

TEST_CASE("eigensolve: 2x2 by hand") {
    Eigen::Matrix2d m;
    m << 2, 1, 1, 2;
    const EigenPairs p = eigensolve_symmetric(Eigen::MatrixXd(m));
    CHECK(p.values(0) == doctest::Approx(1.0));
    CHECK(p.values(1) == doctest::Approx(3.0));
}

TEST_CASE("eigensolve: random 50x50 against power iteration with deflation") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(50, 50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) a(i, j) = normal(rng);
    }
    const Eigen::MatrixXd m = 0.5 * (a + a.transpose());
    const EigenPairs p = eigensolve_symmetric(m);
    const double shift = m.norm();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(50, 50);
    const auto top = oracle::power_deflation(m + shift * id, 5);
    const auto bottom = oracle::power_deflation(shift * id - m, 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(p.values(49 - k) - (top[k] - shift)) < 1e-6);
        CHECK(std::abs(p.values(k) - (shift - bottom[k])) < 1e-6);
    }
    CHECK(std::abs(p.values.sum() - m.trace()) <= 1e-8 * std::max(1.0, m.cwiseAbs().sum()));
    CHECK(p.max_residual <= 1e-8 * p.matrix_norm);
}

TEST_CASE("eigensolve rejects non-square input") {
    CHECK_THROWS_AS(eigensolve_symmetric(Eigen::MatrixXd(3, 4)), DomainError);
}

TEST_CASE("free quartic: clamped-beam eigenvalues") {
    const GridOperator op = discretize_quartic(PiecewisePotential::constant(0.0), 10.0, 200);
    CHECK(op.matrix == op.matrix.transpose());
    const EigenPairs p = eigensolve_symmetric(op);
    CHECK(p.values.minCoeff() >= -1e-9);
    const auto roots = oracle::clamped_beam_roots(3);
    const double length = 2 * op.X;
    for (int k = 0; k < 3; ++k) {
        const double exact = std::pow(roots[k] / length, 4);
        CHECK(std::abs(p.values(k) - exact) <= 2e-2 * exact);
    }
}

TEST_CASE("discretization: breakpoints must lie inside the box, n >= 50") {
    const double inf = std::numeric_limits<double>::infinity();
    const PiecewisePotential pot({{-inf, -5.0, 0.0}, {-5.0, 5.0, 1.0}, {5.0, inf, 0.0}});
    CHECK_THROWS_AS(discretize_quartic(pot, 4.0, 100), DomainError);
    CHECK_THROWS_AS(discretize_quartic(pot, 10.0, 49), DomainError);
}

TEST_CASE("even potential: matrix commutes with the reflection, eigenvectors have parity") {
    const EmbeddedPotentialSpec spec = build_embedded_potential(1.0, -3.0, 1.0);
    const GridOperator op = discretize_quartic(spec, 6.0, 301);
    const Eigen::MatrixXd P = reflection(op.n);
    CHECK((P * op.matrix * P - op.matrix).cwiseAbs().maxCoeff() <= 1e-12 * op.matrix.cwiseAbs().maxCoeff());
    const EigenPairs p = eigensolve_symmetric(op);
    // clusters of (near) degenerate values span reflection-invariant subspaces
    int start = 0;
    const double gap_tol = 1e-8 * p.matrix_norm;
    while (start < op.n) {
        int end = start + 1;
        while (end < op.n && p.values(end) - p.values(end - 1) < gap_tol) ++end;
        const Eigen::MatrixXd V = p.vectors.middleCols(start, end - start);
        const Eigen::MatrixXd PV = P * V;
        CHECK((PV - V * (V.transpose() * PV)).norm() < 1e-6);
        start = end;
    }
}

TEST_CASE("inverse participation ratio") {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(10);
    e(3) = -2.0;
    CHECK(inverse_participation_ratio(e) == doctest::Approx(1.0));
    CHECK(inverse_participation_ratio(Eigen::VectorXd::Ones(10)) == doctest::Approx(0.1));
}

TEST_CASE("free operator has no embedded eigenvalue") {
    const GridOperator op = discretize_quartic(PiecewisePotential::constant(0.0), 25.0, 600);
    const SpectralReport rep = detect_embedded(eigensolve_symmetric(op), op, 1.0, 1.0);
    CHECK(rep.verdict == SpectralVerdict::not_found);
    CHECK(rep.ipr < rep.localization_threshold);
}

TEST_CASE("square discretization keeps spec(L) = spec(H)^2") {
    const SquareDiscretization d =
        discretize_schrodinger_and_square([](double) { return 0.0; }, 10.0, 300);
    const EigenPairs h = eigensolve_symmetric(d.h_op);
    const EigenPairs l = eigensolve_symmetric(d.l_op);
    std::vector<double> sq;
    for (Eigen::Index i = 0; i < h.values.size(); ++i) sq.push_back(h.values(i) * h.values(i));
    std::sort(sq.begin(), sq.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i) worst = std::max(worst, std::abs(sq[i] - l.values(i)));
    CHECK(worst <= 1e-10 * l.matrix_norm);
}

TEST_CASE("sech2 square: bound state of H and embedded eigenvalue of L on a coarse grid") {
    const SchrodingerSquareSpec s = sech2_well();
    const SquareDiscretization d = discretize_schrodinger_and_square(s.V, 20.0, 500);
    const EigenPairs h = eigensolve_symmetric(d.h_op);
    CHECK(std::abs(h.values(0) + 1.0) < 1e-3);
    CHECK(h.values(1) > 0.0);
    DetectOptions opts;
    opts.tol = 2e-3;
    const SpectralReport rep = detect_embedded(eigensolve_symmetric(d.l_op), d.l_op, 1.0, 1.0, opts);
    CHECK(rep.verdict == SpectralVerdict::embedded_candidate);
}

TEST_CASE("shoot_singular: root at 1 and nowhere near") {
    CHECK(shoot_singular(1.0) < 1e-9);
    CHECK(shoot_singular(0.5) > 1e-3);
    CHECK(shoot_singular(2.0) > 1e-3);
    CHECK_THROWS_AS(shoot_singular(0.0), DomainError);
    CHECK_THROWS_AS(shoot_singular(-1.0), DomainError);
}

TEST_CASE("shoot_singular: recovered profile is sin x on the inner interval") {
    const SingularShot shot = shoot_singular(singular_example_spec(), 1.0);
    std::vector<double> xs;
    for (int i = 1; i < 200; ++i) xs.push_back(i * (3 * M_PI / 4) / 200);
    const auto prof = shot_profile(shot, xs);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += prof[i] * std::sin(xs[i]);
        den += std::sin(xs[i]) * std::sin(xs[i]);
    }
    const double scale = num / den;
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(prof[i] / scale - std::sin(xs[i])) < 1e-8);
}

TEST_CASE("shoot_singular on the even variant") {
    CHECK(shoot_singular(even_variant_spec(), 1.0).mismatch < 1e-9);
    CHECK(shoot_singular(even_variant_spec(), 2.0).mismatch > 1e-3);
}

TEST_CASE("shoot_piecewise: root at k0^4, linear in the starting jet") {
    const EmbeddedPotentialSpec spec = build_embedded_potential(1.0, -3.0, 1.0);
    const auto [d1, d3] = shoot_piecewise(spec, spec.lambda());
    CHECK(std::abs(d1) < 1e-8);
    CHECK(std::abs(d3) < 1e-8);
    const auto [o1, o3] = shoot_piecewise(spec, 1.1 * spec.lambda());
    CHECK(std::max(std::abs(o1), std::abs(o3)) > 1e-3);
    const auto [s1, s3] = shoot_piecewise(spec, 1.1 * spec.lambda(), 2.0);
    CHECK(s1 == 2.0 * o1);
    CHECK(s3 == 2.0 * o3);
}

TEST_CASE("mismatch functions are continuous in lambda") {
    const EmbeddedPotentialSpec spec = build_embedded_potential(1.0, -3.0, 1.0);
    for (double lambda : {0.7, 1.0, 1.6}) {
        double prev_s = 1e300, prev_p = 1e300;
        for (double d : {1e-3, 1e-4, 1e-5}) {
            const double ds = std::abs(shoot_singular(lambda + d) - shoot_singular(lambda));
            const auto [u1, u3] = shoot_piecewise(spec, lambda + d);
            const auto [v1, v3] = shoot_piecewise(spec, lambda);
            const double dp = std::abs(u1 - v1) + std::abs(u3 - v3);
            CHECK(ds < prev_s);
            CHECK(dp < prev_p);
            CHECK(ds < 100 * d);
            CHECK(dp < 100 * d);
            prev_s = ds;
            prev_p = dp;
        }
    }
}
