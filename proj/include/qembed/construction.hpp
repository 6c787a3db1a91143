#pragma once

// Fourth-order operators with an eigenvalue inside [0, inf):
//   * a delta/delta' point-interaction pair with eigenvalue 1 (odd and even
//     variants),
//   * an even piecewise-constant potential with eigenvalue k0^4, built by
//     continuation in the depth of its inner well,
//   * the square of a Schrodinger operator with a bound state.

#include "qembed/quartic_kernel.hpp"
#include "qembed/zero_tracker.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace qembed {

// beta * delta'(x - c) + gamma * delta(x - c) acting on u.
struct PointInteraction {
    double c = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

struct InterfaceJumps {
    double jump_u2 = 0.0;  // u''(c+) - u''(c-)
    double jump_u3 = 0.0;  // u'''(c+) - u'''(c-)
};

// Jumps forced on a C^1 solution of u'''' + (beta d' + gamma d) u = lambda u.
InterfaceJumps interface_jumps(const PointInteraction& pi, double u_c, double up_c);

// Jet just to the right of pi.c given the jet just to its left.
std::array<double, 4> cross_interface(const PointInteraction& pi, const std::array<double, 4>& left);

// Interaction at -c that keeps an even or odd eigenfunction of the mirrored
// problem a solution: (beta, gamma) -> (-beta, gamma).
PointInteraction mirrored(const PointInteraction& pi);

enum class Parity { odd, even };

const char* to_string(Parity p);
Parity parity_from_string(const std::string& s);

// theta(x) = core(x) on [0, c), amplitude * e^{-x} beyond, extended to R by
// parity. core is sin for the odd example and cos for the even one.
struct SingularExample {
    double amplitude = 0.0;
    std::array<PointInteraction, 2> interfaces{};  // at -c and +c
    double lambda = 1.0;
    Parity parity = Parity::odd;

    double interface_position() const { return interfaces[1].c; }
    // Closed-form eigenfunction and its 4-jet (one-sided at the interfaces;
    // `from_left` picks the left limit).
    double eigenfunction(double x) const;
    std::array<double, 4> jet(double x, bool from_left = false) const;
    // Exact squared L2 norm.
    double norm_squared() const;
};

struct EigenfunctionSample {
    std::vector<double> grid;
    std::vector<double> values;
    double lambda = 0.0;
    double decay_rate = 0.0;
    Parity parity = Parity::even;
};

struct SingularConstruction {
    SingularExample example;
    EigenfunctionSample sample;
};

// Odd example: sin x up to 3pi/4, interactions (beta, gamma) = (-2, 4) there.
SingularExample singular_example_spec();
// Even example: cos x up to pi/4, (beta, gamma) read off from the jumps.
SingularExample even_variant_spec();

SingularConstruction singular_example(double grid_step, double half_width = 25.0);
SingularConstruction even_variant(double grid_step, double half_width = 25.0);

// Samples an example's closed-form eigenfunction on a symmetric grid.
EigenfunctionSample sample_singular(const SingularExample& ex, double grid_step, double half_width);

struct EmbeddedPotentialSpec {
    double k0 = 1.0;
    double a = 0.0;     // shifted frame: a < b < 0
    double b = 0.0;
    double A = 0.0;
    double B = 0.0;
    double zeta = 0.0;  // matching point before the shift
    // Coefficient q on (-inf, 0]: 0 | A + k0^4 | -B + k0^4, extended evenly.
    PiecewisePotential pieces;
    bool even = true;

    double lambda() const { return k0 * k0 * k0 * k0; }
    // q on the whole line, pieces merged across 0.
    PiecewisePotential full_potential() const;
};

EmbeddedPotentialSpec make_embedded_spec(double k0, double a, double b, double A, double B,
                                         double zeta = 0.0);

struct BuildOptions {
    RaceOptions race{};
    ScanOptions scan{};
    int max_b_retries = 8;
};

// Places the outer barrier at `a` (frame before the shift), chooses b between
// the first zeros of u'' and u' on the barrier, tunes the inner well depth B
// until u' and u''' vanish together at zeta, then shifts zeta to 0.
EmbeddedPotentialSpec build_embedded_potential(double k0, double a, double A,
                                               const BuildOptions& opts = {});

// Jet of e^{k x} at x, scaled by `scale`.
StateVector4 exponential_jet(double k, double x, double scale = 1.0);

// g = e^{k0 x} left of a, propagated to 0, reflected evenly. Grid is
// symmetric: i * grid_step for |i| * grid_step <= half_width (default 25/k0).
EigenfunctionSample synthesize_eigenfunction(const EmbeddedPotentialSpec& spec, double grid_step,
                                             double half_width = 0.0);

// Jet of g at 0 in the shifted frame.
StateVector4 matching_jet(const EmbeddedPotentialSpec& spec);

using Sampler = std::function<double(double)>;

struct SchrodingerSquareSpec {
    std::string name;
    Sampler V;
    Sampler dV;
    Sampler d2V;
    std::vector<double> kappas;          // bound-state energies of H, increasing, negative
    std::vector<Sampler> bound_states;   // optional closed forms, same order as kappas
};

// V(x) = -2 sech^2 x: one bound state, energy -1, eigenfunction sech x.
SchrodingerSquareSpec sech2_well();

// L = H^2 = d^4 + a2 d^2 + a1 d + a0.
struct SquareCoefficients {
    Sampler a2;
    Sampler a1;
    Sampler a0;
    std::vector<double> predicted_eigenvalues;  // kappa_j^2, decreasing
};

SquareCoefficients schrodinger_square(const SchrodingerSquareSpec& spec);

// max |(-psi'' + V psi - kappa psi)(x)| / max |psi| on a uniform grid, using
// second differences of the supplied eigenfunction.
double h_eigen_residual(const SchrodingerSquareSpec& spec, std::size_t index, double half_width,
                        double step);

// Log-linear fit of |f| against |x| on the outer 20% of each side of the grid.
struct DecayFit {
    double left = 0.0;   // rate on x < 0
    double right = 0.0;  // rate on x > 0
};

DecayFit fit_decay(const EigenfunctionSample& sample, double outer_fraction = 0.2);

}  // namespace qembed
