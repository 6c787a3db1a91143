#include "qembed/construction.hpp"

#include "qembed/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qembed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

// Jet of the smooth core (sin or cos) at y >= 0.
std::array<double, 4> core_jet(Parity p, double y) {
    const double s = std::sin(y), c = std::cos(y);
    if (p == Parity::odd) return {s, c, -s, -c};
    return {c, -s, -c, s};
}

double core_value(Parity p, double y) { return p == Parity::odd ? std::sin(y) : std::cos(y); }

SingularExample make_singular(Parity parity, double c, double beta, double gamma) {
    SingularExample ex;
    ex.parity = parity;
    ex.amplitude = core_value(parity, c) * std::exp(c);
    ex.interfaces[1] = {c, beta, gamma};
    ex.interfaces[0] = mirrored(ex.interfaces[1]);
    ex.lambda = 1.0;
    return ex;
}

// (beta, gamma) reproducing the jumps of a closed-form example at its interface.
PointInteraction interaction_from_jumps(const SingularExample& shape) {
    const double c = shape.interface_position();
    const auto left = shape.jet(c, true);
    const auto right = shape.jet(c, false);
    const double j2 = right[2] - left[2];
    const double j3 = right[3] - left[3];
    const double u = left[0], up = left[1];
    const double beta = -j2 / u;
    const double gamma = (beta * up - j3) / u;
    return {c, beta, gamma};
}

std::vector<double> symmetric_grid(double step, double half_width) {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("grid_step must be positive");
    if (!(half_width > 0.0)) throw DomainError("grid half width must be positive");
    const auto n = static_cast<long>(std::floor(half_width / step + 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(2 * n + 1));
    for (long i = -n; i <= n; ++i) grid.push_back(static_cast<double>(i) * step);
    return grid;
}

// Eigen-equation coefficient q - lambda, so that propagate() solves
// u'''' + (q - lambda) u = 0.
PiecewisePotential shifted_by(const PiecewisePotential& pot, double lambda) {
    std::vector<PotentialPiece> pieces = pot.pieces();
    for (auto& p : pieces) p.value -= lambda;
    return PiecewisePotential(std::move(pieces));
}

}  // namespace

InterfaceJumps interface_jumps(const PointInteraction& pi, double u_c, double up_c) {
    return {-pi.beta * u_c, pi.beta * up_c - pi.gamma * u_c};
}

std::array<double, 4> cross_interface(const PointInteraction& pi, const std::array<double, 4>& left) {
    const InterfaceJumps j = interface_jumps(pi, left[0], left[1]);
    return {left[0], left[1], left[2] + j.jump_u2, left[3] + j.jump_u3};
}

PointInteraction mirrored(const PointInteraction& pi) { return {-pi.c, -pi.beta, pi.gamma}; }

const char* to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

Parity parity_from_string(const std::string& s) {
    if (s == "odd") return Parity::odd;
    if (s == "even") return Parity::even;
    throw DomainError("parity must be 'odd' or 'even', got '" + s + "'");
}

double SingularExample::eigenfunction(double x) const {
    const double y = std::abs(x);
    const double c = interface_position();
    const double theta = y < c ? core_value(parity, y) : amplitude * std::exp(-y);
    if (x < 0.0 && parity == Parity::odd) return -theta;
    return theta;
}

std::array<double, 4> SingularExample::jet(double x, bool from_left) const {
    const double c = interface_position();
    const double y = std::abs(x);
    // on x < 0 a left limit in x is a right limit in y = -x
    const bool y_from_left = x >= 0.0 ? from_left : !from_left;
    std::array<double, 4> t;
    if (y < c || (y == c && y_from_left)) {
        t = core_jet(parity, y);
    } else {
        const double e = amplitude * std::exp(-y);
        t = {e, -e, e, -e};
    }
    if (x >= 0.0) return t;
    // f(x) = p theta(-x)  =>  f^{(k)}(x) = p (-1)^k theta^{(k)}(-x)
    const double p = parity == Parity::odd ? -1.0 : 1.0;
    return {p * t[0], -p * t[1], p * t[2], -p * t[3]};
}

double SingularExample::norm_squared() const {
    const double c = interface_position();
    const double core = parity == Parity::odd ? 0.5 * c - 0.25 * std::sin(2.0 * c)
                                              : 0.5 * c + 0.25 * std::sin(2.0 * c);
    const double tail = 0.5 * amplitude * amplitude * std::exp(-2.0 * c);
    return 2.0 * (core + tail);
}

SingularExample singular_example_spec() { return make_singular(Parity::odd, 0.75 * kPi, -2.0, 4.0); }

SingularExample even_variant_spec() {
    SingularExample shape = make_singular(Parity::even, 0.25 * kPi, 0.0, 0.0);
    const PointInteraction pi = interaction_from_jumps(shape);
    return make_singular(Parity::even, pi.c, pi.beta, pi.gamma);
}

EigenfunctionSample sample_singular(const SingularExample& ex, double grid_step, double half_width) {
    EigenfunctionSample s;
    s.grid = symmetric_grid(grid_step, half_width);
    s.values.reserve(s.grid.size());
    for (double x : s.grid) s.values.push_back(ex.eigenfunction(x));
    s.lambda = ex.lambda;
    s.decay_rate = 1.0;
    s.parity = ex.parity;
    return s;
}

SingularConstruction singular_example(double grid_step, double half_width) {
    SingularConstruction out;
    out.example = singular_example_spec();
    out.sample = sample_singular(out.example, grid_step, half_width);
    return out;
}

SingularConstruction even_variant(double grid_step, double half_width) {
    SingularConstruction out;
    out.example = even_variant_spec();
    out.sample = sample_singular(out.example, grid_step, half_width);
    return out;
}

PiecewisePotential EmbeddedPotentialSpec::full_potential() const {
    const double shift = lambda();
    return PiecewisePotential({{-kInf, a, 0.0},
                               {a, b, A + shift},
                               {b, -b, -B + shift},
                               {-b, -a, A + shift},
                               {-a, kInf, 0.0}});
}

EmbeddedPotentialSpec make_embedded_spec(double k0, double a, double b, double A, double B,
                                         double zeta) {
    if (!(k0 > 0.0) || !(A > 0.0) || !(B > 0.0)) {
        throw DomainError("embedded potential: k0, A and B must be positive");
    }
    if (!(a < b && b < 0.0)) throw DomainError("embedded potential: need a < b < 0");
    EmbeddedPotentialSpec s;
    s.k0 = k0;
    s.a = a;
    s.b = b;
    s.A = A;
    s.B = B;
    s.zeta = zeta;
    const double shift = s.lambda();
    s.pieces = PiecewisePotential({{-kInf, a, 0.0}, {a, b, A + shift}, {b, 0.0, -B + shift}});
    return s;
}

StateVector4 exponential_jet(double k, double x, double scale) {
    const double e = scale * std::exp(k * x);
    return {x, e, k * e, k * k * e, k * k * k * e};
}

EmbeddedPotentialSpec build_embedded_potential(double k0, double a, double A, const BuildOptions& opts) {
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw DomainError("k0 must be positive");
    if (!(a < 0.0) || !std::isfinite(a)) throw DomainError("a must be negative");
    if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("A must be positive");

    const StateVector4 at_a = exponential_jet(k0, a);
    const ZeroOrdering zeros = observation1_zeros(A, at_a, opts.scan);
    const auto barrier = PiecewisePotential::constant(A);

    double b = 0.5 * (zeros.x2 + zeros.x1);
    StateVector4 at_b = propagate(barrier, at_a, b, opts.scan.kernel);
    int retries = 0;
    auto race_ready = [](const StateVector4& s) {
        return s.u > 0.0 && s.u1 > 0.0 && s.u2 < 0.0 && s.u3 < 0.0;
    };
    while (!race_ready(at_b)) {
        if (++retries > opts.max_b_retries) {
            std::ostringstream os;
            os.precision(17);
            os << "build_embedded_potential: jet at b = " << b
               << " misses the sign pattern (+, +, -, -) after " << opts.max_b_retries << " moves";
            throw ConsistencyError(os.str());
        }
        b = 0.5 * (b + zeros.x1);
        at_b = propagate(barrier, at_a, b, opts.scan.kernel);
    }

    const ContinuationBracket br = find_B_star(at_b, opts.race);
    const double zeta = br.zeta;
    return make_embedded_spec(k0, a - zeta, b - zeta, A, br.B_star, zeta);
}

StateVector4 matching_jet(const EmbeddedPotentialSpec& spec) {
    const PiecewisePotential eq = shifted_by(spec.pieces, spec.lambda());
    return propagate(eq, exponential_jet(spec.k0, spec.a), 0.0);
}

EigenfunctionSample synthesize_eigenfunction(const EmbeddedPotentialSpec& spec, double grid_step,
                                             double half_width) {
    const StateVector4 at0 = matching_jet(spec);
    const double residual = std::abs(at0.u1) + std::abs(at0.u3);
    if (!(residual <= 1e-6)) {
        std::ostringstream os;
        os << "synthesize_eigenfunction: |g'(0)| + |g'''(0)| = " << residual
           << " exceeds 1e-6; spec is inconsistent";
        throw ConsistencyError(os.str());
    }
    const double hw = half_width > 0.0 ? half_width : 25.0 / spec.k0;
    const std::vector<double> grid = symmetric_grid(grid_step, hw);
    const std::size_t n = grid.size() / 2;  // grid[n] == 0

    const PiecewisePotential eq = shifted_by(spec.pieces, spec.lambda());
    std::vector<double> values(grid.size());
    StateVector4 state = exponential_jet(spec.k0, spec.a);
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = grid[i];
        if (x <= spec.a) {
            values[i] = std::exp(spec.k0 * x);
        } else {
            state = propagate(eq, state, x);
            values[i] = state.u;
        }
    }
    for (std::size_t i = 1; i <= n; ++i) values[n + i] = values[n - i];

    EigenfunctionSample s;
    s.grid = grid;
    s.values = std::move(values);
    s.lambda = spec.lambda();
    s.decay_rate = spec.k0;
    s.parity = Parity::even;
    return s;
}

SchrodingerSquareSpec sech2_well() {
    SchrodingerSquareSpec s;
    s.name = "sech2";
    s.V = [](double x) {
        const double h = 1.0 / std::cosh(x);
        return -2.0 * h * h;
    };
    s.dV = [](double x) {
        const double h = 1.0 / std::cosh(x);
        return 4.0 * h * h * std::tanh(x);
    };
    s.d2V = [](double x) {
        const double h2 = 1.0 / (std::cosh(x) * std::cosh(x));
        return 4.0 * h2 * (3.0 * h2 - 2.0);
    };
    s.kappas = {-1.0};
    s.bound_states = {[](double x) { return 1.0 / std::cosh(x); }};
    return s;
}

SquareCoefficients schrodinger_square(const SchrodingerSquareSpec& spec) {
    if (!spec.V || !spec.dV || !spec.d2V) throw DomainError("schrodinger_square: missing sampler");
    SquareCoefficients out;
    // (-D^2 + V)^2 u = u'''' - 2 V u'' - 2 V' u' + (V^2 - V'') u
    out.a2 = [V = spec.V](double x) { return -2.0 * V(x); };
    out.a1 = [dV = spec.dV](double x) { return -2.0 * dV(x); };
    out.a0 = [V = spec.V, d2V = spec.d2V](double x) {
        const double v = V(x);
        return v * v - d2V(x);
    };
    for (double k : spec.kappas) {
        if (!(k < 0.0)) throw DomainError("schrodinger_square: bound-state energies must be negative");
    }
    for (std::size_t i = 1; i < spec.kappas.size(); ++i) {
        if (!(spec.kappas[i - 1] < spec.kappas[i])) {
            throw DomainError("schrodinger_square: bound-state energies must be increasing");
        }
    }
    for (double k : spec.kappas) out.predicted_eigenvalues.push_back(k * k);
    return out;
}

double h_eigen_residual(const SchrodingerSquareSpec& spec, std::size_t index, double half_width,
                        double step) {
    if (index >= spec.kappas.size() || index >= spec.bound_states.size()) {
        throw DomainError("h_eigen_residual: no bound state with this index");
    }
    const Sampler& psi = spec.bound_states[index];
    const double kappa = spec.kappas[index];
    double worst = 0.0, scale = 0.0;
    for (double x = -half_width; x <= half_width; x += step) {
        const double p = psi(x);
        const double d2 = (psi(x + step) - 2.0 * p + psi(x - step)) / (step * step);
        worst = std::max(worst, std::abs(-d2 + spec.V(x) * p - kappa * p));
        scale = std::max(scale, std::abs(p));
    }
    return worst / scale;
}

DecayFit fit_decay(const EigenfunctionSample& sample, double outer_fraction) {
    if (sample.grid.size() != sample.values.size() || sample.grid.size() < 4) {
        throw DomainError("fit_decay: grid and values must match and hold a few points");
    }
    const double xmax = std::max(std::abs(sample.grid.front()), std::abs(sample.grid.back()));
    const double cut = (1.0 - outer_fraction) * xmax;
    auto slope = [&](bool right) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < sample.grid.size(); ++i) {
            const double x = sample.grid[i];
            const double v = std::abs(sample.values[i]);
            if ((right ? x : -x) < cut || v == 0.0) continue;
            const double y = std::log(v);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        if (m < 2) throw DomainError("fit_decay: too few nonzero points in the outer window");
        const double md = static_cast<double>(m);
        return (md * sxy - sx * sy) / (md * sxx - sx * sx);
    };
    return {slope(false), -slope(true)};
}

}  // namespace qembed
